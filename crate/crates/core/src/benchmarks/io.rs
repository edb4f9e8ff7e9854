//! Plain-text instance files.
//!
//! A case is written as one block per transform. Each block is
//!
//! ```text
//! F1              function id
//! 10              dimension D
//! 42              seed
//! 300             bias
//! o_1 ... o_D     shift
//! M_11 ... M_1D   rotation, D rows
//! ...
//! p_1 ... p_D     zero-based permutation
//! ```
//!
//! Tokens are whitespace separated and floats use Rust's shortest
//! round-trip formatting, so reading a written case reproduces it bitwise.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{BenchmarkCase, FunctionId, TransformData};
use crate::error::{Error, Result};

pub fn write_case(case: &BenchmarkCase) -> String {
    let mut out = String::new();
    for t in case.transforms() {
        let d = t.dim();
        let _ = writeln!(out, "{}\n{}\n{}\n{:?}", case.function(), d, t.seed, t.bias);
        out.push_str(&join(t.shift.iter().map(|v| format!("{v:?}"))));
        for i in 0..d {
            out.push_str(&join((0..d).map(|j| format!("{:?}", t.rotation[(i, j)]))));
        }
        out.push_str(&join(t.perm.iter().map(|p| p.to_string())));
    }
    out
}

fn join(items: impl Iterator<Item = String>) -> String {
    let mut line = items.collect::<Vec<_>>().join(" ");
    line.push('\n');
    line
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => return Ok((i + 1, l)),
                None => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("unexpected end of input, expected {what}"),
                    })
                }
            }
        }
    }

    fn has_more(&mut self) -> bool {
        while let Some((_, l)) = self.inner.peek() {
            if !l.trim().is_empty() {
                return true;
            }
            self.inner.next();
        }
        false
    }

    fn values<T: std::str::FromStr>(&mut self, what: &str, n: usize) -> Result<Vec<T>> {
        let (line, text) = self.next(what)?;
        let vals = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad token '{tok}' in {what}"),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        if vals.len() != n {
            return Err(Error::Parse {
                line,
                message: format!("{what}: expected {n} values, found {}", vals.len()),
            });
        }
        Ok(vals)
    }
}

pub fn read_case(text: &str) -> Result<BenchmarkCase> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    let mut function = None;
    let mut transforms = Vec::new();
    while lines.has_more() {
        let (line, id_text) = lines.next("function id")?;
        let id: FunctionId = id_text.parse().map_err(|_| Error::Parse {
            line,
            message: format!("unknown function id '{}'", id_text.trim()),
        })?;
        if function.is_some_and(|f| f != id) {
            return Err(Error::Parse {
                line,
                message: "blocks name different functions".into(),
            });
        }
        function = Some(id);
        let d = lines.values::<usize>("dimension", 1)?[0];
        let seed = lines.values::<u64>("seed", 1)?[0];
        let bias = lines.values::<f64>("bias", 1)?[0];
        let shift = lines.values::<f64>("shift", d)?;
        let mut rows = Vec::with_capacity(d * d);
        for _ in 0..d {
            rows.extend(lines.values::<f64>("rotation row", d)?);
        }
        let perm = lines.values::<usize>("permutation", d)?;
        transforms.push(TransformData {
            shift,
            rotation: DMatrix::from_row_slice(d, d, &rows),
            perm,
            bias,
            seed,
        });
    }
    let function = function.ok_or_else(|| Error::Parse {
        line: 0,
        message: "empty input".into(),
    })?;
    BenchmarkCase::from_transforms(function, transforms)
}
