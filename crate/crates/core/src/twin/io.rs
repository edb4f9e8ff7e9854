//! Plain-text matrices.
//!
//! ```text
//! # optional comment lines
//! 2 3
//! 0.5 1 -2
//! 3 4 5
//! ```
//!
//! The first non-comment line gives rows and columns; each following line is
//! one row. Signals are stored one lead per row, preceded by a
//! `# sample_period <ms>` comment. Floats use shortest round-trip formatting.

use std::fmt::Write as _;

use super::model::EcgSignal;
use crate::error::{Error, Result};

pub fn write_matrix(rows: &[Vec<f64>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = format!("{} {}\n", rows.len(), cols);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| err(0, "missing header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(hl, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(err(hl, "header must be '<rows> <cols>'".into()));
    };
    let mut out = Vec::with_capacity(rows);
    for (ln, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(err(ln, format!("expected {cols} values, found {}", row.len())));
        }
        if out.len() == rows {
            return Err(err(ln, format!("more than {rows} rows")));
        }
        out.push(row);
    }
    if out.len() != rows {
        return Err(err(0, format!("expected {rows} rows, found {}", out.len())));
    }
    Ok(out)
}

pub fn write_signal(signal: &EcgSignal) -> String {
    format!("# sample_period {:?}\n{}", signal.sample_period, write_matrix(&signal.leads))
}

pub fn read_signal(text: &str) -> Result<EcgSignal> {
    let period = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# sample_period"))
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad sample period '{}'", v.trim()),
            })
        })
        .transpose()?
        .unwrap_or(1.0);
    EcgSignal::new(read_matrix(text)?, period)
}

/// `node x y sigma` rows, one per grid node.
pub fn write_sigma_map(nx: usize, sigma: &[f64]) -> String {
    let mut out = String::from("node x y sigma\n");
    for (k, s) in sigma.iter().enumerate() {
        let _ = writeln!(out, "{k} {} {} {s:?}", k % nx, k / nx);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = vec![vec![0.1, -2.5e-300, 3.0], vec![f64::MIN_POSITIVE, 1.0 / 3.0, 0.0]];
        assert_eq!(read_matrix(&write_matrix(&m)).unwrap(), m);
        let s = EcgSignal::new(m, 0.5).unwrap();
        assert_eq!(read_signal(&write_signal(&s)).unwrap(), s);
    }

    #[test]
    fn errors_name_the_line() {
        match read_matrix("2 2\n1 2\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_matrix("2 2\n1 2\n").is_err());
        assert!(read_matrix("1 2\n1 2 3\n").is_err());
    }

    #[test]
    fn sigma_rows() {
        let text = write_sigma_map(2, &[0.0, 1.5, 2.0]);
        assert_eq!(text, "node x y sigma\n0 0 0 0.0\n1 1 0 1.5\n2 0 1 2.0\n");
    }
}
