//! Box-constrained objectives.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Axis-aligned search box `[lb, ub]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBounds("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidBounds(format!(
                "lb[{i}] = {} is not below ub[{i}] = {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` in every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Saturate `x` in place.
    pub fn clip_in_place(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(*l).min(*u);
        }
    }
}

/// Component-wise saturation of `x` into `bounds`.
pub fn clip_to_bounds(x: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    if x.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: x.len(),
        });
    }
    let mut out = x.to_vec();
    bounds.clip_in_place(&mut out);
    Ok(out)
}

/// A deterministic scalar objective over a box.
pub trait Objective: Sync {
    fn bounds(&self) -> &Bounds;

    fn evaluate(&self, x: &[f64]) -> f64;

    fn dimension(&self) -> usize {
        self.bounds().dim()
    }

    /// Identifier written into run records.
    fn id(&self) -> String {
        "objective".to_string()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn id(&self) -> String {
        (**self).id()
    }
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    id: String,
    bounds: Bounds,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(id: impl Into<String>, bounds: Bounds, f: F) -> Self {
        Self {
            id: id.into(),
            bounds,
            f,
        }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn id(&self) -> String {
        self.id.clone()
    }
}

/// Wraps an objective and counts every evaluation.
pub struct Counting<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O: Objective> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<O: Objective> Objective for Counting<O> {
    fn bounds(&self) -> &Bounds {
        self.inner.bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
    fn id(&self) -> String {
        self.inner.id()
    }
}

/// `f(x) = sum x_i^2`, handy in tests and examples.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Bounds {
        Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn clip_saturates() {
        assert_eq!(clip_to_bounds(&[5.0, -5.0], &unit2()).unwrap(), vec![1.0, 0.0]);
        assert_eq!(clip_to_bounds(&[0.5, 0.5], &unit2()).unwrap(), vec![0.5, 0.5]);
        let b = Bounds::uniform(1, -100.0, 100.0).unwrap();
        assert_eq!(clip_to_bounds(&[-100.0], &b).unwrap(), vec![-100.0]);
    }

    #[test]
    fn clip_rejects_wrong_length() {
        assert_eq!(
            clip_to_bounds(&[0.0], &unit2()),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(vec![], vec![]).is_err());
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn counting_wrapper_counts() {
        let f = Counting::new(FnObjective::new("s", unit2(), sphere));
        for _ in 0..7 {
            f.evaluate(&[0.1, 0.2]);
        }
        assert_eq!(f.calls(), 7);
    }
}
