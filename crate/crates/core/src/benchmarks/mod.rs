//! Shifted and rotated test functions in the style of the CEC 2022 suite.
//!
//! Five function classes are provided, each at `D = 10` or `D = 20` on the
//! box `[-100, 100]^D`:
//!
//! | id  | landscape                                     | optimum |
//! |-----|-----------------------------------------------|---------|
//! | F1  | Zakharov                                      | 300     |
//! | F2  | Rosenbrock                                    | 400     |
//! | F3  | expanded Schaffer F7                          | 600     |
//! | F6  | hybrid of Bent Cigar, HGBat and Rastrigin     | 1800.5 at `o` |
//! | F10 | composition of Schwefel, Rastrigin and HGBat  | about 2500 |
//!
//! The shift vectors and rotations are generated from a seed rather than read
//! from the official data files, so absolute values differ from published
//! tables while the landscape classes stay the same.
//!
//! ```
//! use fcpo::benchmarks::{make_case, FunctionId};
//! use fcpo::Objective;
//!
//! let case = make_case(FunctionId::F1, 10, 42).unwrap();
//! let o = case.transforms()[0].shift.clone();
//! assert!((case.evaluate(&o) - 300.0).abs() < 1e-9);
//! ```

mod basic;
mod io;

pub use basic::{
    bent_cigar, eval_basic, hgbat, rastrigin, rosenbrock, schaffer_f7_expanded, schwefel_mod,
    zakharov, BasicFunction,
};
pub use io::{read_case, write_case};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::random_orthogonal;
use crate::problem::{Bounds, Objective};
use crate::rng::{derive_run_seed, RngStream};

pub const SEARCH_LOWER: f64 = -100.0;
pub const SEARCH_UPPER: f64 = 100.0;
/// Shift vectors are drawn from `[-80, 80]`, the central 80% of the box.
pub const SHIFT_RADIUS: f64 = 80.0;
pub const SUPPORTED_DIMS: [usize; 2] = [10, 20];

const F2_SCALE: f64 = 2.048 / 100.0;
const F3_SCALE: f64 = 0.005;
const HGBAT_SCALE: f64 = 0.05;
const RASTRIGIN_SCALE: f64 = 0.0512;
const SCHWEFEL_SCALE: f64 = 10.0;

const F6_PROPORTIONS: [f64; 2] = [0.4, 0.4];

const F10_SIGMA: [f64; 3] = [20.0, 10.0, 10.0];
const F10_LAMBDA: [f64; 3] = [1.0, 1.0, 1.0];
const F10_COMPONENT_BIAS: [f64; 3] = [0.0, 200.0, 100.0];

const SUITE_SALT: u64 = 0x6265_6e63_685f_7375;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F6,
    F10,
}

impl FunctionId {
    pub const ALL: [FunctionId; 5] = [Self::F1, Self::F2, Self::F3, Self::F6, Self::F10];

    pub fn bias(self) -> f64 {
        match self {
            Self::F1 => 300.0,
            Self::F2 => 400.0,
            Self::F3 => 600.0,
            Self::F6 => 1800.0,
            Self::F10 => 2500.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "F1",
            Self::F2 => "F2",
            Self::F3 => "F3",
            Self::F6 => "F6",
            Self::F10 => "F10",
        }
    }

    fn n_transforms(self) -> usize {
        match self {
            Self::F10 => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown function id '{s}'")))
    }
}

/// Shift, rotation and permutation of one benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformData {
    pub shift: Vec<f64>,
    pub rotation: DMatrix<f64>,
    /// Zero-based coordinate permutation; only the hybrid function reads it.
    pub perm: Vec<usize>,
    pub bias: f64,
    pub seed: u64,
}

impl TransformData {
    pub fn generate(dim: usize, bias: f64, seed: u64) -> Self {
        let mut rng = RngStream::new(seed);
        let shift = (0..dim)
            .map(|_| rng.uniform_in(-SHIFT_RADIUS, SHIFT_RADIUS))
            .collect();
        let rotation = random_orthogonal(dim, &mut rng);
        let perm = rng.permutation(dim);
        Self {
            shift,
            rotation,
            perm,
            bias,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// `M (scale * (x - o))`.
    pub fn shift_rotate(&self, x: &[f64], scale: f64) -> Vec<f64> {
        let d = self.dim();
        let diff: Vec<f64> = x
            .iter()
            .zip(&self.shift)
            .map(|(xi, oi)| scale * (xi - oi))
            .collect();
        (0..d)
            .map(|i| (0..d).map(|j| self.rotation[(i, j)] * diff[j]).sum())
            .collect()
    }

    fn squared_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.shift)
            .map(|(xi, oi)| (xi - oi).powi(2))
            .sum()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.rotation.nrows() != d || self.rotation.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.rotation.nrows(),
            });
        }
        let mut seen = vec![false; d];
        for &p in &self.perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidConfig(format!(
                    "perm is not a permutation of 0..{d}"
                )));
            }
        }
        if self.perm.len() != d {
            return Err(Error::InvalidConfig("perm has the wrong length".into()));
        }
        Ok(())
    }
}

/// One benchmark instance; implements [`Objective`].
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    function: FunctionId,
    bounds: Bounds,
    transforms: Vec<TransformData>,
}

impl BenchmarkCase {
    /// Assembles a case from explicit transform data. F10 takes three
    /// transforms, every other function one.
    pub fn from_transforms(function: FunctionId, transforms: Vec<TransformData>) -> Result<Self> {
        if transforms.len() != function.n_transforms() {
            return Err(Error::InvalidConfig(format!(
                "{function} needs {} transform(s), got {}",
                function.n_transforms(),
                transforms.len()
            )));
        }
        let dim = transforms[0].dim();
        if !SUPPORTED_DIMS.contains(&dim) {
            return Err(Error::InvalidConfig(format!(
                "dimension {dim} not supported (use 10 or 20)"
            )));
        }
        for t in &transforms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.dim(),
                });
            }
            t.validate()?;
        }
        Ok(Self {
            function,
            bounds: Bounds::uniform(dim, SEARCH_LOWER, SEARCH_UPPER)?,
            transforms,
        })
    }

    pub fn function(&self) -> FunctionId {
        self.function
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn transforms(&self) -> &[TransformData] {
        &self.transforms
    }

    pub fn known_optimum(&self) -> f64 {
        self.function.bias()
    }

    /// Sizes of the three hybrid segments, `ceil(0.4 D)`, `ceil(0.4 D)` and
    /// the rest.
    pub fn hybrid_partition(dim: usize) -> [usize; 3] {
        let a = (F6_PROPORTIONS[0] * dim as f64).ceil() as usize;
        let b = (F6_PROPORTIONS[1] * dim as f64).ceil() as usize;
        [a, b, dim - a - b]
    }

    fn eval_hybrid(&self, x: &[f64]) -> f64 {
        let t = &self.transforms[0];
        let y = t.shift_rotate(x, 1.0);
        let z: Vec<f64> = t.perm.iter().map(|&p| y[p]).collect();
        let [a, b, _] = Self::hybrid_partition(z.len());
        let part2: Vec<f64> = z[a..a + b].iter().map(|v| v * HGBAT_SCALE).collect();
        let part3: Vec<f64> = z[a + b..].iter().map(|v| v * RASTRIGIN_SCALE).collect();
        bent_cigar(&z[..a]) + hgbat(&part2) + rastrigin(&part3) + t.bias
    }

    /// Blend weights of the composition components at `x`.
    pub fn composition_weights(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim() as f64;
        let dist2: Vec<f64> = self
            .transforms
            .iter()
            .map(|t| t.squared_distance(x))
            .collect();
        if let Some(hit) = dist2.iter().position(|&s| s == 0.0) {
            let mut w = vec![0.0; dist2.len()];
            w[hit] = 1.0;
            return w;
        }
        let w: Vec<f64> = dist2
            .iter()
            .zip(F10_SIGMA)
            .map(|(&s, sigma)| (-s / (2.0 * d * sigma * sigma)).exp() / s.sqrt())
            .collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return vec![1.0 / w.len() as f64; w.len()];
        }
        w.iter().map(|v| v / total).collect()
    }

    /// Raw value of composition component `k` at `x`, before its bias.
    pub fn composition_component(&self, k: usize, x: &[f64]) -> f64 {
        let t = &self.transforms[k];
        let g = match k {
            0 => schwefel_mod(&t.shift_rotate(x, SCHWEFEL_SCALE)),
            1 => rastrigin(&t.shift_rotate(x, RASTRIGIN_SCALE)),
            _ => hgbat(&t.shift_rotate(x, HGBAT_SCALE)),
        };
        F10_LAMBDA[k] * g
    }

    fn eval_composition(&self, x: &[f64]) -> f64 {
        let w = self.composition_weights(x);
        let mut f = 0.0;
        for (k, wk) in w.iter().enumerate() {
            if *wk != 0.0 {
                f += wk * (self.composition_component(k, x) + F10_COMPONENT_BIAS[k]);
            }
        }
        f + self.function.bias()
    }
}

impl Objective for BenchmarkCase {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let t = &self.transforms[0];
        match self.function {
            FunctionId::F1 => zakharov(&t.shift_rotate(x, 1.0)) + t.bias,
            FunctionId::F2 => {
                let mut z = t.shift_rotate(x, F2_SCALE);
                z.iter_mut().for_each(|v| *v += 1.0);
                rosenbrock(&z) + t.bias
            }
            FunctionId::F3 => schaffer_f7_expanded(&t.shift_rotate(x, F3_SCALE)) + t.bias,
            FunctionId::F6 => self.eval_hybrid(x),
            FunctionId::F10 => self.eval_composition(x),
        }
    }

    fn id(&self) -> String {
        self.function.name().to_string()
    }
}

/// Builds the instance of `function` at `dim` for `instance_seed`.
pub fn make_case(function: FunctionId, dim: usize, instance_seed: u64) -> Result<BenchmarkCase> {
    if !SUPPORTED_DIMS.contains(&dim) {
        return Err(Error::InvalidConfig(format!(
            "dimension {dim} not supported (use 10 or 20)"
        )));
    }
    let transforms = match function {
        FunctionId::F10 => (0..3)
            .map(|k| TransformData::generate(dim, function.bias(), derive_run_seed(instance_seed, k)))
            .collect(),
        _ => vec![TransformData::generate(dim, function.bias(), instance_seed)],
    };
    BenchmarkCase::from_transforms(function, transforms)
}

/// The ten cases `{F1, F2, F3, F6, F10} x {10, 20}`, ordered by function then
/// dimension.
pub fn suite(master_seed: u64) -> Vec<BenchmarkCase> {
    let mut cases = Vec::with_capacity(10);
    for function in FunctionId::ALL {
        for dim in SUPPORTED_DIMS {
            let seed = derive_run_seed(master_seed ^ SUITE_SALT, cases.len() as u64);
            cases.push(make_case(function, dim, seed).expect("supported id and dimension"));
        }
    }
    cases
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biases() {
        let b: Vec<f64> = FunctionId::ALL.iter().map(|f| f.bias()).collect();
        assert_eq!(b, vec![300.0, 400.0, 600.0, 1800.0, 2500.0]);
    }

    #[test]
    fn ids_parse() {
        assert_eq!("f10".parse::<FunctionId>().unwrap(), FunctionId::F10);
        assert!("F4".parse::<FunctionId>().is_err());
        assert!(make_case(FunctionId::F1, 7, 0).is_err());
    }

    #[test]
    fn partition_sizes() {
        assert_eq!(BenchmarkCase::hybrid_partition(20), [8, 8, 4]);
        assert_eq!(BenchmarkCase::hybrid_partition(10), [4, 4, 2]);
    }

    #[test]
    fn shift_inside_central_region() {
        let t = TransformData::generate(20, 0.0, 5);
        assert!(t.shift.iter().all(|v| v.abs() < SHIFT_RADIUS));
    }

    #[test]
    fn composition_exact_hit() {
        let case = make_case(FunctionId::F10, 10, 3).unwrap();
        let o1 = case.transforms()[0].shift.clone();
        assert_eq!(case.composition_weights(&o1), vec![1.0, 0.0, 0.0]);
        let expect = 2500.0 + case.composition_component(0, &o1);
        assert_eq!(case.evaluate(&o1), expect);
    }
}
