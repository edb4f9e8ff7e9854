//! Unshifted, unrotated basic functions. Each has its minimum 0 except
//! `hgbat` (0.5 at the origin, see [`hgbat`]) and `schwefel_mod`.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasicFunction {
    Zakharov,
    Rosenbrock,
    SchafferF7Expanded,
    BentCigar,
    HgBat,
    Rastrigin,
    SchwefelModified,
}

impl BasicFunction {
    pub fn name(self) -> &'static str {
        match self {
            Self::Zakharov => "zakharov",
            Self::Rosenbrock => "rosenbrock",
            Self::SchafferF7Expanded => "schaffer_f7_expanded",
            Self::BentCigar => "bent_cigar",
            Self::HgBat => "hgbat",
            Self::Rastrigin => "rastrigin",
            Self::SchwefelModified => "schwefel_mod",
        }
    }

    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            Self::Zakharov => zakharov(z),
            Self::Rosenbrock => rosenbrock(z),
            Self::SchafferF7Expanded => schaffer_f7_expanded(z),
            Self::BentCigar => bent_cigar(z),
            Self::HgBat => hgbat(z),
            Self::Rastrigin => rastrigin(z),
            Self::SchwefelModified => schwefel_mod(z),
        }
    }
}

impl FromStr for BasicFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let all = [
            Self::Zakharov,
            Self::Rosenbrock,
            Self::SchafferF7Expanded,
            Self::BentCigar,
            Self::HgBat,
            Self::Rastrigin,
            Self::SchwefelModified,
        ];
        all.into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown basic function '{s}'")))
    }
}

/// Evaluates a basic function by name.
pub fn eval_basic(name: &str, z: &[f64]) -> Result<f64, Error> {
    Ok(name.parse::<BasicFunction>()?.eval(z))
}

pub fn zakharov(z: &[f64]) -> f64 {
    let sq: f64 = z.iter().map(|v| v * v).sum();
    let lin: f64 = z
        .iter()
        .enumerate()
        .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
        .sum();
    sq + lin.powi(2) + lin.powi(4)
}

pub fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

/// `[ (1/(D-1)) sum_i sqrt(s_i) (sin(50 s_i^0.2) + 1) ]^2`, `s_i = |(z_i, z_{i+1})|`.
pub fn schaffer_f7_expanded(z: &[f64]) -> f64 {
    if z.len() < 2 {
        return 0.0;
    }
    let sum: f64 = z
        .windows(2)
        .map(|w| {
            let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
            s.sqrt() * ((50.0 * s.powf(0.2)).sin() + 1.0)
        })
        .sum();
    (sum / (z.len() - 1) as f64).powi(2)
}

pub fn bent_cigar(z: &[f64]) -> f64 {
    match z.split_first() {
        Some((first, rest)) => first * first + 1e6 * rest.iter().map(|v| v * v).sum::<f64>(),
        None => 0.0,
    }
}

/// `|(sum z^2)^2 - (sum z)^2|^0.5 + (0.5 sum z^2 + sum z) / D + 0.5`.
///
/// Applied without an inner shift, so `hgbat(0) = 0.5`.
pub fn hgbat(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let d = z.len() as f64;
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let s: f64 = z.iter().sum();
    (r2 * r2 - s * s).abs().sqrt() + (0.5 * r2 + s) / d + 0.5
}

pub fn rastrigin(z: &[f64]) -> f64 {
    z.iter()
        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
        .sum()
}

const SCHWEFEL_OFFSET: f64 = 4.209_687_462_275_036e2;
const SCHWEFEL_CONST: f64 = 4.189_828_872_724_338e2;

/// Modified Schwefel with wells centred at the origin after the
/// `z + 420.9687` offset, and quadratic penalties outside `[-500, 500]`.
pub fn schwefel_mod(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let mut f = 0.0;
    for &zi in z {
        let u = zi + SCHWEFEL_OFFSET;
        if u > 500.0 {
            let m = 500.0 - u % 500.0;
            f -= m * m.abs().sqrt().sin();
            f += ((u - 500.0) / 100.0).powi(2) / d;
        } else if u < -500.0 {
            let m = -500.0 + u.abs() % 500.0;
            f -= m * (500.0 - u.abs() % 500.0).sqrt().sin();
            f += ((u + 500.0) / 100.0).powi(2) / d;
        } else {
            f -= u * u.abs().sqrt().sin();
        }
    }
    f + SCHWEFEL_CONST * d
}
