//! Basic `(mu/mu_w, lambda)` CMA-ES with rank-one and rank-mu covariance
//! updates and cumulative step-size adaptation. No restarts.

use nalgebra::{DMatrix, DVector};

use crate::budget::{Budget, Evaluator};
use crate::error::{Error, Result};
use crate::linalg::{eigh, symmetrize};
use crate::problem::Objective;
use crate::record::RunRecord;
use crate::rng::RngStream;

use super::pso::{check_initial_budget, uniform_point};

pub const CMAES_ID: &str = "cmaes";

#[derive(Debug, Clone, PartialEq)]
pub struct CmaesConfig {
    /// Offspring per generation; `None` selects `4 + floor(3 ln D)`.
    pub lambda: Option<usize>,
    /// Initial step size as a fraction of the mean box width.
    pub sigma0_fraction: f64,
    /// Redraws of an out-of-bounds candidate before it is clipped.
    pub max_resamples: usize,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            sigma0_fraction: 0.3,
            max_resamples: 10,
        }
    }
}

impl CmaesConfig {
    pub fn offspring(&self, dim: usize) -> usize {
        self.lambda
            .unwrap_or(4 + (3.0 * (dim as f64).ln()).floor() as usize)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.offspring(dim) < 4 {
            return Err(Error::InvalidConfig("CMA-ES needs lambda >= 4".into()));
        }
        if !(self.sigma0_fraction > 0.0 && self.sigma0_fraction <= 1.0) {
            return Err(Error::InvalidConfig("sigma0_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Strategy constants derived from `D` and `lambda`.
#[derive(Debug, Clone)]
pub struct CmaesParams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub chi_n: f64,
}

impl CmaesParams {
    pub fn new(dim: usize, lambda: usize) -> Self {
        let n = dim as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Self {
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

/// State reported after every generation.
pub struct CmaesGeneration<'a> {
    pub generation: usize,
    pub mean: &'a DVector<f64>,
    pub sigma: f64,
    pub covariance: &'a DMatrix<f64>,
    pub nfe: u64,
}

pub fn cmaes_run(
    objective: &dyn Objective,
    cfg: &CmaesConfig,
    budget: Budget,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    cmaes_run_observed(objective, cfg, budget, rng, &mut |_| {})
}

struct Factorization {
    /// `B diag(sqrt(lambda))`, maps standard normals to `N(0, C)`.
    transform: DMatrix<f64>,
    /// `C^{-1/2}`.
    inv_sqrt: DMatrix<f64>,
}

fn factorize(c: &DMatrix<f64>) -> Option<Factorization> {
    let eig = eigh(c).ok()?;
    let d = eig.values.len();
    let roots: Vec<f64> = eig.values.iter().map(|&v| v.max(1e-20).sqrt()).collect();
    if roots.iter().any(|r| !r.is_finite()) {
        return None;
    }
    let b = &eig.vectors;
    let transform = DMatrix::from_fn(d, d, |i, j| b[(i, j)] * roots[j]);
    let scaled = DMatrix::from_fn(d, d, |i, j| b[(i, j)] / roots[j]);
    Some(Factorization {
        transform,
        inv_sqrt: scaled * b.transpose(),
    })
}

pub fn cmaes_run_observed(
    objective: &dyn Objective,
    cfg: &CmaesConfig,
    budget: Budget,
    rng: &mut RngStream,
    observer: &mut dyn FnMut(&CmaesGeneration<'_>),
) -> Result<RunRecord> {
    let bounds = objective.bounds();
    let dim = bounds.dim();
    cfg.validate(dim)?;
    let p = CmaesParams::new(dim, cfg.offspring(dim));
    check_initial_budget(&budget, p.lambda)?;
    let seed = rng.seed();
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let mut ev = Evaluator::new(objective, budget);

    let mut mean = DVector::from_vec(uniform_point(lower, upper, rng));
    let mean_width = bounds.widths().iter().sum::<f64>() / dim as f64;
    let mut sigma = cfg.sigma0_fraction * mean_width;
    let mut cov = DMatrix::<f64>::identity(dim, dim);
    let mut p_sigma = DVector::<f64>::zeros(dim);
    let mut p_c = DVector::<f64>::zeros(dim);
    let mut fact = factorize(&cov).expect("identity factorizes");
    let mut generation = 0usize;

    'run: loop {
        let mut offspring: Vec<(f64, DVector<f64>)> = Vec::with_capacity(p.lambda);
        for _ in 0..p.lambda {
            let mut x = DVector::zeros(dim);
            for attempt in 0..=cfg.max_resamples {
                let z = DVector::from_fn(dim, |_, _| rng.normal());
                x = &mean + sigma * (&fact.transform * z);
                if bounds.contains(x.as_slice()) || attempt == cfg.max_resamples {
                    break;
                }
            }
            bounds.clip_in_place(x.as_mut_slice());
            let Some(fx) = ev.eval(x.as_slice()) else {
                break 'run;
            };
            offspring.push((fx, x));
        }
        offspring.sort_by(|a, b| a.0.total_cmp(&b.0));

        let old_mean = mean.clone();
        mean = DVector::zeros(dim);
        for (w, (_, x)) in p.weights.iter().zip(&offspring) {
            mean += *w * x;
        }
        let step = (&mean - &old_mean) / sigma;

        p_sigma = (1.0 - p.c_sigma) * &p_sigma
            + (p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff).sqrt() * (&fact.inv_sqrt * &step);
        let gen = (generation + 1) as i32;
        let norm_ps = p_sigma.norm();
        let h_sigma = norm_ps / (1.0 - (1.0 - p.c_sigma).powi(2 * gen)).sqrt()
            < (1.4 + 2.0 / (dim as f64 + 1.0)) * p.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        p_c = (1.0 - p.c_c) * &p_c + h * (p.c_c * (2.0 - p.c_c) * p.mu_eff).sqrt() * &step;

        let mut rank_mu = DMatrix::<f64>::zeros(dim, dim);
        for (w, (_, x)) in p.weights.iter().zip(&offspring) {
            let y = (x - &old_mean) / sigma;
            rank_mu += *w * &y * y.transpose();
        }
        let delta_h = (1.0 - h) * p.c_c * (2.0 - p.c_c);
        cov = (1.0 - p.c_1 - p.c_mu) * &cov
            + p.c_1 * (&p_c * p_c.transpose() + delta_h * &cov)
            + p.c_mu * rank_mu;
        symmetrize(&mut cov);
        sigma *= ((p.c_sigma / p.d_sigma) * (norm_ps / p.chi_n - 1.0)).exp();

        match factorize(&cov) {
            Some(f) if sigma.is_finite() && sigma > 0.0 => fact = f,
            _ => {
                // Numerical breakdown: restart the search distribution around
                // the current mean.
                cov = DMatrix::identity(dim, dim);
                p_sigma.fill(0.0);
                p_c.fill(0.0);
                sigma = cfg.sigma0_fraction * mean_width;
                fact = factorize(&cov).expect("identity factorizes");
            }
        }

        generation += 1;
        observer(&CmaesGeneration {
            generation,
            mean: &mean,
            sigma,
            covariance: &cov,
            nfe: ev.used(),
        });
        if ev.is_exhausted() {
            break;
        }
    }
    Ok(ev.finish(CMAES_ID, seed))
}
