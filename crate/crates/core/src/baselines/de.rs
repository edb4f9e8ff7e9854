//! Success-history adaptive differential evolution (SHADE) and its variant
//! with linear population size reduction (L-SHADE).

use crate::budget::{Budget, Evaluator};
use crate::error::{Error, Result};
use crate::problem::Objective;
use crate::record::RunRecord;
use crate::rng::RngStream;

use super::pso::{check_initial_budget, uniform_point};

pub const SHADE_ID: &str = "shade";
pub const LSHADE_ID: &str = "lshade";

#[derive(Debug, Clone, PartialEq)]
pub struct ShadeConfig {
    pub population: usize,
    /// Number of entries in the parameter memories.
    pub memory_size: usize,
    /// Archive capacity as a multiple of the current population.
    pub archive_rate: f64,
    /// Fraction of the population eligible as the `pbest` target.
    pub p_best: f64,
    /// When set, the population shrinks linearly in spent evaluations from
    /// `population` down to this size, and a crossover memory entry can
    /// become terminal (crossover rate pinned at 0).
    pub lpsr_min: Option<usize>,
}

impl ShadeConfig {
    /// SHADE for a `dim`-dimensional problem: `10 * dim` individuals and an
    /// archive as large as the population.
    pub fn shade(dim: usize) -> Self {
        Self {
            population: (10 * dim).max(4),
            memory_size: 6,
            archive_rate: 1.0,
            p_best: 0.11,
            lpsr_min: None,
        }
    }

    /// L-SHADE for a `dim`-dimensional problem: `18 * dim` individuals
    /// reduced to 4, archive rate 2.6.
    pub fn lshade(dim: usize) -> Self {
        Self {
            population: (18 * dim).max(4),
            memory_size: 6,
            archive_rate: 2.6,
            p_best: 0.11,
            lpsr_min: Some(4),
        }
    }

    pub fn algorithm_id(&self) -> &'static str {
        if self.lpsr_min.is_some() {
            LSHADE_ID
        } else {
            SHADE_ID
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || self.lpsr_min.is_some_and(|m| m < 4 || m > self.population) {
            return Err(Error::InvalidConfig(
                "DE population sizes must be at least 4 and non-increasing".into(),
            ));
        }
        if self.memory_size == 0 {
            return Err(Error::InvalidConfig("memory_size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p_best) || self.p_best == 0.0 {
            return Err(Error::InvalidConfig("p_best must lie in (0, 1]".into()));
        }
        if self.archive_rate < 0.0 {
            return Err(Error::InvalidConfig("archive_rate must be non-negative".into()));
        }
        Ok(())
    }

    /// Target population after `used` of `max_nfe` evaluations.
    pub fn population_at(&self, used: u64, max_nfe: u64) -> usize {
        match self.lpsr_min {
            None => self.population,
            Some(min) => {
                let frac = used as f64 / max_nfe as f64;
                let n = self.population as f64 + (min as f64 - self.population as f64) * frac;
                (n.round() as usize).clamp(min, self.population)
            }
        }
    }
}

/// State reported to an observer after every generation.
pub struct DeGeneration<'a> {
    pub generation: usize,
    pub population: usize,
    /// Crossover-rate memory; `None` marks a terminal entry.
    pub memory_cr: &'a [Option<f64>],
    pub memory_f: &'a [f64],
    pub archive_len: usize,
    pub nfe: u64,
}

pub fn shade_run(
    objective: &dyn Objective,
    cfg: &ShadeConfig,
    budget: Budget,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    de_run_observed(objective, cfg, budget, rng, &mut |_| {})
}

/// L-SHADE with the defaults of [`ShadeConfig::lshade`].
pub fn lshade_run(objective: &dyn Objective, budget: Budget, rng: &mut RngStream) -> Result<RunRecord> {
    let cfg = ShadeConfig::lshade(objective.dimension());
    de_run_observed(objective, &cfg, budget, rng, &mut |_| {})
}

/// `sum w v^2 / sum w v`. L-SHADE uses it for both memories, SHADE only
/// for the scale factor (its crossover memory takes the weighted mean).
fn weighted_lehmer(values: &[f64], weights: &[f64]) -> f64 {
    let num: f64 = values.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    let den: f64 = values.iter().zip(weights).map(|(v, w)| w * v).sum();
    num / den
}

/// Index in `0..n` different from every entry of `exclude`.
fn pick_excluding(n: usize, exclude: &[usize], rng: &mut RngStream) -> usize {
    loop {
        let r = rng.below(n);
        if !exclude.contains(&r) {
            return r;
        }
    }
}

pub fn de_run_observed(
    objective: &dyn Objective,
    cfg: &ShadeConfig,
    budget: Budget,
    rng: &mut RngStream,
    observer: &mut dyn FnMut(&DeGeneration<'_>),
) -> Result<RunRecord> {
    cfg.validate()?;
    check_initial_budget(&budget, cfg.population)?;
    let seed = rng.seed();
    let max_nfe = budget.max_nfe();
    let bounds = objective.bounds();
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let dim = bounds.dim();
    let terminal_allowed = cfg.lpsr_min.is_some();
    let mut ev = Evaluator::new(objective, budget);

    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| uniform_point(lower, upper, rng))
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|x| ev.eval(x).expect("budget checked")).collect();
    let mut archive: Vec<Vec<f64>> = Vec::new();
    let mut m_cr: Vec<Option<f64>> = vec![Some(0.5); cfg.memory_size];
    let mut m_f = vec![0.5; cfg.memory_size];
    let mut k = 0;
    let mut generation = 0;

    'run: loop {
        let n = pop.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let n_pbest = ((cfg.p_best * n as f64).round() as usize).clamp(2, n);

        let mut trials = Vec::with_capacity(n);
        let mut params = Vec::with_capacity(n);
        for i in 0..n {
            let r = rng.below(cfg.memory_size);
            let cr = match m_cr[r] {
                Some(mu) => rng.normal_with(mu, 0.1).clamp(0.0, 1.0),
                None => 0.0,
            };
            let f = loop {
                let f = rng.cauchy(m_f[r], 0.1);
                if f > 0.0 {
                    break f.min(1.0);
                }
            };
            let pb = order[rng.below(n_pbest)];
            let r1 = pick_excluding(n, &[i], rng);
            let r2 = loop {
                let r2 = rng.below(n + archive.len());
                if r2 != i && r2 != r1 {
                    break r2;
                }
            };
            let x2 = if r2 < n { &pop[r2] } else { &archive[r2 - n] };
            let jrand = rng.below(dim);
            let xi = &pop[i];
            let mut u = xi.clone();
            for j in 0..dim {
                if j == jrand || rng.uniform() < cr {
                    let mut v = xi[j] + f * (pop[pb][j] - xi[j]) + f * (pop[r1][j] - x2[j]);
                    if v < lower[j] {
                        v = 0.5 * (lower[j] + xi[j]);
                    } else if v > upper[j] {
                        v = 0.5 * (upper[j] + xi[j]);
                    }
                    u[j] = v;
                }
            }
            trials.push(u);
            params.push((cr, f));
        }

        let mut s_cr = Vec::new();
        let mut s_f = Vec::new();
        let mut s_w = Vec::new();
        let mut exhausted = false;
        for (i, u) in trials.into_iter().enumerate() {
            let Some(fu) = ev.eval(&u) else {
                exhausted = true;
                break;
            };
            if fu <= fit[i] {
                if fu < fit[i] {
                    s_cr.push(params[i].0);
                    s_f.push(params[i].1);
                    s_w.push(fit[i] - fu);
                    archive.push(std::mem::replace(&mut pop[i], u));
                } else {
                    pop[i] = u;
                }
                fit[i] = fu;
            }
        }

        if !s_f.is_empty() {
            let total: f64 = s_w.iter().sum();
            let weights: Vec<f64> = if total > 0.0 && total.is_finite() {
                s_w.iter().map(|w| w / total).collect()
            } else {
                vec![1.0 / s_w.len() as f64; s_w.len()]
            };
            let max_cr = s_cr.iter().copied().fold(0.0, f64::max);
            m_cr[k] = if terminal_allowed && (m_cr[k].is_none() || max_cr == 0.0) {
                None
            } else {
                let mean = if terminal_allowed {
                    weighted_lehmer(&s_cr, &weights)
                } else {
                    s_cr.iter().zip(&weights).map(|(c, w)| c * w).sum()
                };
                Some(mean.clamp(0.0, 1.0))
            };
            m_f[k] = weighted_lehmer(&s_f, &weights).clamp(0.0, 1.0);
            k = (k + 1) % cfg.memory_size;
        }

        let target = cfg.population_at(ev.used(), max_nfe);
        if target < pop.len() {
            let mut idx: Vec<usize> = (0..pop.len()).collect();
            idx.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
            idx.truncate(target);
            idx.sort_unstable();
            pop = idx.iter().map(|&i| pop[i].clone()).collect();
            fit = idx.iter().map(|&i| fit[i]).collect();
        }
        let cap = (cfg.archive_rate * pop.len() as f64).round() as usize;
        while archive.len() > cap {
            let r = rng.below(archive.len());
            archive.swap_remove(r);
        }

        generation += 1;
        observer(&DeGeneration {
            generation,
            population: pop.len(),
            memory_cr: &m_cr,
            memory_f: &m_f,
            archive_len: archive.len(),
            nfe: ev.used(),
        });
        if exhausted || ev.is_exhausted() {
            break 'run;
        }
    }
    Ok(ev.finish(cfg.algorithm_id(), seed))
}
