use crate::budget::{Budget, Evaluator};
use crate::error::{Error, Result};
use crate::fcpo::VELOCITY_CLAMP_FRACTION;
use crate::problem::Objective;
use crate::record::RunRecord;
use crate::rng::RngStream;

pub const PSO_ID: &str = "pso";

/// Global-best particle swarm with a linearly decreasing inertia weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub population: usize,
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            population: 30,
            w_start: 0.9,
            w_end: 0.4,
            c1: 1.49445,
            c2: 1.49445,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidConfig(format!(
                "PSO population must be at least 4, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.w_start) || !(0.0..=1.0).contains(&self.w_end) {
            return Err(Error::InvalidConfig("inertia weights must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Inertia after spending `fraction` of the budget.
    pub fn inertia(&self, fraction: f64) -> f64 {
        self.w_start + (self.w_end - self.w_start) * fraction.clamp(0.0, 1.0)
    }
}

pub(crate) fn check_initial_budget(budget: &Budget, needed: usize) -> Result<()> {
    if budget.remaining() < needed as u64 {
        return Err(Error::InvalidConfig(format!(
            "budget of {} evaluations cannot cover the initial population of {needed}",
            budget.remaining()
        )));
    }
    Ok(())
}

pub(crate) fn uniform_point(lower: &[f64], upper: &[f64], rng: &mut RngStream) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| rng.uniform_in(l, u))
        .collect()
}

/// Runs PSO until the budget is spent. Velocities are clamped to
/// `0.2 (ub - lb)` and positions clipped to the box, as in the swarm
/// update of [`crate::fcpo`].
pub fn pso_run(
    objective: &dyn Objective,
    cfg: &PsoConfig,
    budget: Budget,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    cfg.validate()?;
    check_initial_budget(&budget, cfg.population)?;
    let seed = rng.seed();
    let bounds = objective.bounds();
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let dim = bounds.dim();
    let vmax: Vec<f64> = bounds
        .widths()
        .iter()
        .map(|w| VELOCITY_CLAMP_FRACTION * w)
        .collect();
    let max_nfe = budget.max_nfe() as f64;
    let mut ev = Evaluator::new(objective, budget);

    let mut x: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| uniform_point(lower, upper, rng))
        .collect();
    let mut v = vec![vec![0.0; dim]; cfg.population];
    let mut pbest = x.clone();
    let mut pbest_val: Vec<f64> = x.iter().map(|p| ev.eval(p).expect("budget checked")).collect();
    let mut g = 0;
    for i in 1..cfg.population {
        if pbest_val[i] < pbest_val[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];

    'run: loop {
        let w = cfg.inertia(ev.used() as f64 / max_nfe);
        for i in 0..cfg.population {
            for d in 0..dim {
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                let vd = w * v[i][d]
                    + cfg.c1 * r1 * (pbest[i][d] - x[i][d])
                    + cfg.c2 * r2 * (gbest[d] - x[i][d]);
                v[i][d] = vd.clamp(-vmax[d], vmax[d]);
                x[i][d] = (x[i][d] + v[i][d]).clamp(lower[d], upper[d]);
            }
        }
        for i in 0..cfg.population {
            let Some(fx) = ev.eval(&x[i]) else {
                break 'run;
            };
            if fx < pbest_val[i] {
                pbest_val[i] = fx;
                pbest[i].clone_from(&x[i]);
                if fx < gbest_val {
                    gbest_val = fx;
                    gbest.clone_from(&x[i]);
                }
            }
        }
    }
    Ok(ev.finish(PSO_ID, seed))
}
