use crate::error::{Error, Result};

/// Component switches used by the ablation study.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ablation {
    /// Exploration-state particles take the plain swarm update instead of the
    /// elite-difference jump.
    pub no_zoom: bool,
    /// The elite covariance eigensystem is never computed; eigen-aligned
    /// refinement falls back to the plain update and the late local search
    /// probes coordinate axes.
    pub no_eigen: bool,
    /// The population stays at `p_init` for the whole run.
    pub no_lpsr: bool,
}

impl Ablation {
    /// Suffix appended to the algorithm id, e.g. `"_nozoom"`.
    pub fn suffix(&self) -> String {
        let mut s = String::new();
        if self.no_zoom {
            s.push_str("_nozoom");
        }
        if self.no_eigen {
            s.push_str("_noeigen");
        }
        if self.no_lpsr {
            s.push_str("_nolpsr");
        }
        s
    }
}

/// Tunables of one optimizer run. Defaults follow [`FcpoConfig::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct FcpoConfig {
    pub p_init: usize,
    pub p_min: usize,
    pub t_max: usize,
    /// Transition period: eigensystem refresh and state resampling happen
    /// every `t_trans` iterations.
    pub t_trans: usize,
    pub c1: f64,
    pub c2: f64,
    /// Column-reinforcement rate of the transition matrix.
    pub eta: f64,
    /// Iterations without improvement of the global best before the
    /// exploration column is boosted.
    pub stagnation_threshold: usize,
    pub zoomies_cutoff_rho: f64,
    pub lockdown_rho: f64,
    pub elite_fraction: f64,
    pub golden_start_rho: f64,
    pub maximin_candidates: usize,
    pub ablation: Ablation,
}

/// Fraction of the box width allowed per velocity component.
pub const VELOCITY_CLAMP_FRACTION: f64 = 0.2;
/// Velocity bound multiplier during the terminal lockdown.
pub const LOCKDOWN_VELOCITY_FACTOR: f64 = 1e-6;
/// Step scales of the late local search, as fractions of the box width.
pub const GOLDEN_SCALES: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Maximum number of directions probed per scale.
pub const GOLDEN_MAX_DIRECTIONS: usize = 5;

impl FcpoConfig {
    /// Defaults for a `dim`-dimensional problem run for `t_max` iterations:
    /// `p_init = 10 * dim`, `p_min = 4`, `t_trans = 10` (or `t_max` if smaller),
    /// `c1 = c2 = 1.49445`, `eta = 0.2`.
    pub fn new(dim: usize, t_max: usize) -> Self {
        Self {
            p_init: (10 * dim).max(4),
            p_min: 4,
            t_max,
            t_trans: t_max.clamp(1, 10),
            c1: 1.49445,
            c2: 1.49445,
            eta: 0.2,
            stagnation_threshold: 10,
            zoomies_cutoff_rho: 0.9,
            lockdown_rho: 0.98,
            elite_fraction: 0.4,
            golden_start_rho: 0.9,
            maximin_candidates: crate::sampling::DEFAULT_MAXIMIN_CANDIDATES,
            ablation: Ablation::default(),
        }
    }

    pub fn with_population(mut self, p_init: usize) -> Self {
        self.p_init = p_init;
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.p_min < 2 {
            return fail("p_min must be at least 2");
        }
        if self.p_init < self.p_min {
            return fail("p_init must be at least p_min");
        }
        if self.t_max == 0 || self.t_trans == 0 || self.t_trans > self.t_max {
            return fail("need 0 < t_trans <= t_max");
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return fail("eta must lie in [0, 1]");
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return fail("elite_fraction must lie in (0, 1]");
        }
        if self.maximin_candidates == 0 {
            return fail("maximin_candidates must be positive");
        }
        Ok(())
    }

    /// Population size targeted at iteration `t`: linear interpolation from
    /// `p_init` at `t = 0` to `p_min` at `t = t_max`, rounded.
    pub fn lpsr_target(&self, t: usize) -> usize {
        if self.ablation.no_lpsr {
            return self.p_init;
        }
        let frac = t as f64 / self.t_max as f64;
        let raw = self.p_init as f64 + (self.p_min as f64 - self.p_init as f64) * frac;
        (raw.round() as usize).clamp(self.p_min, self.p_init)
    }

    /// Evaluations spent by the late local search in one iteration.
    pub fn golden_probes_per_iteration(dim: usize) -> u64 {
        (2 * GOLDEN_SCALES.len() * dim.min(GOLDEN_MAX_DIRECTIONS)) as u64
    }

    /// Evaluations a full run of `t_max` iterations consumes.
    pub fn planned_nfe(&self, dim: usize) -> u64 {
        let golden = Self::golden_probes_per_iteration(dim);
        let mut total = self.p_init as u64;
        for t in 1..=self.t_max {
            total += self.lpsr_target(t) as u64;
            if t as f64 / self.t_max as f64 >= self.golden_start_rho {
                total += golden;
            }
        }
        total
    }

    /// Picks the largest `t_max` whose full run fits in `max_nfe` evaluations,
    /// so that the late-stage schedule (local search, lockdown) is reached
    /// within the budget. `t_trans` is capped at the resulting `t_max`.
    pub fn fit_to_budget(mut self, dim: usize, max_nfe: u64) -> Result<Self> {
        if max_nfe < self.p_init as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget {max_nfe} cannot cover the initial population of {}",
                self.p_init
            )));
        }
        let fits = |cfg: &mut Self, t_max: usize| {
            cfg.t_max = t_max;
            cfg.planned_nfe(dim) <= max_nfe
        };
        let (mut lo, mut hi) = (1usize, max_nfe as usize);
        if !fits(&mut self, lo) {
            hi = lo;
        }
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if fits(&mut self, mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        self.t_max = lo;
        self.t_trans = self.t_trans.min(lo);
        Ok(self)
    }
}
