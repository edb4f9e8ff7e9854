use std::sync::Mutex;

use super::loss::align_and_loss;
use super::model::{activation_map, activation_std, pseudo_ecg, EcgSignal, GridGraph, LeadField, PmjConfig, PmjSite};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fcpo::{Fcpo, FcpoConfig};
use crate::problem::{Bounds, Objective};
use crate::record::RunRecord;
use crate::rng::{derive_run_seed, RngStream};
use crate::stats::median;

pub const DEFAULT_ONSET_MAX_MS: f64 = 50.0;
pub const DEFAULT_HORIZON: usize = 150;
pub const DEFAULT_LEADS: usize = 12;

/// Calibration target: find `n_pmj` sites whose pseudo-ECG matches `target`.
///
/// The decision vector holds `(u, v, t_onset)` per site, bounded by the grid
/// rectangle and `[0, onset_max]`.
#[derive(Debug, Clone)]
pub struct TwinProblem {
    graph: GridGraph,
    lead_field: LeadField,
    target: EcgSignal,
    bounds: Bounds,
}

impl TwinProblem {
    pub fn new(
        graph: GridGraph,
        lead_field: LeadField,
        target: EcgSignal,
        n_pmj: usize,
        onset_max: f64,
    ) -> Result<Self> {
        if n_pmj == 0 {
            return Err(Error::InvalidConfig("need at least one site".into()));
        }
        if lead_field.nodes() != graph.len() {
            return Err(Error::DimensionMismatch {
                expected: graph.len(),
                got: lead_field.nodes(),
            });
        }
        if target.lead_count() != lead_field.leads() {
            return Err(Error::DimensionMismatch {
                expected: lead_field.leads(),
                got: target.lead_count(),
            });
        }
        let per_site = [
            (0.0, (graph.nx() - 1) as f64),
            (0.0, (graph.ny() - 1) as f64),
            (0.0, onset_max),
        ];
        let (lower, upper) = (0..n_pmj).flat_map(|_| per_site).unzip();
        let bounds = Bounds::new(lower, upper)?;
        Ok(Self {
            graph,
            lead_field,
            target,
            bounds,
        })
    }

    pub fn graph(&self) -> &GridGraph {
        &self.graph
    }

    pub fn lead_field(&self) -> &LeadField {
        &self.lead_field
    }

    pub fn target(&self) -> &EcgSignal {
        &self.target
    }

    pub fn n_pmj(&self) -> usize {
        self.bounds.dim() / 3
    }

    /// Pseudo-ECG of a site configuration on this problem's grid and leads.
    pub fn simulate(&self, pmj: &PmjConfig) -> Result<EcgSignal> {
        pseudo_ecg(&activation_map(&self.graph, pmj), &self.lead_field, self.target.samples())
    }

    pub fn loss(&self, pmj: &PmjConfig) -> Result<f64> {
        Ok(align_and_loss(&self.target, &self.simulate(pmj)?)?.loss)
    }
}

impl Objective for TwinProblem {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// The aligned loss. A configuration with no admissible alignment
    /// evaluates to `f64::MAX` so the optimizer only ever sees finite values.
    fn evaluate(&self, x: &[f64]) -> f64 {
        let loss = PmjConfig::from_vector(x).and_then(|p| self.loss(&p));
        match loss {
            Ok(v) if v.is_finite() => v,
            _ => f64::MAX,
        }
    }

    fn id(&self) -> String {
        "twin".to_string()
    }
}

/// Remembers the first `keep` values it hands out.
struct FirstValues<'a> {
    inner: &'a dyn Objective,
    keep: usize,
    seen: Mutex<Vec<f64>>,
}

impl Objective for FirstValues<'_> {
    fn bounds(&self) -> &Bounds {
        self.inner.bounds()
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let v = self.inner.evaluate(x);
        let mut seen = self.seen.lock().unwrap_or_else(|e| e.into_inner());
        if seen.len() < self.keep {
            seen.push(v);
        }
        v
    }

    fn id(&self) -> String {
        self.inner.id()
    }
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub pmj: PmjConfig,
    pub record: RunRecord,
    /// Median loss of the initial population.
    pub initial_median: f64,
    /// Best loss after initialization (index 0) and after every iteration.
    pub best_per_iteration: Vec<f64>,
    pub activation: Vec<f64>,
}

/// FCPO configuration used by [`calibrate`] when none is given: library
/// defaults with `t_max` fitted to the budget.
pub fn calibration_config(problem: &TwinProblem, max_nfe: u64) -> Result<FcpoConfig> {
    let dim = problem.bounds().dim();
    FcpoConfig::new(dim, 1).fit_to_budget(dim, max_nfe)
}

/// Fits site positions and onsets to the problem's target ECG.
pub fn calibrate(
    problem: &TwinProblem,
    config: FcpoConfig,
    budget: Budget,
    rng: &mut RngStream,
) -> Result<Calibration> {
    let recorder = FirstValues {
        inner: problem,
        keep: config.p_init,
        seen: Mutex::new(Vec::with_capacity(config.p_init)),
    };
    let mut best_per_iteration = Vec::new();
    let (record, _) = Fcpo::new(config)?.run_observed(&recorder, budget, rng, &mut |view| {
        best_per_iteration.push(view.swarm.gbest_value);
    })?;
    let initial = recorder.seen.into_inner().unwrap_or_else(|e| e.into_inner());
    let initial_best = initial.iter().copied().fold(f64::INFINITY, f64::min);
    best_per_iteration.insert(0, initial_best);
    let initial_median = median(&initial).unwrap_or(f64::INFINITY);
    let pmj = PmjConfig::from_vector(&record.best_position)?;
    let activation = activation_map(problem.graph(), &pmj);
    Ok(Calibration {
        pmj,
        record,
        initial_median,
        best_per_iteration,
        activation,
    })
}

/// Settings of the self-calibration experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinDemoConfig {
    pub nx: usize,
    pub ny: usize,
    pub n_pmj: usize,
    pub leads: usize,
    pub horizon: usize,
    pub onset_max: f64,
    pub budget: u64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for TwinDemoConfig {
    fn default() -> Self {
        Self {
            nx: 40,
            ny: 40,
            n_pmj: 3,
            leads: DEFAULT_LEADS,
            horizon: DEFAULT_HORIZON,
            onset_max: DEFAULT_ONSET_MAX_MS,
            budget: 6_000,
            runs: 10,
            seed: 0,
        }
    }
}

impl TwinDemoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.n_pmj == 0 || self.leads == 0 || self.horizon < 2 {
            return Err(Error::InvalidConfig("twin grid, sites, leads and horizon must be non-trivial".into()));
        }
        if !(self.onset_max.is_finite() && self.onset_max >= 0.0) {
            return Err(Error::InvalidConfig("onset_max must be a non-negative number".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("need at least one run".into()));
        }
        Ok(())
    }

    /// Seed of calibration run `i`.
    pub fn run_seed(&self, i: usize) -> u64 {
        derive_run_seed(self.seed, i as u64)
    }
}

/// Builds the grid, lead field and a hidden site configuration from the
/// demo seed, and returns the problem whose target is the truth's ECG.
pub fn synthetic_problem(cfg: &TwinDemoConfig) -> Result<(TwinProblem, PmjConfig)> {
    cfg.validate()?;
    let mut rng = RngStream::new(cfg.seed);
    let mut sub = || derive_run_seed(rng.next_u64(), 0);
    let graph = GridGraph::smooth_random(cfg.nx, cfg.ny, 0.6, 1.0, sub())?;
    let lead_field = LeadField::generate(cfg.leads, &graph, sub());
    let mut truth_rng = RngStream::new(sub());
    let truth = PmjConfig {
        sites: (0..cfg.n_pmj)
            .map(|_| PmjSite {
                u: truth_rng.uniform_in(0.0, (cfg.nx - 1) as f64),
                v: truth_rng.uniform_in(0.0, (cfg.ny - 1) as f64),
                t_onset: truth_rng.uniform_in(0.0, cfg.onset_max),
            })
            .collect(),
    };
    let target = pseudo_ecg(&activation_map(&graph, &truth), &lead_field, cfg.horizon)?;
    let problem = TwinProblem::new(graph, lead_field, target, cfg.n_pmj, cfg.onset_max)?;
    Ok((problem, truth))
}

/// Aggregate of repeated calibrations.
#[derive(Debug, Clone)]
pub struct TwinSummary {
    pub curve_mean: Vec<f64>,
    pub curve_sd: Vec<f64>,
    /// Per-node standard deviation of the calibrated activation maps.
    pub sigma: Vec<f64>,
}

/// Mean and sample standard deviation of the per-iteration best loss, and
/// the activation-time spread. Shorter curves are extended with their last
/// value. A single run gets zero spread.
pub fn summarize(runs: &[Calibration]) -> Result<TwinSummary> {
    if runs.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let len = runs.iter().map(|r| r.best_per_iteration.len()).max().unwrap_or(0);
    let n = runs.len() as f64;
    let at = |r: &Calibration, i: usize| {
        let c = &r.best_per_iteration;
        c[i.min(c.len() - 1)]
    };
    let curve_mean: Vec<f64> = (0..len).map(|i| runs.iter().map(|r| at(r, i)).sum::<f64>() / n).collect();
    let curve_sd = (0..len)
        .map(|i| {
            if runs.len() < 2 {
                return 0.0;
            }
            let ss: f64 = runs.iter().map(|r| (at(r, i) - curve_mean[i]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    let sigma = if runs.len() < 2 {
        vec![0.0; runs[0].activation.len()]
    } else {
        activation_std(&runs.iter().map(|r| r.activation.clone()).collect::<Vec<_>>())?
    };
    Ok(TwinSummary {
        curve_mean,
        curve_sd,
        sigma,
    })
}

/// Runs the whole experiment sequentially.
pub fn demo_twin(cfg: &TwinDemoConfig) -> Result<(TwinProblem, PmjConfig, Vec<Calibration>, TwinSummary)> {
    let (problem, truth) = synthetic_problem(cfg)?;
    let config = calibration_config(&problem, cfg.budget)?;
    let runs = (0..cfg.runs)
        .map(|i| {
            calibrate(
                &problem,
                config.clone(),
                Budget::new(cfg.budget)?,
                &mut RngStream::new(cfg.run_seed(i)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&runs)?;
    Ok((problem, truth, runs, summary))
}
