//! The Markov-switching particle swarm optimizer.
//!
//! One run proceeds as follows:
//!
//! 1. maximin Latin hypercube initialization, zero velocities, uniformly
//!    random behavioural states and a uniform transition matrix;
//! 2. per iteration `t` with progress `rho = t / t_max`:
//!    * shrink the swarm toward the linear population schedule,
//!    * move every particle with the operator its state selects,
//!    * evaluate, update personal and global bests,
//!    * from `rho >= 0.9` on, run the multi-scale local search around the
//!      global best,
//!    * every `t_trans` iterations refresh the elite eigensystem and advance
//!      the Markov chain;
//! 3. stop after `t_max` iterations or when the budget is spent.

mod config;
mod operators;
mod swarm;

pub use config::{
    Ablation, FcpoConfig, GOLDEN_MAX_DIRECTIONS, GOLDEN_SCALES, LOCKDOWN_VELOCITY_FACTOR,
    VELOCITY_CLAMP_FRACTION,
};
pub use operators::{
    elite_jump, inertia_weight, neutral_update, purr_displacement, purr_move, purr_step,
    restoration_move, velocity_bound, zoomies_move, Move, Operator,
};
pub use swarm::{elite_set, SwarmState};

use crate::budget::{Budget, Evaluator};
use crate::error::{Error, Result};
use crate::markov::{Behavior, State, TransitionMatrix};
use crate::problem::{Bounds, Objective};
use crate::record::RunRecord;
use crate::rng::RngStream;
use crate::sampling::lhs_maximin;

pub const ALGORITHM_ID: &str = "fcpo";

/// Operator intended for a particle, before fallbacks. Exploration jumps are
/// only scheduled while `rho < zoomies_cutoff_rho` and without the `no_zoom`
/// ablation.
pub fn scheduled_operator(state: State, rho: f64, cfg: &FcpoConfig) -> Operator {
    match state.behavior() {
        Behavior::Neutral => Operator::Neutral,
        Behavior::Restoration => Operator::Restoration,
        Behavior::Exploration if rho < cfg.zoomies_cutoff_rho && !cfg.ablation.no_zoom => {
            Operator::Zoomies
        }
        Behavior::Exploration => Operator::Neutral,
        Behavior::Stabilization => Operator::Purr,
    }
}

/// How often each operator ran during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OperatorCounts {
    pub neutral: u64,
    pub zoomies: u64,
    pub purr: u64,
    pub restoration: u64,
    pub golden_probes: u64,
}

impl OperatorCounts {
    fn bump(&mut self, op: Operator) {
        match op {
            Operator::Neutral => self.neutral += 1,
            Operator::Zoomies => self.zoomies += 1,
            Operator::Purr => self.purr += 1,
            Operator::Restoration => self.restoration += 1,
        }
    }
}

/// Snapshot handed to an observer at the end of every iteration.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub rho: f64,
    pub swarm: &'a SwarmState,
    /// Operator applied to each particle this iteration, aligned with the
    /// swarm *before* the state resampling at the end of the iteration.
    pub operators: &'a [Operator],
    /// State each particle held when its move was chosen.
    pub move_states: &'a [State],
    pub nfe: u64,
}

/// Diagnostics of one run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub iterations: usize,
    pub operators: OperatorCounts,
    /// Population size at each iteration (after shrinking).
    pub population: Vec<usize>,
}

/// Multi-scale local search around the global best.
///
/// For each scale in [`GOLDEN_SCALES`] and each of the leading
/// `m = min(D, 5)` eigen-directions `q_k` (coordinate axes when no
/// eigensystem exists), probes `gbest ± scale * s_k * (ub - lb) ⊙ q_k` and
/// greedily accepts any improvement. Returns the number of probes evaluated;
/// stops early when the budget runs out.
pub fn golden_state_refine(
    swarm: &mut SwarmState,
    ev: &mut Evaluator<'_>,
    bounds: &Bounds,
    axis_offset: usize,
) -> u64 {
    let d = swarm.dim();
    let m = d.min(GOLDEN_MAX_DIRECTIONS);
    let directions: Vec<(Vec<f64>, f64)> = match &swarm.eigen {
        Some(eig) => {
            let scales = eig.normalized_scales();
            (0..m)
                .map(|k| (eig.vectors.column(k).iter().copied().collect(), scales[k]))
                .collect()
        }
        None => (0..m)
            .map(|k| {
                let mut e = vec![0.0; d];
                e[(axis_offset + k) % d] = 1.0;
                (e, 1.0)
            })
            .collect(),
    };
    let widths = bounds.widths();
    let holder = swarm.best_index();
    let mut probes = 0;
    for &scale in &GOLDEN_SCALES {
        for (q, s) in &directions {
            for sign in [1.0, -1.0] {
                let mut probe: Vec<f64> = (0..d)
                    .map(|j| swarm.gbest[j] + sign * scale * s * widths[j] * q[j])
                    .collect();
                bounds.clip_in_place(&mut probe);
                let Some(value) = ev.eval(&probe) else {
                    return probes;
                };
                probes += 1;
                if value < swarm.gbest_value {
                    swarm.gbest_value = value;
                    swarm.pbest[holder].clone_from(&probe);
                    swarm.pbest_values[holder] = value;
                    swarm.gbest = probe;
                }
            }
        }
    }
    probes
}

/// The optimizer, bound to one configuration.
#[derive(Debug, Clone)]
pub struct Fcpo {
    config: FcpoConfig,
}

impl Fcpo {
    pub fn new(config: FcpoConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &FcpoConfig {
        &self.config
    }

    /// Algorithm id including ablation suffixes, e.g. `fcpo_nozoom`.
    pub fn algorithm_id(&self) -> String {
        format!("{ALGORITHM_ID}{}", self.config.ablation.suffix())
    }

    pub fn run(
        &self,
        objective: &dyn Objective,
        budget: Budget,
        rng: &mut RngStream,
    ) -> Result<RunRecord> {
        self.run_observed(objective, budget, rng, &mut |_| {})
            .map(|(record, _)| record)
    }

    /// Runs the optimizer, calling `observer` after every iteration.
    pub fn run_observed(
        &self,
        objective: &dyn Objective,
        budget: Budget,
        rng: &mut RngStream,
        observer: &mut dyn FnMut(&IterationView<'_>),
    ) -> Result<(RunRecord, RunStats)> {
        let cfg = &self.config;
        let bounds = objective.bounds();
        let dim = bounds.dim();
        if budget.remaining() < cfg.p_init as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget of {} evaluations cannot cover the initial population of {}",
                budget.remaining(),
                cfg.p_init
            )));
        }
        let seed = rng.seed();
        let mut ev = Evaluator::new(objective, budget);
        let mut stats = RunStats::default();

        let design = lhs_maximin(cfg.p_init, bounds, rng, cfg.maximin_candidates)?;
        let mut values = Vec::with_capacity(cfg.p_init);
        for p in &design.points {
            values.push(ev.eval(p).expect("budget checked above"));
        }
        let best = swarm::argmin(&values);
        let mut swarm = SwarmState {
            velocities: vec![vec![0.0; dim]; cfg.p_init],
            pbest: design.points.clone(),
            gbest: design.points[best].clone(),
            gbest_value: values[best],
            pbest_values: values,
            positions: design.points,
            states: (0..cfg.p_init).map(|_| State::random(rng)).collect(),
            transitions: TransitionMatrix::uniform(),
            eigen: None,
            no_improvement: 0,
            iteration: 0,
        };

        let mut operators = Vec::with_capacity(cfg.p_init);
        let mut golden_calls = 0usize;
        for t in 1..=cfg.t_max {
            let rho = t as f64 / cfg.t_max as f64;
            swarm.iteration = t;
            swarm.shrink_to(cfg.lpsr_target(t), cfg.p_min)?;
            let size = swarm.size();
            stats.population.push(size);

            let elites = elite_set(&swarm.pbest_values, cfg.elite_fraction)?;
            operators.clear();
            let mut moves = Vec::with_capacity(size);
            for i in 0..size {
                let scheduled = scheduled_operator(swarm.states[i], rho, cfg);
                let chosen = match scheduled {
                    Operator::Zoomies => zoomies_move(&swarm, &elites, bounds, rng)
                        .map(|m| (Operator::Zoomies, m)),
                    Operator::Purr => {
                        purr_move(&swarm, i, rho, bounds, rng).map(|m| (Operator::Purr, m))
                    }
                    Operator::Restoration => {
                        Some((Operator::Restoration, restoration_move(&swarm, i, bounds)))
                    }
                    Operator::Neutral => None,
                };
                let (op, mv) = chosen.unwrap_or_else(|| {
                    (Operator::Neutral, neutral_update(&swarm, i, rho, cfg, bounds, rng))
                });
                stats.operators.bump(op);
                operators.push(op);
                moves.push(mv);
            }
            for (i, mv) in moves.into_iter().enumerate() {
                swarm.positions[i] = mv.position;
                swarm.velocities[i] = mv.velocity;
            }

            let before = swarm.gbest_value;
            let mut exhausted = false;
            for i in 0..size {
                let Some(value) = ev.eval(&swarm.positions[i]) else {
                    exhausted = true;
                    break;
                };
                if value < swarm.pbest_values[i] {
                    swarm.pbest_values[i] = value;
                    swarm.pbest[i].clone_from(&swarm.positions[i]);
                    if value < swarm.gbest_value {
                        swarm.gbest_value = value;
                        swarm.gbest.clone_from(&swarm.positions[i]);
                    }
                }
            }

            if !exhausted && rho >= cfg.golden_start_rho {
                let probes = golden_state_refine(&mut swarm, &mut ev, bounds, golden_calls * dim.min(GOLDEN_MAX_DIRECTIONS));
                golden_calls += 1;
                stats.operators.golden_probes += probes;
                exhausted = ev.is_exhausted();
            }

            if swarm.gbest_value < before {
                swarm.no_improvement = 0;
            } else {
                swarm.no_improvement += 1;
            }

            let move_states = swarm.states.clone();
            if !exhausted && t % cfg.t_trans == 0 {
                swarm.update_eigensystem(cfg);
                let best_state = swarm.states[swarm.best_index()];
                let mut a = swarm.transitions.reinforce_best(best_state, cfg.eta);
                if swarm.no_improvement > cfg.stagnation_threshold {
                    a = a.stagnation_bias();
                }
                swarm.transitions = a.renormalize_rows()?;
                swarm.states = swarm.transitions.sample_states(&swarm.states, rng);
            }

            stats.iterations = t;
            observer(&IterationView {
                iteration: t,
                rho,
                swarm: &swarm,
                operators: &operators,
                move_states: &move_states,
                nfe: ev.used(),
            });
            if exhausted || ev.is_exhausted() {
                break;
            }
        }

        Ok((ev.finish(self.algorithm_id(), seed), stats))
    }
}

/// Runs the optimizer once with `cfg`.
pub fn fcpo_run(
    objective: &dyn Objective,
    cfg: FcpoConfig,
    budget: Budget,
    rng: &mut RngStream,
) -> Result<RunRecord> {
    Fcpo::new(cfg)?.run(objective, budget, rng)
}
