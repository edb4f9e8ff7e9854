//! Evaluation budgets and best-so-far bookkeeping.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::problem::Objective;
use crate::record::{RunRecord, TracePoint};

/// Maximum number of objective evaluations for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_nfe: u64,
    used_nfe: u64,
}

impl Budget {
    pub fn new(max_nfe: u64) -> Result<Self> {
        if max_nfe == 0 {
            return Err(Error::InvalidConfig("budget must allow at least one evaluation".into()));
        }
        Ok(Self { max_nfe, used_nfe: 0 })
    }

    pub fn max_nfe(&self) -> u64 {
        self.max_nfe
    }

    pub fn used_nfe(&self) -> u64 {
        self.used_nfe
    }

    pub fn remaining(&self) -> u64 {
        self.max_nfe - self.used_nfe
    }

    pub fn is_exhausted(&self) -> bool {
        self.used_nfe >= self.max_nfe
    }

    /// Fraction of the budget already spent, in `[0, 1]`.
    pub fn spent_fraction(&self) -> f64 {
        self.used_nfe as f64 / self.max_nfe as f64
    }

    /// Charges one evaluation. Returns `false`, leaving the count untouched,
    /// if nothing is left.
    pub fn try_charge(&mut self) -> bool {
        if self.is_exhausted() {
            false
        } else {
            self.used_nfe += 1;
            true
        }
    }
}

/// Routes every evaluation of a run through the budget and records the
/// best-so-far trace.
///
/// Evaluations never exceed the budget: once it is spent, [`Evaluator::eval`]
/// returns `None` without calling the objective.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    budget: Budget,
    best_value: f64,
    best_position: Vec<f64>,
    trace: Vec<TracePoint>,
    started: Instant,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, budget: Budget) -> Self {
        Self {
            objective,
            budget,
            best_value: f64::INFINITY,
            best_position: Vec::new(),
            trace: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn remaining(&self) -> u64 {
        self.budget.remaining()
    }

    pub fn is_exhausted(&self) -> bool {
        self.budget.is_exhausted()
    }

    pub fn used(&self) -> u64 {
        self.budget.used_nfe()
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    /// Evaluates `x`, or returns `None` if the budget is spent. Non-finite
    /// objective values are mapped to `+inf` so that comparisons stay total.
    pub fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if !self.budget.try_charge() {
            return None;
        }
        let mut value = self.objective.evaluate(x);
        if value.is_nan() {
            value = f64::INFINITY;
        }
        if value < self.best_value || self.trace.is_empty() {
            self.best_value = value;
            self.best_position.clear();
            self.best_position.extend_from_slice(x);
            self.trace.push(TracePoint {
                nfe: self.budget.used_nfe(),
                best: value,
            });
        }
        Some(value)
    }

    /// Closes the run. The final value is the best value ever evaluated.
    pub fn finish(self, algorithm_id: impl Into<String>, seed: u64) -> RunRecord {
        let runtime_ms = (self.started.elapsed().as_secs_f64() * 1e3).max(f64::MIN_POSITIVE);
        RunRecord {
            function_id: self.objective.id(),
            dimension: self.objective.dimension(),
            algorithm_id: algorithm_id.into(),
            seed,
            final_value: self.best_value,
            nfe: self.budget.used_nfe(),
            runtime_ms,
            trace: self.trace,
            best_position: self.best_position,
        }
    }
}
