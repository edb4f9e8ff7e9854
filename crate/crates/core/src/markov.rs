//! The seven-state Markov controller that schedules per-particle operators.
//!
//! Each particle carries a [`State`]. States 0, 1, 3 and 4 all apply the plain
//! swarm update but stay distinct in the chain, so the controller can learn
//! different routes out of neutral behaviour. State 2 damps the particle back
//! toward its personal best, state 5 triggers the elite-difference jump, and
//! state 6 triggers eigen-aligned refinement.
//!
//! The matrix starts uniform. Every transition step it is updated by column
//! reinforcement toward the state of the current best particle, optionally
//! biased toward exploration under stagnation, renormalized, and then used to
//! resample all states.

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const N_STATES: usize = 7;

/// Column that receives the stagnation bias.
pub const EXPLORATION_STATE: usize = 5;
/// Mass added to the exploration column under stagnation.
pub const STAGNATION_BOOST: f64 = 0.4;

/// Behavioural state of one particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(u8);

/// What a state asks the particle to do this iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    Neutral,
    Restoration,
    Exploration,
    Stabilization,
}

impl State {
    pub const RESTORATION: State = State(2);
    pub const EXPLORATION: State = State(5);
    pub const STABILIZATION: State = State(6);

    pub fn new(index: usize) -> Result<Self> {
        if index < N_STATES {
            Ok(State(index as u8))
        } else {
            Err(Error::Contract(format!("state index {index} out of range 0..{N_STATES}")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn behavior(self) -> Behavior {
        match self.0 {
            2 => Behavior::Restoration,
            5 => Behavior::Exploration,
            6 => Behavior::Stabilization,
            _ => Behavior::Neutral,
        }
    }

    pub fn all() -> impl Iterator<Item = State> + Clone {
        (0..N_STATES as u8).map(State)
    }

    pub fn random(rng: &mut RngStream) -> Self {
        State(rng.below(N_STATES) as u8)
    }
}

/// Row-stochastic 7x7 transition matrix; `rows[j][k] = P(next = k | now = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: [[f64; N_STATES]; N_STATES],
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        Self::uniform()
    }
}

impl TransitionMatrix {
    pub fn uniform() -> Self {
        Self {
            rows: [[1.0 / N_STATES as f64; N_STATES]; N_STATES],
        }
    }

    /// Builds a matrix from raw rows. Entries must be finite and non-negative;
    /// rows are not required to be normalized.
    pub fn from_rows(rows: [[f64; N_STATES]; N_STATES]) -> Result<Self> {
        if rows.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Contract("transition weights must be finite and >= 0".into()));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[f64; N_STATES]; N_STATES] {
        &self.rows
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    /// `A[r][s*] <- (1 - eta) A[r][s*] + eta` for every row `r`.
    pub fn reinforce_best(&self, best_state: State, eta: f64) -> Self {
        let mut next = self.clone();
        let k = best_state.index();
        for row in &mut next.rows {
            row[k] = (1.0 - eta) * row[k] + eta;
        }
        next
    }

    /// `A[r][5] <- A[r][5] + 0.4` for every row `r`.
    pub fn stagnation_bias(&self) -> Self {
        let mut next = self.clone();
        for row in &mut next.rows {
            row[EXPLORATION_STATE] += STAGNATION_BOOST;
        }
        next
    }

    /// Divides every row by its sum.
    pub fn renormalize_rows(&self) -> Result<Self> {
        let mut next = self.clone();
        for (r, row) in next.rows.iter_mut().enumerate() {
            let sum: f64 = row.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::Contract(format!("row {r} has non-positive sum {sum}")));
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Ok(next)
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.rows.iter().flatten().all(|v| *v >= 0.0) && self.row_sum_error() <= tol
    }

    /// Inverse-CDF draw from row `from`: the first `k` whose cumulative sum
    /// exceeds one uniform draw. Round-off past the last cumulative value
    /// falls back to the last state with positive mass.
    pub fn sample_next(&self, from: State, rng: &mut RngStream) -> State {
        let row = &self.rows[from.index()];
        let u = rng.uniform();
        let mut cum = 0.0;
        for (k, &p) in row.iter().enumerate() {
            cum += p;
            if u < cum {
                return State(k as u8);
            }
        }
        let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(N_STATES - 1);
        State(last as u8)
    }

    /// Independently resamples every particle's state.
    pub fn sample_states(&self, current: &[State], rng: &mut RngStream) -> Vec<State> {
        current.iter().map(|&s| self.sample_next(s, rng)).collect()
    }
}
