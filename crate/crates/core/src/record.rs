use serde::{Deserialize, Serialize};

/// One best-so-far improvement event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nfe: u64,
    pub best: f64,
}

/// Outcome of one optimizer run on one objective.
///
/// `trace` holds an entry for every strict improvement of the best value, so
/// it is strictly increasing in `nfe`, non-increasing in `best`, and its last
/// `best` equals `final_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function_id: String,
    pub dimension: usize,
    pub algorithm_id: String,
    pub seed: u64,
    pub final_value: f64,
    pub nfe: u64,
    pub runtime_ms: f64,
    pub trace: Vec<TracePoint>,
    pub best_position: Vec<f64>,
}

impl RunRecord {
    /// Best-so-far value after `nfe` evaluations (`+inf` before the first).
    pub fn best_at(&self, nfe: u64) -> f64 {
        match self.trace.partition_point(|p| p.nfe <= nfe) {
            0 => f64::INFINITY,
            k => self.trace[k - 1].best,
        }
    }

    /// Checks the trace invariants.
    pub fn trace_is_consistent(&self) -> bool {
        let ordered = self
            .trace
            .windows(2)
            .all(|w| w[0].nfe < w[1].nfe && w[1].best <= w[0].best);
        let last_matches = self
            .trace
            .last()
            .map_or(self.nfe == 0, |p| p.best == self.final_value && p.nfe <= self.nfe);
        ordered && last_matches
    }

    /// Equality of everything except the wall-clock runtime.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let mut a = self.clone();
        a.runtime_ms = other.runtime_ms;
        a == *other
    }
}
