pub mod baselines;
pub mod benchmarks;
pub mod budget;
pub mod error;
pub mod fcpo;
pub mod linalg;
pub mod markov;
pub mod problem;
pub mod record;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod twin;

pub use budget::{Budget, Evaluator};
pub use error::{Error, Result};
pub use problem::{clip_to_bounds, Bounds, Counting, FnObjective, Objective};
pub use record::{RunRecord, TracePoint};
pub use rng::{derive_run_seed, RngStream};
