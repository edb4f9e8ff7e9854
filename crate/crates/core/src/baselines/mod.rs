//! Reference optimizers run under the same budget and record contract as
//! [`crate::fcpo`]: particle swarm, SHADE, L-SHADE and CMA-ES.

mod cmaes;
mod de;
mod pso;

pub use cmaes::{
    cmaes_run, cmaes_run_observed, CmaesConfig, CmaesGeneration, CmaesParams, CMAES_ID,
};
pub use de::{
    de_run_observed, lshade_run, shade_run, DeGeneration, ShadeConfig, LSHADE_ID, SHADE_ID,
};
pub use pso::{pso_run, PsoConfig, PSO_ID};

use crate::budget::Budget;
use crate::error::Result;
use crate::problem::Objective;
use crate::record::RunRecord;
use crate::rng::RngStream;

/// Any baseline with its configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineConfig {
    Pso(PsoConfig),
    Shade(ShadeConfig),
    Cmaes(CmaesConfig),
}

impl BaselineConfig {
    /// Default configuration for an algorithm id (`pso`, `shade`, `lshade`,
    /// `cmaes`) on a `dim`-dimensional problem.
    pub fn for_id(id: &str, dim: usize) -> Option<Self> {
        match id {
            PSO_ID => Some(Self::Pso(PsoConfig::default())),
            SHADE_ID => Some(Self::Shade(ShadeConfig::shade(dim))),
            LSHADE_ID => Some(Self::Shade(ShadeConfig::lshade(dim))),
            CMAES_ID => Some(Self::Cmaes(CmaesConfig::default())),
            _ => None,
        }
    }

    pub fn algorithm_id(&self) -> &'static str {
        match self {
            Self::Pso(_) => PSO_ID,
            Self::Shade(c) => c.algorithm_id(),
            Self::Cmaes(_) => CMAES_ID,
        }
    }

    pub fn run(
        &self,
        objective: &dyn Objective,
        budget: Budget,
        rng: &mut RngStream,
    ) -> Result<RunRecord> {
        match self {
            Self::Pso(c) => pso_run(objective, c, budget, rng),
            Self::Shade(c) => shade_run(objective, c, budget, rng),
            Self::Cmaes(c) => cmaes_run(objective, c, budget, rng),
        }
    }
}
