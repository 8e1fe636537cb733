//! Monte Carlo estimation of the objective of a given switching strategy
//! under a given prior.
//!
//! Paths follow `dX = (b - σθ) dt + σ dW` in the current regime. Switches
//! are checked on the grid of time steps and resolved instantly, possibly
//! through several regimes at one instant. Each path draws from its own
//! generator seeded from `(seed, path index)`, so estimates are
//! reproducible regardless of how paths are spread over threads.

mod engine;
mod strategy;

use thiserror::Error;

pub use engine::{
    cost_bound_diagnostic, estimate_objective, moment_growth_rate, path_seed, record_paths, simulate_path,
    truncation_bound, write_paths_csv, CostDiagnostic, PathRecord, SimConfig, SimulationReport, Terminal,
};
pub use strategy::{PriorPolicy, Strategy, SurfaceStrategy, SwitchRule, ThresholdStrategy, Trigger};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation settings: {0}")]
    Config(String),
    #[error("infinite horizon needs t_max")]
    MissingTmax,
    #[error("invalid strategy: {0}")]
    Strategy(String),
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("strategy switches in a zero-time cycle at x = {x} starting from regime {regime}")]
    ZeroTimeCycle { x: f64, regime: usize },
}
