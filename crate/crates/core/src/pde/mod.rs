//! Finite-difference solver for the switching variational inequalities,
//! finite and infinite horizon, with region extraction and the monotone
//! drift shift.

mod obstacle;
mod regions;
mod shift;
mod solve;
mod stencil;
mod surface;

use thiserror::Error;

use crate::grid::GridError;

pub use regions::{extract_slice, extract_switching_regions, Direction, RegimeRegions, SwitchRegion, Threshold};
pub use shift::{apply_monotone_shift, monotone_clauses, validate_monotone, Clause, ShiftError};
pub use solve::{
    horizon_cross_check, solve_finite_horizon, solve_infinite_horizon, HorizonCheck, ObstacleSolver, SolverConfig,
};
pub use stencil::Boundary;
pub use surface::ValueSurface;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("problem fails solver preconditions: {0}")]
    InvalidProblem(String),
    #[error("{0}")]
    HorizonMismatch(&'static str),
    #[error("finite-horizon solve needs grid time steps")]
    MissingTimeSteps,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("Picard iteration did not converge in {iterations} iterations (residual {residual:e})")]
    PicardNotConverged { iterations: usize, residual: f64 },
    #[error("obstacle solver did not converge in {iterations} iterations")]
    InnerNotConverged { iterations: usize },
    #[error("horizon cross-check failed: {0}")]
    HorizonCheck(String),
}

impl SolverError {
    /// Whether the failure is a convergence failure, as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            SolverError::PicardNotConverged { .. }
                | SolverError::InnerNotConverged { .. }
                | SolverError::HorizonCheck(_)
        )
    }
}
