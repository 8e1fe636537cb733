//! Command errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Problem or argument fails validation.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Schema(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Io(_) | CliError::Schema(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ambiswitch_core::pde::SolverError> for CliError {
    fn from(e: ambiswitch_core::pde::SolverError) -> Self {
        if e.is_convergence() {
            CliError::NonConvergence(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<ambiswitch_core::model::ModelError> for CliError {
    fn from(e: ambiswitch_core::model::ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ambiswitch_core::grid::GridError> for CliError {
    fn from(e: ambiswitch_core::grid::GridError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ambiswitch_core::sim::SimError> for CliError {
    fn from(e: ambiswitch_core::sim::SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ambiswitch_core::closed_form::SmoothFitError> for CliError {
    fn from(e: ambiswitch_core::closed_form::SmoothFitError) -> Self {
        match e {
            ambiswitch_core::closed_form::SmoothFitError::NoRoot { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ambiswitch_core::closed_form::FundError> for CliError {
    fn from(e: ambiswitch_core::closed_form::FundError) -> Self {
        match e {
            ambiswitch_core::closed_form::FundError::Solver(s) => s.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}
