//! Grid and solver flags shared by `solve`, `sweep` and `simulate`.

use ambiswitch_core::pde::{
    solve_finite_horizon, solve_infinite_horizon, Boundary, ObstacleSolver, SolverConfig, ValueSurface,
};
use ambiswitch_core::{default_grid, DriftDiffusion, Grid1D, Horizon, SwitchingProblem};
use clap::{Args, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnerSolver {
    Policy,
    Psor,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Lower end of the state grid (needs --x-max).
    #[arg(long, requires = "x_max")]
    pub x_min: Option<f64>,
    /// Upper end of the state grid (needs --x-min).
    #[arg(long, requires = "x_min")]
    pub x_max: Option<f64>,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 801)]
    pub nx: usize,
    /// Grid spacing; defaults to log for positive dynamics, linear otherwise.
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
    /// Time steps for finite horizons; defaults to ceil(T / 0.01).
    #[arg(long)]
    pub nt: Option<usize>,
    /// Picard tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_picard: f64,
    #[arg(long, default_value_t = 200)]
    pub max_picard: usize,
    /// Obstacle solver for each Picard step.
    #[arg(long, value_enum, default_value_t = InnerSolver::Policy)]
    pub inner: InnerSolver,
}

/// Reference state: the given one, else the first OU mean, else 1 for
/// positive dynamics, else 0.
pub fn reference_x0(problem: &SwitchingProblem, x0: Option<f64>) -> f64 {
    if let Some(x) = x0 {
        return x;
    }
    match problem.dynamics()[0] {
        DriftDiffusion::Ou { mean, .. } => mean,
        _ if problem.positive_state() => 1.0,
        _ => 0.0,
    }
}

impl GridArgs {
    pub fn grid(&self, problem: &SwitchingProblem, x0: f64) -> Result<Grid1D, CliError> {
        let mut grid = match (self.x_min, self.x_max) {
            (Some(lo), Some(hi)) => {
                let scale =
                    self.scale.unwrap_or(if problem.positive_state() && lo > 0.0 { Scale::Log } else { Scale::Linear });
                match scale {
                    Scale::Log => Grid1D::log(lo, hi, self.nx)?,
                    Scale::Linear => Grid1D::linear(lo, hi, self.nx)?,
                }
            }
            _ => {
                let g = default_grid(problem, x0, self.nx)?;
                match self.scale {
                    Some(Scale::Linear) if g.scale != ambiswitch_core::GridScale::Linear => {
                        Grid1D::linear(g.x_min.max(0.0), g.x_max, self.nx)?
                    }
                    Some(Scale::Log) if g.scale != ambiswitch_core::GridScale::Log => {
                        Grid1D::log(g.x_min.max(1e-8), g.x_max, self.nx)?
                    }
                    _ => g,
                }
            }
        };
        if let Horizon::Finite { t } = problem.horizon() {
            let nt = self.nt.unwrap_or_else(|| ((t / 0.01).ceil() as usize).max(1));
            grid = grid.with_time_steps(nt)?;
        }
        Ok(grid)
    }

    /// Solver settings; log grids get the reward-growth upper boundary row.
    pub fn solver(&self, grid: &Grid1D) -> SolverConfig {
        SolverConfig {
            tol_picard: self.tol_picard,
            max_picard: self.max_picard,
            solver: match self.inner {
                InnerSolver::Policy => ObstacleSolver::Policy,
                InnerSolver::Psor => ObstacleSolver::Psor,
            },
            upper_boundary: if grid.scale == ambiswitch_core::GridScale::Log {
                Boundary::RewardGrowth
            } else {
                Boundary::Natural
            },
            ..SolverConfig::default()
        }
    }

    pub fn solve(&self, problem: &SwitchingProblem, x0: f64) -> Result<ValueSurface, CliError> {
        let grid = self.grid(problem, x0)?;
        let config = self.solver(&grid);
        Ok(match problem.horizon() {
            Horizon::Infinite => solve_infinite_horizon(problem, &grid, &config)?,
            Horizon::Finite { .. } => solve_finite_horizon(problem, &grid, &config)?,
        })
    }
}
