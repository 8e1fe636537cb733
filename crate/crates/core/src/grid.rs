//! One-dimensional state grids.
//!
//! Nodes are uniformly spaced in a computational coordinate `y`: either
//! `y = x` (linear) or `y = ln x` (logarithmic, for positive state processes).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DriftDiffusion, Horizon, SwitchingProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid bounds must satisfy x_min < x_max (got {0} and {1})")]
    Bounds(f64, f64),
    #[error("grid needs at least 3 points (got {0})")]
    TooFew(usize),
    #[error("logarithmic grid needs x_min > 0 (got {0})")]
    LogDomain(f64),
    #[error("time steps must be positive")]
    TimeSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub scale: GridScale,
    /// Backward time steps for finite-horizon solves.
    pub nt: Option<usize>,
}

impl Grid1D {
    pub fn linear(x_min: f64, x_max: f64, nx: usize) -> Result<Self, GridError> {
        Self::build(x_min, x_max, nx, GridScale::Linear)
    }

    pub fn log(x_min: f64, x_max: f64, nx: usize) -> Result<Self, GridError> {
        if !(x_min > 0.0) {
            return Err(GridError::LogDomain(x_min));
        }
        Self::build(x_min, x_max, nx, GridScale::Log)
    }

    fn build(x_min: f64, x_max: f64, nx: usize, scale: GridScale) -> Result<Self, GridError> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(GridError::Bounds(x_min, x_max));
        }
        if nx < 3 {
            return Err(GridError::TooFew(nx));
        }
        Ok(Grid1D { x_min, x_max, nx, scale, nt: None })
    }

    pub fn with_time_steps(mut self, nt: usize) -> Result<Self, GridError> {
        if nt == 0 {
            return Err(GridError::TimeSteps);
        }
        self.nt = Some(nt);
        Ok(self)
    }

    #[inline]
    pub fn to_coord(&self, x: f64) -> f64 {
        match self.scale {
            GridScale::Linear => x,
            GridScale::Log => x.ln(),
        }
    }

    #[inline]
    pub fn from_coord(&self, y: f64) -> f64 {
        match self.scale {
            GridScale::Linear => y,
            GridScale::Log => y.exp(),
        }
    }

    pub fn y_min(&self) -> f64 {
        self.to_coord(self.x_min)
    }

    pub fn y_max(&self) -> f64 {
        self.to_coord(self.x_max)
    }

    /// Spacing in the computational coordinate.
    pub fn spacing(&self) -> f64 {
        (self.y_max() - self.y_min()) / (self.nx - 1) as f64
    }

    pub fn coord(&self, k: usize) -> f64 {
        if k == self.nx - 1 {
            return self.y_max();
        }
        self.y_min() + k as f64 * self.spacing()
    }

    pub fn point(&self, k: usize) -> f64 {
        if k == 0 {
            return self.x_min;
        }
        if k == self.nx - 1 {
            return self.x_max;
        }
        self.from_coord(self.coord(k))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|k| self.point(k)).collect()
    }

    /// Cell index `k` and weight `w` with `x` between nodes `k` and `k + 1`
    /// (clamped to the domain).
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let y = if self.scale == GridScale::Log && x <= 0.0 { f64::NEG_INFINITY } else { self.to_coord(x) };
        let s = (y - self.y_min()) / self.spacing();
        if !(s > 0.0) {
            return (0, 0.0);
        }
        let last = (self.nx - 2) as f64;
        if s >= last + 1.0 {
            return (self.nx - 2, 1.0);
        }
        let k = s.floor().min(last);
        (k as usize, s - k)
    }

    pub fn nearest(&self, x: f64) -> usize {
        let (k, w) = self.locate(x);
        if w >= 0.5 {
            k + 1
        } else {
            k
        }
    }

    /// Linear interpolation (in the computational coordinate) of nodal values.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let (k, w) = self.locate(x);
        values[k] * (1.0 - w) + values[k + 1] * w
    }

    /// Geometric or arithmetic midpoint of two nodes, per the grid scale.
    pub fn midpoint(&self, k0: usize, k1: usize) -> f64 {
        self.from_coord(0.5 * (self.coord(k0) + self.coord(k1)))
    }

    /// A uniform linear grid on the same bounds, used by validators.
    pub fn sample_points(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let (lo, hi) = (self.y_min(), self.y_max());
        (0..n).map(|k| self.from_coord(lo + (hi - lo) * k as f64 / (n - 1) as f64)).collect()
    }
}

/// Time span used to size default domains: the horizon, or four discount
/// half-lives (clamped to `[1, 400]`) for infinite horizons.
fn sizing_span(problem: &SwitchingProblem) -> f64 {
    match problem.horizon() {
        Horizon::Finite { t } => t,
        Horizon::Infinite => {
            let rho = problem.discount();
            if rho > 0.0 {
                (4.0 / rho).clamp(1.0, 400.0)
            } else {
                400.0
            }
        }
    }
}

/// Default grid with `nx` nodes around `x0`.
///
/// Mean-reverting dynamics use a linear grid over six stationary standard
/// deviations around the means. Positive-state dynamics use a log grid over
/// `x0 e^{±6σ√T}`. Other dynamics use a linear grid over `x0 ± 6 s(x0) √T`.
/// Finite horizons get `ceil(T / 0.01)` time steps.
pub fn default_grid(problem: &SwitchingProblem, x0: f64, nx: usize) -> Result<Grid1D, GridError> {
    let span = sizing_span(problem);
    let dyn_ = problem.dynamics();
    let grid = if dyn_.iter().all(|d| matches!(d, DriftDiffusion::Ou { .. })) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for d in dyn_ {
            if let DriftDiffusion::Ou { a, mean, sigma } = *d {
                let sd = sigma / (2.0 * a).sqrt();
                lo = lo.min(mean - 6.0 * sd);
                hi = hi.max(mean + 6.0 * sd);
            }
        }
        Grid1D::linear(lo, hi, nx)?
    } else if problem.positive_state() {
        let x0 = if x0 > 0.0 { x0 } else { 1.0 };
        let s = (0..problem.regime_count()).map(|i| problem.diffusion(i, x0) / x0).fold(0.0, f64::max);
        let w = (6.0 * s * span.sqrt()).max(1.0);
        Grid1D::log(x0 * (-w).exp(), x0 * w.exp(), nx)?
    } else {
        let s = (0..problem.regime_count()).map(|i| problem.diffusion(i, x0).abs()).fold(0.0, f64::max);
        let w = (6.0 * s * span.sqrt()).max(1.0);
        Grid1D::linear(x0 - w, x0 + w, nx)?
    };
    match problem.horizon() {
        Horizon::Finite { t } => grid.with_time_steps(((t / 0.01).ceil() as usize).max(1)),
        Horizon::Infinite => Ok(grid),
    }
}
