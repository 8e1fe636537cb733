//! Monotone three-point discretisation of `ρu - L^i u - ψ + κ_i|φ + σ u_x|`.
//!
//! The ambiguity term is written as `max_{θ=±κ} [θ(φ + σ u_x)]`, so each
//! regime carries one linear branch per extreme prior. A branch row reads
//!
//! ```text
//! diag_k u_k - lower_k u_{k-1} - upper_k u_{k+1} = rhs_k
//! ```
//!
//! with `lower, upper ≥ 0` and `diag = ρ + lower + upper`. The drift
//! `μ - sθ` uses central differences where that keeps the coefficients
//! nonnegative and upwinding elsewhere. End rows follow [`Boundary`].

use serde::{Deserialize, Serialize};

use crate::grid::{Grid1D, GridScale};
use crate::model::SwitchingProblem;

/// Row used at an end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Drop the second derivative and keep only inward-pointing drift.
    #[default]
    Natural,
    /// Treat the solution as locally proportional to `ψ`, so that
    /// `L u ≈ (Lψ/ψ) u` and the row becomes `(ρ - Lψ/ψ) u = ψ - θφ`. Exact
    /// for the stay-forever value when `ψ` is an eigenfunction of `L`, such
    /// as a power reward under GBM. A prior whose effective rate is not
    /// positive reuses the row of the prior with the largest rate; falls back
    /// to [`Boundary::Natural`] where `ψ` vanishes or no rate is positive.
    RewardGrowth,
}

#[derive(Debug, Clone)]
pub(crate) struct Branch {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Branch {
    /// Row residual at node `k`, including optional time-step terms.
    #[inline]
    pub fn residual(&self, k: usize, u: &[f64], extra_diag: f64, extra_rhs: Option<&[f64]>) -> f64 {
        let mut r = (self.diag[k] + extra_diag) * u[k] - self.rhs[k];
        if let Some(e) = extra_rhs {
            r -= e[k];
        }
        if k > 0 {
            r -= self.lower[k] * u[k - 1];
        }
        if k + 1 < u.len() {
            r -= self.upper[k] * u[k + 1];
        }
        r
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RegimeOperator {
    pub branches: Vec<Branch>,
}

/// Effective drift and diffusion in the grid coordinate at `x`.
pub(crate) fn coordinate_coefficients(problem: &SwitchingProblem, grid: &Grid1D, i: usize, x: f64) -> (f64, f64) {
    let b = problem.drift(i, x);
    let s = problem.diffusion(i, x);
    match grid.scale {
        GridScale::Linear => (b, s),
        GridScale::Log => (b / x - 0.5 * s * s / (x * x), s / x),
    }
}

/// Effective rate `ρ - Lψ/ψ` at `x` under prior `θ`, when positive.
fn growth_rate(problem: &SwitchingProblem, i: usize, x: f64, theta: f64) -> Option<f64> {
    let psi = problem.reward().psi[i];
    let v = psi.value(x);
    if v.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let (d1, d2) = psi.derivatives(x);
    let s = problem.diffusion(i, x);
    let lpsi = (problem.drift(i, x) - s * theta) * d1 + 0.5 * s * s * d2;
    let rate = problem.discount() - lpsi / v;
    (rate > 0.0 && rate.is_finite()).then_some(rate)
}

pub(crate) fn assemble(problem: &SwitchingProblem, grid: &Grid1D, i: usize, ends: [Boundary; 2]) -> RegimeOperator {
    let n = grid.nx;
    let h = grid.spacing();
    let rho = problem.discount();
    let kappa = problem.kappa(i);
    let thetas: Vec<f64> = if kappa > 0.0 { vec![kappa, -kappa] } else { vec![0.0] };
    let xs = grid.points();
    // a branch whose effective rate is not positive can never attain the max
    // over θ at an end row, so it borrows the row of the fastest branch
    let best_rate = |k: usize| {
        thetas
            .iter()
            .filter_map(|&th| growth_rate(problem, i, xs[k], th).map(|r| (r, th)))
            .max_by(|a, b| a.0.total_cmp(&b.0))
    };
    let fallback = [best_rate(0), best_rate(n - 1)];
    let branches = thetas
        .iter()
        .copied()
        .map(|theta| {
            let mut lower = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for k in 0..n {
                let x = xs[k];
                let (mu, s) = coordinate_coefficients(problem, grid, i, x);
                let drift = mu - s * theta;
                let (lo, up) = if k == 0 {
                    (0.0, drift.max(0.0) / h)
                } else if k == n - 1 {
                    (0.0, (-drift).max(0.0) / h)
                } else {
                    let d = 0.5 * s * s / (h * h);
                    if drift.abs() * h <= s * s {
                        (d - 0.5 * drift / h, d + 0.5 * drift / h)
                    } else if drift > 0.0 {
                        (d, d + drift / h)
                    } else {
                        (d - drift / h, d)
                    }
                };
                // at the top end the inward neighbour is k - 1
                if k == n - 1 {
                    lower[k] = up;
                    upper[k] = 0.0;
                } else {
                    lower[k] = lo;
                    upper[k] = up;
                }
                diag[k] = rho + lower[k] + upper[k];
                rhs[k] = problem.psi(i, x) - theta * problem.phi(i, x);
                let end = if k == 0 {
                    Some(ends[0])
                } else if k == n - 1 {
                    Some(ends[1])
                } else {
                    None
                };
                if end == Some(Boundary::RewardGrowth) {
                    let own = growth_rate(problem, i, x, theta).map(|r| (r, theta));
                    if let Some((rate, th)) = own.or(fallback[usize::from(k != 0)]) {
                        lower[k] = 0.0;
                        upper[k] = 0.0;
                        diag[k] = rate;
                        rhs[k] = problem.psi(i, x) - th * problem.phi(i, x);
                    }
                }
            }
            Branch { lower, diag, upper, rhs }
        })
        .collect();
    RegimeOperator { branches }
}
