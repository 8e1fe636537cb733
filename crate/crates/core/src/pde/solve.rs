//! Picard obstacle iteration for the coupled switching system.
//!
//! Iterate `n` solves, regime by regime, a single obstacle problem whose
//! obstacle `max_{j≠i} v^{n-1}(·, j) - c_{i,j}` is frozen from the previous
//! iterate. The starting iterate solves each regime with no obstacle, so the
//! sequence increases to the minimal solution.

use serde::{Deserialize, Serialize};

use super::obstacle::{self, Method, Workspace};
use super::stencil::{assemble, Boundary, RegimeOperator};
use super::surface::ValueSurface;
use super::SolverError;
use crate::grid::Grid1D;
use crate::model::{Horizon, SwitchingProblem};
use crate::validate::solver_preconditions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleSolver {
    /// Policy iteration with exact tridiagonal solves.
    Policy,
    /// Projected successive over-relaxation.
    Psor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_picard: f64,
    pub tol_psor: f64,
    pub max_picard: usize,
    pub max_psor: usize,
    pub omega: f64,
    pub solver: ObstacleSolver,
    /// Keep the time-zero slice of every Picard iterate.
    pub record_iterates: bool,
    #[serde(default)]
    pub lower_boundary: Boundary,
    #[serde(default)]
    pub upper_boundary: Boundary,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_picard: 1e-8,
            tol_psor: 1e-10,
            max_picard: 200,
            max_psor: 200_000,
            omega: 1.5,
            solver: ObstacleSolver::Policy,
            record_iterates: false,
            lower_boundary: Boundary::Natural,
            upper_boundary: Boundary::Natural,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<(), SolverError> {
        if !(self.tol_picard > 0.0 && self.tol_psor > 0.0) {
            return Err(SolverError::Config("tolerances must be positive".into()));
        }
        if !(1.0..2.0).contains(&self.omega) {
            return Err(SolverError::Config("omega must lie in [1, 2)".into()));
        }
        if self.max_picard == 0 || self.max_psor == 0 {
            return Err(SolverError::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }

    fn settings(&self) -> obstacle::Settings {
        obstacle::Settings {
            method: match self.solver {
                ObstacleSolver::Policy => Method::Policy,
                ObstacleSolver::Psor => Method::Psor,
            },
            omega: self.omega,
            tol_psor: self.tol_psor,
            max_psor: self.max_psor,
        }
    }
}

fn check_preconditions(problem: &SwitchingProblem, grid: &Grid1D) -> Result<(), SolverError> {
    let report = solver_preconditions(problem, &grid.points());
    let failures: Vec<String> = report.hard_failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(SolverError::InvalidProblem(failures.join("; ")))
    }
}

/// Obstacle of regime `i` from `v` at every node, with the attaining target.
fn obstacle_of(
    problem: &SwitchingProblem,
    xs: &[f64],
    v: &[Vec<f64>],
    i: usize,
    obs: &mut [f64],
    target: &mut [usize],
) {
    let n = problem.regime_count();
    for (k, &x) in xs.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut arg = i;
        for j in (0..n).filter(|&j| j != i) {
            let cand = v[j][k] - problem.cost(i, j, x);
            if cand > best {
                best = cand;
                arg = j;
            }
        }
        obs[k] = best;
        target[k] = arg;
    }
}

fn relative_change(new: &[Vec<f64>], old: &[Vec<f64>]) -> f64 {
    let mut r: f64 = 0.0;
    for (a, b) in new.iter().zip(old) {
        for (x, y) in a.iter().zip(b) {
            r = r.max((x - y).abs() / (1.0 + x.abs()));
        }
    }
    r
}

/// Stationary system `min{ρu - L^i u - ψ + ς, u - max_j(u_j - c_{i,j})} = 0`.
pub fn solve_infinite_horizon(
    problem: &SwitchingProblem,
    grid: &Grid1D,
    config: &SolverConfig,
) -> Result<ValueSurface, SolverError> {
    config.check()?;
    if !matches!(problem.horizon(), Horizon::Infinite) {
        return Err(SolverError::HorizonMismatch("solve_infinite_horizon needs an infinite horizon"));
    }
    check_preconditions(problem, grid)?;
    let n = problem.regime_count();
    let nx = grid.nx;
    let xs = grid.points();
    let ops: Vec<RegimeOperator> =
        (0..n).map(|i| assemble(problem, grid, i, [config.lower_boundary, config.upper_boundary])).collect();
    let settings = config.settings();
    let mut ws = Workspace::new(nx);

    let mut v = vec![vec![0.0; nx]; n];
    for i in 0..n {
        let p = obstacle::Problem { op: &ops[i], extra_diag: 0.0, extra_rhs: None, obstacle: None };
        obstacle::solve(&p, &settings, &mut v[i], &mut ws)?;
    }
    let mut iterates = Vec::new();
    if config.record_iterates {
        iterates.push(v.clone());
    }
    let mut obs = vec![0.0; nx];
    let mut mask = vec![vec![false; nx]; n];
    let mut target = vec![vec![0usize; nx]; n];
    let mut residual = f64::INFINITY;
    for iter in 1..=config.max_picard {
        let mut next = v.clone();
        for i in 0..n {
            if n > 1 {
                obstacle_of(problem, &xs, &v, i, &mut obs, &mut target[i]);
            } else {
                target[i].fill(0);
            }
            let p = obstacle::Problem {
                op: &ops[i],
                extra_diag: 0.0,
                extra_rhs: None,
                obstacle: (n > 1).then_some(&obs[..]),
            };
            obstacle::solve(&p, &settings, &mut next[i], &mut ws)?;
            mask[i].copy_from_slice(&ws.active);
            if n == 1 {
                mask[i].fill(false);
            }
        }
        residual = relative_change(&next, &v);
        v = next;
        if config.record_iterates {
            iterates.push(v.clone());
        }
        if residual <= config.tol_picard {
            for i in 0..n {
                for k in 0..nx {
                    if !mask[i][k] {
                        target[i][k] = i;
                    }
                }
            }
            return Ok(ValueSurface {
                grid: grid.clone(),
                stationary: true,
                times: vec![0.0],
                values: vec![v],
                switch_mask: vec![mask],
                switch_target: vec![target],
                picard_iterations: iter,
                residual,
                iterates,
            });
        }
    }
    Err(SolverError::PicardNotConverged { iterations: config.max_picard, residual })
}

/// Backward implicit-Euler march of the finite-horizon system from `u(T) = g`.
pub fn solve_finite_horizon(
    problem: &SwitchingProblem,
    grid: &Grid1D,
    config: &SolverConfig,
) -> Result<ValueSurface, SolverError> {
    config.check()?;
    let horizon = match problem.horizon() {
        Horizon::Finite { t } => t,
        Horizon::Infinite => return Err(SolverError::HorizonMismatch("solve_finite_horizon needs a finite horizon")),
    };
    let nt = grid.nt.ok_or(SolverError::MissingTimeSteps)?;
    check_preconditions(problem, grid)?;
    let n = problem.regime_count();
    let nx = grid.nx;
    let xs = grid.points();
    let dt = horizon / nt as f64;
    let times: Vec<f64> = (0..=nt).map(|m| if m == nt { horizon } else { m as f64 * dt }).collect();
    let ops: Vec<RegimeOperator> =
        (0..n).map(|i| assemble(problem, grid, i, [config.lower_boundary, config.upper_boundary])).collect();
    let settings = config.settings();
    let mut ws = Workspace::new(nx);
    let inv_dt = 1.0 / dt;

    let terminal: Vec<Vec<f64>> = (0..n).map(|i| xs.iter().map(|&x| problem.terminal_value(i, x)).collect()).collect();

    // values[m][i][k]
    let mut v: Vec<Vec<Vec<f64>>> = vec![terminal.clone(); nt + 1];
    let mut rhs = vec![0.0; nx];
    for i in 0..n {
        let mut u = terminal[i].clone();
        for m in (0..nt).rev() {
            for k in 0..nx {
                rhs[k] = u[k] * inv_dt;
            }
            let p = obstacle::Problem { op: &ops[i], extra_diag: inv_dt, extra_rhs: Some(&rhs), obstacle: None };
            obstacle::solve(&p, &settings, &mut u, &mut ws)?;
            v[m][i].copy_from_slice(&u);
        }
    }
    let mut iterates = Vec::new();
    if config.record_iterates {
        iterates.push(v[0].clone());
    }

    let mut mask = vec![vec![vec![false; nx]; n]; nt + 1];
    let mut target = vec![vec![vec![0usize; nx]; n]; nt + 1];
    // terminal slice: binding where g already meets its obstacle
    let mut obs = vec![0.0; nx];
    for i in 0..n {
        if n > 1 {
            obstacle_of(problem, &xs, &terminal, i, &mut obs, &mut target[nt][i]);
            for k in 0..nx {
                let gap = terminal[i][k] - obs[k];
                mask[nt][i][k] = gap <= 1e-12 * (1.0 + terminal[i][k].abs());
            }
        }
    }

    let mut residual = f64::INFINITY;
    for iter in 1..=config.max_picard {
        let mut next = v.clone();
        for i in 0..n {
            let mut u = terminal[i].clone();
            for m in (0..nt).rev() {
                for k in 0..nx {
                    rhs[k] = u[k] * inv_dt;
                }
                if n > 1 {
                    obstacle_of(problem, &xs, &v[m], i, &mut obs, &mut target[m][i]);
                }
                let p = obstacle::Problem {
                    op: &ops[i],
                    extra_diag: inv_dt,
                    extra_rhs: Some(&rhs),
                    obstacle: (n > 1).then_some(&obs[..]),
                };
                obstacle::solve(&p, &settings, &mut u, &mut ws)?;
                next[m][i].copy_from_slice(&u);
                if n > 1 {
                    mask[m][i].copy_from_slice(&ws.active);
                }
            }
        }
        residual = next.iter().zip(&v).map(|(a, b)| relative_change(a, b)).fold(0.0, f64::max);
        v = next;
        if config.record_iterates {
            iterates.push(v[0].clone());
        }
        if residual <= config.tol_picard {
            for m in 0..=nt {
                for i in 0..n {
                    for k in 0..nx {
                        if !mask[m][i][k] {
                            target[m][i][k] = i;
                        }
                    }
                }
            }
            return Ok(ValueSurface {
                grid: grid.clone(),
                stationary: false,
                times,
                values: v,
                switch_mask: mask,
                switch_target: target,
                picard_iterations: iter,
                residual,
                iterates,
            });
        }
    }
    Err(SolverError::PicardNotConverged { iterations: config.max_picard, residual })
}

/// Result of comparing finite-horizon solves with the stationary solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonCheck {
    pub horizons: Vec<f64>,
    /// `v^T(0, ·, ·)` for each horizon.
    pub finite_values: Vec<Vec<Vec<f64>>>,
    pub stationary: ValueSurface,
    /// `max (v^∞ - v^T)` per horizon, scaled by `1 + |v^∞|`.
    pub gaps: Vec<f64>,
    /// Largest violation of `v^{T_k} ≤ v^{T_{k+1}}`, scaled.
    pub monotone_violation: f64,
}

/// Solves the stationary system and the finite horizons `horizons` (all with
/// the temporary terminal and the same time step `dt`), then checks that the
/// finite-horizon values increase in `T` towards the stationary solution.
pub fn horizon_cross_check(
    problem: &SwitchingProblem,
    grid: &Grid1D,
    config: &SolverConfig,
    horizons: &[f64],
    dt: f64,
    tol: f64,
) -> Result<HorizonCheck, SolverError> {
    if horizons.windows(2).any(|w| w[1] <= w[0]) || horizons.is_empty() {
        return Err(SolverError::Config("horizons must be increasing and nonempty".into()));
    }
    let stationary = solve_infinite_horizon(problem, grid, config)?;
    let mut finite_values = Vec::new();
    for &t in horizons {
        let nt = ((t / dt).round() as usize).max(1);
        let g = grid.clone().with_time_steps(nt)?;
        let p = problem.with_horizon(Horizon::Finite { t }).map_err(|e| SolverError::InvalidProblem(e.to_string()))?;
        let s = solve_finite_horizon(&p, &g, config)?;
        finite_values.push(s.values[0].clone());
    }
    let vinf = &stationary.values[0];
    let gaps: Vec<f64> = finite_values
        .iter()
        .map(|vt| {
            let mut g = f64::NEG_INFINITY;
            for (a, b) in vinf.iter().zip(vt) {
                for (x, y) in a.iter().zip(b) {
                    g = g.max((x - y) / (1.0 + x.abs()));
                }
            }
            g
        })
        .collect();
    let mut monotone_violation: f64 = 0.0;
    for w in finite_values.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            for (x, y) in a.iter().zip(b) {
                monotone_violation = monotone_violation.max((x - y) / (1.0 + y.abs()));
            }
        }
    }
    let below = gaps.iter().all(|&g| g >= -tol);
    let shrinking = gaps.windows(2).all(|w| w[1] <= w[0] + tol);
    if monotone_violation > tol || !below || !shrinking {
        return Err(SolverError::HorizonCheck(format!("monotone violation {monotone_violation:e}, gaps {gaps:?}")));
    }
    Ok(HorizonCheck { horizons: horizons.to_vec(), finite_values, stationary, gaps, monotone_violation })
}
