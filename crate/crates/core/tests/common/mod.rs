//! Shared instances and independent oracles for the integration suites.
#![allow(dead_code)]

use ambiswitch_core::pde::{solve_finite_horizon, solve_infinite_horizon, SolverConfig, ValueSurface};
use ambiswitch_core::{
    AmbiguitySpec, CostSpec, DriftDiffusion, Grid1D, Horizon, Phi, Psi, RewardSpec, SwitchingProblem, TerminalSpec,
};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

pub const BUYLOW_K: f64 = 0.01;

/// Buy-low sell-high in log price: regime 0 flat, regime 1 long.
pub fn buylow_problem(kappa: f64) -> SwitchingProblem {
    SwitchingProblem::new(
        vec![DriftDiffusion::Ou { a: 0.8, mean: 2.0, sigma: 0.5 }; 2],
        RewardSpec { psi: vec![Psi::Zero; 2], phi: vec![Phi::Zero; 2] },
        AmbiguitySpec { kappa: vec![kappa; 2] },
        CostSpec::Slippage { k: BUYLOW_K },
        0.5,
        Horizon::Infinite,
        TerminalSpec::Buylow { k: BUYLOW_K, c: 10.0 },
    )
    .unwrap()
}

/// 801 nodes over the mean plus or minus six stationary deviations.
pub fn buylow_grid() -> Grid1D {
    let sd = 0.5 / (1.6f64).sqrt();
    Grid1D::linear(2.0 - 6.0 * sd, 2.0 + 6.0 * sd, 801).unwrap()
}

/// One regime paying `ψ ≡ c` forever.
pub fn annuity(c: f64, rho: f64, horizon: Horizon) -> SwitchingProblem {
    SwitchingProblem::new(
        vec![DriftDiffusion::Ou { a: 1.0, mean: 0.0, sigma: 0.4 }],
        RewardSpec { psi: vec![Psi::Affine { c0: c, c1: 0.0 }], phi: vec![Phi::Zero] },
        AmbiguitySpec { kappa: vec![0.0] },
        CostSpec::Constant { matrix: vec![vec![0.0]] },
        rho,
        horizon,
        TerminalSpec::Zero,
    )
    .unwrap()
}

/// Zero reward, zero terminal, positive costs.
pub fn zero_reward(regimes: usize, horizon: Horizon) -> SwitchingProblem {
    let matrix = (0..regimes)
        .map(|i| (0..regimes).map(|j| if i == j { 0.0 } else { 0.5 + (i + 2 * j) as f64 * 0.1 }).collect())
        .collect();
    SwitchingProblem::new(
        (0..regimes)
            .map(|i| DriftDiffusion::Ou { a: 0.5 + 0.2 * i as f64, mean: 0.3 * i as f64, sigma: 0.6 })
            .collect(),
        RewardSpec { psi: vec![Psi::Zero; regimes], phi: vec![Phi::Zero; regimes] },
        AmbiguitySpec { kappa: vec![0.2; regimes] },
        CostSpec::Constant { matrix },
        0.4,
        horizon,
        TerminalSpec::Zero,
    )
    .unwrap()
}

/// Random small mean-reverting problem with positive constant costs and a
/// reward that stays nonnegative net of the ambiguity premium on `[-3, 3]`.
pub fn random_problem(seed: u64, horizon: Horizon) -> SwitchingProblem {
    let mut rng = SmallRng::seed_from_u64(seed);
    let n = rng.random_range(2..=3);
    let mut dynamics = Vec::new();
    let mut psi = Vec::new();
    let mut phi = Vec::new();
    let mut kappa = Vec::new();
    for _ in 0..n {
        dynamics.push(DriftDiffusion::Ou {
            a: rng.random_range(0.3..1.5),
            mean: rng.random_range(-1.0..1.0),
            sigma: rng.random_range(0.3..0.8),
        });
        let k: f64 = rng.random_range(0.0..0.5);
        let p0: f64 = if rng.random_bool(0.5) { rng.random_range(-0.5..0.5) } else { 0.0 };
        let c1: f64 = rng.random_range(-1.0..1.0);
        let c0 = 3.0 * c1.abs() + k * p0.abs() + rng.random_range(0.0..1.0);
        psi.push(Psi::Affine { c0, c1 });
        phi.push(if p0 == 0.0 { Phi::Zero } else { Phi::Affine { c0: p0, c1: 0.0 } });
        kappa.push(k);
    }
    let matrix =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(0.05..1.0) }).collect()).collect();
    SwitchingProblem::new(
        dynamics,
        RewardSpec { psi, phi },
        AmbiguitySpec { kappa },
        CostSpec::Constant { matrix },
        rng.random_range(0.2..1.0),
        horizon,
        TerminalSpec::Zero,
    )
    .unwrap()
}

pub fn small_grid() -> Grid1D {
    Grid1D::linear(-3.0, 3.0, 61).unwrap()
}

pub fn config() -> SolverConfig {
    SolverConfig { tol_picard: 1e-10, ..SolverConfig::default() }
}

pub fn solve(problem: &SwitchingProblem, grid: &Grid1D, cfg: &SolverConfig) -> ValueSurface {
    match problem.horizon() {
        Horizon::Infinite => solve_infinite_horizon(problem, grid, cfg).unwrap(),
        Horizon::Finite { .. } => solve_finite_horizon(problem, grid, cfg).unwrap(),
    }
}

fn scale(v: f64) -> f64 {
    1.0 + v.abs()
}

/// `vⁿ ≤ vⁿ⁺¹ + tol` across the recorded Picard iterates.
pub fn check_picard_monotone(surface: &ValueSurface, tol: f64) -> Result<(), String> {
    if surface.iterates.len() < 2 {
        return Err(format!("only {} iterates recorded", surface.iterates.len()));
    }
    for (n, w) in surface.iterates.windows(2).enumerate() {
        for (i, (a, b)) in w[0].iter().zip(&w[1]).enumerate() {
            for (k, (x, y)) in a.iter().zip(b).enumerate() {
                if *x > y + tol * scale(*y) {
                    return Err(format!("iterate {n} regime {i} node {k}: {x} > {y}"));
                }
            }
        }
    }
    Ok(())
}

/// `lo ≤ hi + tol` at every node of the time-zero slices.
pub fn check_dominated(lo: &ValueSurface, hi: &ValueSurface, tol: f64, what: &str) -> Result<(), String> {
    for (i, (a, b)) in lo.values[0].iter().zip(&hi.values[0]).enumerate() {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            if *x > y + tol * scale(*y) {
                return Err(format!("{what}: regime {i} node {k}: {x} > {y}"));
            }
        }
    }
    Ok(())
}

/// Values nonincreasing in `t` slice by slice.
pub fn check_time_monotone(surface: &ValueSurface, tol: f64) -> Result<(), String> {
    for (s, w) in surface.values.windows(2).enumerate() {
        for (i, (early, late)) in w[0].iter().zip(&w[1]).enumerate() {
            for (k, (x, y)) in early.iter().zip(late).enumerate() {
                if *y > x + tol * scale(*x) {
                    return Err(format!("slice {s} regime {i} node {k}: v rises from {x} to {y}"));
                }
            }
        }
    }
    Ok(())
}

/// Row residual of the stationary operator `ρu - L u - ψ + κ|φ + σu'|` at
/// node `k` of a linear grid, using the solver's documented monotone
/// three-point rows (central where coefficients stay nonnegative, upwind
/// otherwise; natural rows at the ends).
pub fn stationary_residual(problem: &SwitchingProblem, grid: &Grid1D, i: usize, u: &[f64], k: usize) -> f64 {
    let n = u.len();
    let h = grid.spacing();
    let x = grid.point(k);
    let kappa = problem.kappa(i);
    let thetas: &[f64] = if kappa > 0.0 { &[1.0, -1.0] } else { &[0.0] };
    let mut best = f64::NEG_INFINITY;
    for &sgn in thetas {
        let theta = sgn * kappa;
        let s = problem.diffusion(i, x);
        let drift = problem.drift(i, x) - s * theta;
        let mut lu = 0.0;
        if k == 0 {
            lu += drift.max(0.0) * (u[1] - u[0]) / h;
        } else if k == n - 1 {
            lu += (-drift).max(0.0) * (u[n - 2] - u[n - 1]) / h;
        } else {
            lu += 0.5 * s * s * (u[k + 1] - 2.0 * u[k] + u[k - 1]) / (h * h);
            lu += if drift.abs() * h <= s * s {
                drift * (u[k + 1] - u[k - 1]) / (2.0 * h)
            } else if drift > 0.0 {
                drift * (u[k + 1] - u[k]) / h
            } else {
                drift * (u[k] - u[k - 1]) / h
            };
        }
        let r = problem.discount() * u[k] - lu - problem.psi(i, x) + theta * problem.phi(i, x);
        best = best.max(r);
    }
    best
}

/// Obstacle dominance `v_i ≥ max_j v_j - c_ij` and complementarity
/// `min(F(v_i), v_i - obstacle) = 0` at every node of a stationary surface.
pub fn check_complementarity(problem: &SwitchingProblem, surface: &ValueSurface, tol: f64) -> Result<(), String> {
    let grid = &surface.grid;
    let v = &surface.values[0];
    let n = problem.regime_count();
    for i in 0..n {
        for k in 0..grid.nx {
            let x = grid.point(k);
            let obstacle =
                (0..n).filter(|&j| j != i).map(|j| v[j][k] - problem.cost(i, j, x)).fold(f64::NEG_INFINITY, f64::max);
            let gap = v[i][k] - obstacle;
            let f = stationary_residual(problem, grid, i, &v[i], k);
            let t = tol * scale(v[i][k]);
            if gap < -t {
                return Err(format!("regime {i} node {k}: value {} below obstacle {obstacle}", v[i][k]));
            }
            if f < -t * 100.0 {
                return Err(format!("regime {i} node {k}: operator residual {f} negative"));
            }
            if gap.min(f) > t * 100.0 {
                return Err(format!("regime {i} node {k}: neither constraint binds ({gap}, {f})"));
            }
        }
    }
    Ok(())
}

/// Minimum loop sum over every ordered sequence of distinct regimes of
/// length at least two, by direct enumeration.
pub fn brute_force_min_loop(matrix: &[Vec<f64>]) -> f64 {
    fn walk(m: &[Vec<f64>], seq: &mut Vec<usize>, best: &mut f64) {
        if seq.len() >= 2 {
            let s: f64 = (0..seq.len()).map(|l| m[seq[l]][seq[(l + 1) % seq.len()]]).sum();
            *best = best.min(s);
        }
        for next in 0..m.len() {
            if !seq.contains(&next) {
                seq.push(next);
                walk(m, seq, best);
                seq.pop();
            }
        }
    }
    let mut best = f64::INFINITY;
    walk(matrix, &mut Vec::new(), &mut best);
    best
}

/// Whether the strong triangular inequality holds at every listed point, by
/// direct evaluation for a constant cost matrix.
pub fn strong_triangular_oracle(matrix: &[Vec<f64>], grid: &[f64], q: f64, factor_of: impl Fn(f64) -> f64) -> bool {
    let n = matrix.len();
    for i in 0..n {
        if !(0..n).any(|j| j != i && matrix[i][j] < 0.0) {
            continue;
        }
        let mut c_i = f64::NEG_INFINITY;
        for j in (0..n).filter(|&j| j != i) {
            for &x in grid {
                c_i = c_i.max(-matrix[i][j] / (1.0 + x.abs().powf(q)));
            }
        }
        for &x in grid {
            let rhs_shift = c_i * factor_of(x);
            for k in (0..n).filter(|&k| k != i) {
                for j in (0..n).filter(|&j| j != i) {
                    let ckj = if k == j { 0.0 } else { matrix[k][j] };
                    if ckj > matrix[k][i] - rhs_shift {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn constant_problem(matrix: Vec<Vec<f64>>, horizon: Horizon) -> SwitchingProblem {
    let n = matrix.len();
    SwitchingProblem::new(
        vec![DriftDiffusion::Ou { a: 1.0, mean: 0.0, sigma: 0.5 }; n],
        RewardSpec { psi: vec![Psi::Zero; n], phi: vec![Phi::Zero; n] },
        AmbiguitySpec { kappa: vec![0.0; n] },
        CostSpec::Constant { matrix },
        0.5,
        horizon,
        TerminalSpec::Zero,
    )
    .unwrap()
}

/// Random integer cost matrix with zero diagonal, entries in `[-5, 10]`.
pub fn random_matrix(seed: u64, n: usize) -> Vec<Vec<f64>> {
    let mut rng = SmallRng::seed_from_u64(seed);
    (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(-5i32..=10) as f64 }).collect()).collect()
}
