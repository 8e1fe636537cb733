//! Euler–Maruyama paths under a distorted drift and the discounted objective.

use rand::rngs::SmallRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strategy::{PriorPolicy, Strategy};
use super::SimError;
use crate::model::{DriftDiffusion, Horizon, SwitchingProblem};
use crate::pde::ValueSurface;
use crate::validate::growth_constant;

/// Payoff collected at the end of the simulated window.
#[derive(Debug, Clone, Copy)]
pub enum Terminal<'a> {
    /// `g` at a finite horizon, nothing when an infinite horizon is truncated.
    Problem,
    /// `v(t_end, X, i)` from a solved surface, so the estimate targets the
    /// value at time zero through the dynamic programming identity.
    Continuation(&'a ValueSurface),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    /// End of the simulated window. Required for infinite horizons; for
    /// finite horizons it may only shorten the window when the terminal
    /// payoff is a continuation value.
    #[serde(default)]
    pub t_max: Option<f64>,
    pub seed: u64,
    pub x0: f64,
    /// Absolute tolerance for the infinite-horizon truncation tail.
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
}

fn default_tail_tolerance() -> f64 {
    1e-3
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, t_max: Option<f64>, seed: u64, x0: f64) -> Self {
        SimConfig { n_paths, dt, t_max, seed, x0, tail_tolerance: default_tail_tolerance() }
    }
}

/// One realised trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Regime held on `[times[k], times[k+1])`, after any switch at `times[k]`.
    pub regimes: Vec<usize>,
    pub switch_times: Vec<f64>,
    /// Undiscounted cost of each switch, in order.
    pub switch_costs: Vec<f64>,
    /// `(from, to)` of each switch.
    pub switches: Vec<(usize, usize)>,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Step actually used, `t_end / ceil(t_end / dt)`.
    pub dt: f64,
    pub t_end: f64,
    pub mean_switch_count: f64,
    /// Mean of `-Σ e^{-ρτ_k} c`.
    pub discounted_cost_total: f64,
    pub discounted_cost_std_error: f64,
    /// Bound on the neglected tail of a truncated infinite horizon; zero otherwise.
    pub truncation_bound: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Prior lookup precomputed per time slice, regime and grid cell.
enum ThetaLookup<'a> {
    Constant(&'a [f64]),
    Cells { surface: &'a ValueSurface, xs: Vec<f64>, cells: Vec<Vec<Vec<f64>>> },
}

impl<'a> ThetaLookup<'a> {
    fn new(problem: &SwitchingProblem, prior: &'a PriorPolicy) -> Self {
        match prior {
            PriorPolicy::Constant { theta } => ThetaLookup::Constant(theta),
            PriorPolicy::SignOfGradient { surface } => {
                let xs = surface.grid.points();
                let cells = surface
                    .values
                    .iter()
                    .map(|slice| {
                        slice
                            .iter()
                            .enumerate()
                            .map(|(i, v)| {
                                (0..xs.len() - 1)
                                    .map(|k| {
                                        let mid = 0.5 * (xs[k] + xs[k + 1]);
                                        let slope = (v[k + 1] - v[k]) / (xs[k + 1] - xs[k]);
                                        let z = problem.diffusion(i, mid) * slope;
                                        if problem.kappa(i) == 0.0 {
                                            0.0
                                        } else {
                                            problem.sigma_support(i, mid, z).1
                                        }
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                ThetaLookup::Cells { surface, xs, cells }
            }
        }
    }

    /// `θ` at `(t, x)`; `hint` caches the last cell to make nearby lookups cheap.
    #[inline]
    fn theta(&self, t: f64, x: f64, regime: usize, hint: &mut usize) -> f64 {
        match self {
            ThetaLookup::Constant(theta) => theta[regime],
            ThetaLookup::Cells { surface, xs, cells } => {
                let last = xs.len() - 2;
                let mut k = (*hint).min(last);
                if x < xs[k] {
                    let mut steps = 0;
                    while k > 0 && x < xs[k] && steps < 8 {
                        k -= 1;
                        steps += 1;
                    }
                    if k > 0 && x < xs[k] {
                        k = surface.grid.locate(x).0.min(last);
                    }
                } else if x >= xs[k + 1] {
                    let mut steps = 0;
                    while k < last && x >= xs[k + 1] && steps < 8 {
                        k += 1;
                        steps += 1;
                    }
                    if k < last && x >= xs[k + 1] {
                        k = surface.grid.locate(x).0.min(last);
                    }
                }
                *hint = k;
                let s = if cells.len() == 1 { 0 } else { surface.slice_at(t) };
                cells[s][regime][k]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    payoff: f64,
    cost: f64,
    switches: u32,
}

/// Per-path seed: SplitMix64 finaliser over `(seed, index)`.
pub fn path_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn window(problem: &SwitchingProblem, config: &SimConfig, terminal: &Terminal) -> Result<f64, SimError> {
    let t_end = match (problem.horizon(), terminal) {
        (Horizon::Finite { t }, Terminal::Problem) => t,
        (Horizon::Finite { t }, Terminal::Continuation(_)) => config.t_max.map_or(t, |m| m.min(t)),
        (Horizon::Infinite, _) => config.t_max.ok_or(SimError::MissingTmax)?,
    };
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimError::Config(format!("simulation window must be positive, got {t_end}")));
    }
    Ok(t_end)
}

fn check_config(config: &SimConfig) -> Result<(), SimError> {
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(SimError::Config(format!("dt must be positive, got {}", config.dt)));
    }
    if !config.x0.is_finite() {
        return Err(SimError::Config("x0 must be finite".into()));
    }
    Ok(())
}

/// Applies switches at `(t, x)` until no trigger fires.
#[inline]
#[allow(clippy::too_many_arguments)]
fn resolve<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    t: f64,
    x: f64,
    discount: f64,
    regime: &mut usize,
    out: &mut Outcome,
    mut record: impl FnMut(usize, usize, f64),
) -> Result<(), SimError> {
    let guard = 2 * problem.regime_count() + 2;
    let mut legs = 0;
    while let Some(j) = strategy.decide(t, x, *regime) {
        legs += 1;
        if legs > guard {
            return Err(SimError::ZeroTimeCycle { x, regime: *regime });
        }
        let c = problem.cost(*regime, j, x);
        out.cost -= discount * c;
        out.switches += 1;
        record(*regime, j, c);
        *regime = j;
    }
    Ok(())
}

/// Simulates one path. With `recorder` set, every step is stored.
#[allow(clippy::too_many_arguments)]
fn run_path<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    prior: &ThetaLookup,
    terminal: &Terminal,
    x0: f64,
    t_end: f64,
    steps: usize,
    seed: u64,
    mut recorder: Option<&mut PathRecord>,
) -> Result<Outcome, SimError> {
    let mut rng = SmallRng::seed_from_u64(seed);
    let rho = problem.discount();
    let dt = t_end / steps as f64;
    let sqdt = dt.sqrt();
    let step_discount = (-rho * dt).exp();
    let weight = if rho > 0.0 { (1.0 - step_discount) / rho } else { dt };
    let positive = problem.positive_state();
    let gbm: Vec<Option<(f64, f64)>> = problem
        .dynamics()
        .iter()
        .map(|d| match *d {
            DriftDiffusion::Gbm { b, sigma } => Some((b, sigma)),
            _ => None,
        })
        .collect();

    let mut out = Outcome::default();
    let mut x = x0;
    let mut regime = strategy.initial_regime();
    let mut disc = 1.0;
    let mut t = 0.0;
    let mut hint = 0;
    for n in 0..=steps {
        t = n as f64 * dt;
        match recorder.as_deref_mut() {
            Some(rec) => {
                resolve(problem, strategy, t, x, disc, &mut regime, &mut out, |i, j, c| {
                    rec.switch_times.push(t);
                    rec.switch_costs.push(c);
                    rec.switches.push((i, j));
                })?;
                rec.times.push(t);
                rec.states.push(x);
                rec.regimes.push(regime);
            }
            None => resolve(problem, strategy, t, x, disc, &mut regime, &mut out, |_, _, _| {})?,
        }
        if n == steps {
            break;
        }
        let theta = prior.theta(t, x, regime, &mut hint);
        out.payoff += disc * weight * (problem.psi(regime, x) - theta * problem.phi(regime, x));
        let z: f64 = StandardNormal.sample(&mut rng);
        x = match gbm[regime] {
            Some((b, s)) => x * (1.0 + (b - s * theta) * dt + s * sqdt * z),
            None => {
                let s = problem.diffusion(regime, x);
                x + (problem.drift(regime, x) - s * theta) * dt + s * sqdt * z
            }
        };
        if positive && x < 0.0 {
            x = 0.0;
        }
        disc *= step_discount;
    }
    let tail = match terminal {
        Terminal::Problem => match problem.horizon() {
            Horizon::Finite { .. } => problem.terminal_value(regime, x),
            Horizon::Infinite => 0.0,
        },
        Terminal::Continuation(surface) => surface.value_at(t, x, regime),
    };
    out.payoff += disc * tail + out.cost;
    if let Some(rec) = recorder {
        rec.payoff = out.payoff;
    }
    Ok(out)
}

fn steps_for(t_end: f64, dt: f64) -> usize {
    ((t_end / dt) - 1e-9).ceil().max(1.0) as usize
}

/// One Euler path of length `t_max` (or the finite horizon) with step `dt`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_path<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    prior: &PriorPolicy,
    terminal: Terminal,
    x0: f64,
    t_max: Option<f64>,
    dt: f64,
    seed: u64,
) -> Result<PathRecord, SimError> {
    let config = SimConfig::new(1, dt, t_max, seed, x0);
    check_config(&config)?;
    strategy.check(problem)?;
    prior.check(problem)?;
    let t_end = window(problem, &config, &terminal)?;
    let steps = steps_for(t_end, dt);
    let mut rec = PathRecord::with_capacity(steps + 1);
    let lookup = ThetaLookup::new(problem, prior);
    run_path(problem, strategy, &lookup, &terminal, x0, t_end, steps, path_seed(seed, 0), Some(&mut rec))?;
    Ok(rec)
}

/// The first `count` paths of the estimate that `config` would produce,
/// recorded in full.
pub fn record_paths<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    prior: &PriorPolicy,
    terminal: Terminal,
    config: &SimConfig,
    count: usize,
) -> Result<Vec<PathRecord>, SimError> {
    check_config(config)?;
    strategy.check(problem)?;
    prior.check(problem)?;
    let t_end = window(problem, config, &terminal)?;
    let steps = steps_for(t_end, config.dt);
    let lookup = ThetaLookup::new(problem, prior);
    (0..count.min(config.n_paths) as u64)
        .map(|p| {
            let mut rec = PathRecord::with_capacity(steps + 1);
            let seed = path_seed(config.seed, p);
            run_path(problem, strategy, &lookup, &terminal, config.x0, t_end, steps, seed, Some(&mut rec))?;
            Ok(rec)
        })
        .collect()
}

impl PathRecord {
    fn with_capacity(n: usize) -> Self {
        PathRecord {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            regimes: Vec::with_capacity(n),
            switch_times: Vec::new(),
            switch_costs: Vec::new(),
            switches: Vec::new(),
            payoff: 0.0,
        }
    }
}

/// Writes `path,t,x,regime` rows, regimes numbered from 1.
pub fn write_paths_csv<W: std::io::Write>(paths: &[PathRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "path,t,x,regime")?;
    for (p, rec) in paths.iter().enumerate() {
        for ((t, x), i) in rec.times.iter().zip(&rec.states).zip(&rec.regimes) {
            writeln!(w, "{p},{t},{x},{}", i + 1)?;
        }
    }
    Ok(())
}

fn mean_and_error(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Monte Carlo estimate of the objective. Paths are simulated under the
/// distorted drift `b - σθ`, so no density weights appear. The result does
/// not depend on the number of threads.
pub fn estimate_objective<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    prior: &PriorPolicy,
    terminal: Terminal,
    config: &SimConfig,
) -> Result<SimulationReport, SimError> {
    check_config(config)?;
    if config.n_paths < 2 {
        return Err(SimError::Config("n_paths must be at least 2".into()));
    }
    strategy.check(problem)?;
    prior.check(problem)?;
    let t_end = window(problem, config, &terminal)?;
    let steps = steps_for(t_end, config.dt);
    let lookup = ThetaLookup::new(problem, prior);
    let outcomes: Vec<Outcome> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|p| {
            run_path(problem, strategy, &lookup, &terminal, config.x0, t_end, steps, path_seed(config.seed, p), None)
        })
        .collect::<Result<_, _>>()?;
    let n = outcomes.len();
    let (mean, std_error) = mean_and_error(outcomes.iter().map(|o| o.payoff), n);
    let (cost, cost_se) = mean_and_error(outcomes.iter().map(|o| o.cost), n);
    let switches = outcomes.iter().map(|o| o.switches as f64).sum::<f64>() / n as f64;

    let mut warnings = Vec::new();
    let truncation_bound = match (problem.horizon(), &terminal) {
        (Horizon::Infinite, Terminal::Problem) => {
            let b = truncation_bound(problem, config.x0, t_end, 1.0);
            if !(b <= config.tail_tolerance) {
                warnings.push(format!("truncation tail bound {b:e} exceeds tolerance {:e}", config.tail_tolerance));
            }
            b
        }
        _ => 0.0,
    };
    if !switches.is_finite() {
        warnings.push("non-finite switch count".into());
    }
    Ok(SimulationReport {
        mean,
        std_error,
        n_paths: n,
        dt: t_end / steps as f64,
        t_end,
        mean_switch_count: switches,
        discounted_cost_total: cost,
        discounted_cost_std_error: cost_se,
        truncation_bound,
        seed: config.seed,
        warnings,
    })
}

/// Uniform-in-time bound `(|x0| + R + S)` on `E|X_t|` when every regime is
/// mean reverting: `R = max(|mean| + κσ/a)` and `S = max σ / √(2 min a)`.
fn ou_moment_scale(problem: &SwitchingProblem, x0: f64) -> Option<f64> {
    let (mut r, mut smax, mut amin) = (0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..problem.regime_count() {
        let DriftDiffusion::Ou { a, mean, sigma } = problem.dynamics()[i] else {
            return None;
        };
        r = r.max(mean.abs() + problem.kappa(i) * sigma / a);
        smax = smax.max(sigma);
        amin = amin.min(a);
    }
    Some(x0.abs() + r + smax / (2.0 * amin).sqrt())
}

/// Exponential rate `c` with `E|X_t|^q ≤ C (1 + |x0|^q) e^{ct}` under any prior
/// in the box; zero when every regime is mean reverting.
pub fn moment_growth_rate(problem: &SwitchingProblem, q: f64) -> f64 {
    if ou_moment_scale(problem, 0.0).is_some() {
        return 0.0;
    }
    let mut rate: f64 = 0.0;
    for i in 0..problem.regime_count() {
        let k = problem.kappa(i);
        let (b, s) = match problem.dynamics()[i] {
            DriftDiffusion::Gbm { b, sigma } => (b.abs() + k * sigma, sigma),
            DriftDiffusion::Ou { a, mean, sigma } => (a * (1.0 + mean.abs()) + k * sigma, sigma),
            DriftDiffusion::Affine { b0, b1, s0, s1 } => {
                (b0.abs() + b1.abs() + k * (s0.abs() + s1.abs()), s0.abs() + s1.abs())
            }
        };
        rate = rate.max(q * b + 0.5 * q * (q - 1.0).abs() * s * s);
    }
    rate
}

/// Bound on `E ∫_T^∞ e^{-ρt} |ψ - θφ| dt` for a truncated infinite horizon,
/// with `C_f` the growth constant of the data around `x0` and exponent `q`.
/// Infinite when the discount does not dominate the moment growth.
pub fn truncation_bound(problem: &SwitchingProblem, x0: f64, t_max: f64, q: f64) -> f64 {
    let rho = problem.discount();
    let c_q = moment_growth_rate(problem, q);
    if rho <= c_q {
        return f64::INFINITY;
    }
    let span = 10.0 * (1.0 + x0.abs());
    let pts: Vec<f64> = (0..=200).map(|k| x0 - span + 2.0 * span * k as f64 / 200.0).collect();
    let mut c_f: f64 = 0.0;
    for &x in &pts {
        for i in 0..problem.regime_count() {
            let r = problem.psi(i, x).abs() + problem.kappa(i) * problem.phi(i, x).abs();
            c_f = c_f.max(r / (1.0 + x.abs().powf(q)));
        }
    }
    let moment = match ou_moment_scale(problem, x0) {
        Some(m) => 1.0 + m.powf(q),
        None => 1.0 + x0.abs().powf(q),
    };
    c_f * moment * (-(rho - c_q) * t_max).exp() / (rho - c_q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDiagnostic {
    /// Mean of `-Σ e^{-ρτ_k} c`.
    pub estimate: f64,
    pub std_error: f64,
    /// `C_f (1 + |x0|^q)` with `C_f` the growth constant over the probe points.
    pub bound: f64,
    pub ratio: f64,
    pub mean_switch_count: f64,
}

/// Monte Carlo estimate of the expected discounted benefit from switching,
/// compared against the polynomial envelope of the data. Advisory only.
pub fn cost_bound_diagnostic<S: Strategy + ?Sized>(
    problem: &SwitchingProblem,
    strategy: &S,
    prior: &PriorPolicy,
    config: &SimConfig,
    q: f64,
) -> Result<CostDiagnostic, SimError> {
    let report = estimate_objective(problem, strategy, prior, Terminal::Problem, config)?;
    let span = 10.0 * (1.0 + config.x0.abs());
    let pts: Vec<f64> = (0..=200).map(|k| config.x0 - span + 2.0 * span * k as f64 / 200.0).collect();
    let pts: Vec<f64> = if problem.positive_state() { pts.into_iter().filter(|&x| x >= 0.0).collect() } else { pts };
    let bound = growth_constant(problem, &pts, q) * (1.0 + config.x0.abs().powf(q));
    Ok(CostDiagnostic {
        estimate: report.discounted_cost_total,
        std_error: report.discounted_cost_std_error,
        bound,
        ratio: if bound > 0.0 { report.discounted_cost_total / bound } else { 0.0 },
        mean_switch_count: report.mean_switch_count,
    })
}
