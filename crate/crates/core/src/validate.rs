//! Grid-based checks of the standing assumptions on costs, terminal payoffs
//! and rewards.
//!
//! Every x-dependent condition is sampled on a finite set of state values;
//! a pass therefore certifies the sample only.

use serde::{Deserialize, Serialize};

use crate::model::{CostSpec, Horizon, Phi, Psi, SwitchingProblem, TerminalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Hard failures make a problem unsolvable; advisory ones are reported only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Hard,
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { x: f64, regime: usize },
    Pair { x: f64, from: usize, to: usize },
    Cycle { x: f64, cycle: Vec<usize> },
    Triple { x: f64, k: usize, i: usize, j: usize },
    Clause { clause: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    pub severity: Severity,
    pub detail: String,
    /// Smallest margin found (positive means satisfied), when meaningful.
    pub margin: Option<f64>,
    pub worst_witness: Option<Witness>,
}

impl CheckEntry {
    fn new(name: &str, severity: Severity) -> Self {
        CheckEntry {
            name: name.to_string(),
            status: CheckStatus::Pass,
            severity,
            detail: String::new(),
            margin: None,
            worst_witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn hard_failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail && c.severity == Severity::Hard)
    }

    pub fn has_hard_failure(&self) -> bool {
        self.hard_failures().next().is_some()
    }
}

/// Moment constants entering the strong triangular condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants {
    /// Polynomial growth exponent `q`.
    pub q: f64,
    pub c_qx: f64,
    pub c_q: f64,
    /// Infinite-horizon constant `C^∞_{q,X}`.
    pub c_qx_inf: f64,
}

impl MomentConstants {
    pub fn defaults(problem: &SwitchingProblem) -> Self {
        MomentConstants { q: 1.0, c_qx: 1.0, c_q: problem.discount(), c_qx_inf: 1.0 }
    }
}

pub const NON_FREE_LOOP: &str = "non_free_loop";
pub const STRONG_TRIANGULAR: &str = "strong_triangular";
pub const TERMINAL: &str = "terminal";
pub const NONNEGATIVE_REWARD: &str = "nonnegative_reward";
pub const POLYNOMIAL_GROWTH: &str = "polynomial_growth";
pub const MONOTONE: &str = "monotone";

/// Simple directed cycles over `n` regimes, each listed once with its
/// smallest index first. For `n > 6` only cycles of length 2 and 3.
pub fn simple_cycles(n: usize) -> Vec<Vec<usize>> {
    let max_len = if n <= 6 { n } else { 3.min(n) };
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(max_len);
    for start in 0..n {
        path.clear();
        path.push(start);
        extend_cycles(n, max_len, &mut path, &mut out);
    }
    out
}

fn extend_cycles(n: usize, max_len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if path.len() >= 2 {
        out.push(path.clone());
    }
    if path.len() == max_len {
        return;
    }
    let start = path[0];
    for next in start + 1..n {
        if !path.contains(&next) {
            path.push(next);
            extend_cycles(n, max_len, path, out);
            path.pop();
        }
    }
}

/// Total cost of the closed loop `cycle[0] → cycle[1] → … → cycle[0]` at `x`.
pub fn loop_cost(problem: &SwitchingProblem, cycle: &[usize], x: f64) -> f64 {
    let m = cycle.len();
    (0..m).map(|l| problem.cost(cycle[l], cycle[(l + 1) % m], x)).sum()
}

/// Every simple switching cycle must have strictly positive total cost.
pub fn validate_non_free_loop(problem: &SwitchingProblem, grid: &[f64]) -> CheckEntry {
    let mut entry = CheckEntry::new(NON_FREE_LOOP, Severity::Hard);
    let n = problem.regime_count();
    if n < 2 {
        entry.status = CheckStatus::Skipped;
        entry.detail = "single regime: no switching cycles".into();
        return entry;
    }
    if grid.is_empty() {
        entry.status = CheckStatus::Skipped;
        entry.detail = "empty grid".into();
        return entry;
    }
    let cycles = simple_cycles(n);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &x in grid {
        for cycle in &cycles {
            let s = loop_cost(problem, cycle, x);
            if s < worst {
                worst = s;
                witness = Some(Witness::Cycle { x, cycle: cycle.clone() });
            }
        }
    }
    entry.margin = Some(worst);
    entry.worst_witness = witness;
    let scope = if n <= 6 { "all" } else { "2- and 3-" };
    entry.detail = format!("min loop sum {worst} over {} {scope}cycles and {} points", cycles.len(), grid.len());
    if !(worst > 0.0) {
        entry.status = CheckStatus::Fail;
    }
    entry
}

/// Regimes with a negative outgoing cost somewhere on the grid, paired with
/// `C_i = -min_{j,x} c_{i,j}(x) / (1 + |x|^q)`.
pub fn negative_cost_regimes(problem: &SwitchingProblem, grid: &[f64], q: f64) -> Vec<(usize, f64)> {
    let n = problem.regime_count();
    let mut out = Vec::new();
    for i in 0..n {
        let mut negative = false;
        let mut c_i = f64::NEG_INFINITY;
        for j in (0..n).filter(|&j| j != i) {
            for &x in grid {
                let c = problem.cost(i, j, x);
                if c < 0.0 {
                    negative = true;
                }
                c_i = c_i.max(-c / (1.0 + x.abs().powf(q)));
            }
        }
        if negative {
            out.push((i, c_i));
        }
    }
    out
}

/// Strong triangular inequality `c_{k,j} ≤ c_{k,i} - C_i (1 + C_{q,X}(1+|x|^q) e^{C_q T})`
/// for every `i` with a negative outgoing cost and every `j ≠ i`, `k ≠ i`.
/// The exponential factor is evaluated at `t = 0`, where it is largest; the
/// infinite-horizon form replaces it by `C^∞_{q,X}`.
pub fn validate_strong_triangular(problem: &SwitchingProblem, grid: &[f64], constants: &MomentConstants) -> CheckEntry {
    let mut entry = CheckEntry::new(STRONG_TRIANGULAR, Severity::Advisory);
    let n = problem.regime_count();
    let neg = negative_cost_regimes(problem, grid, constants.q);
    if neg.is_empty() {
        entry.detail = "no negative costs: condition holds vacuously".into();
        return entry;
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &(i, c_i) in &neg {
        for &x in grid {
            let growth = 1.0 + x.abs().powf(constants.q);
            let factor = match problem.horizon() {
                Horizon::Finite { t } => 1.0 + constants.c_qx * growth * (constants.c_q * t).exp(),
                Horizon::Infinite => 1.0 + constants.c_qx_inf * growth,
            };
            for k in (0..n).filter(|&k| k != i) {
                for j in (0..n).filter(|&j| j != i) {
                    let margin = problem.cost(k, i, x) - c_i * factor - problem.cost(k, j, x);
                    if margin < worst {
                        worst = margin;
                        witness = Some(Witness::Triple { x, k, i, j });
                    }
                }
            }
        }
    }
    entry.margin = Some(worst);
    entry.worst_witness = witness;
    let regimes: Vec<String> = neg.iter().map(|(i, c)| format!("{}(C={c:.6})", i + 1)).collect();
    entry.detail = format!("negative-cost regimes [{}]; min margin {worst}", regimes.join(", "));
    if worst < 0.0 {
        entry.status = CheckStatus::Fail;
    }
    entry
}

/// Terminal consistency `g(x,i) ≥ max_{j≠i} g(x,j) - c_{i,j}(x)`; for infinite
/// horizons also `g ≤ 0` and `L^i g - ρ g - g' σ θ ≥ 0` for `θ = ±κ_i`.
pub fn validate_terminal(problem: &SwitchingProblem, grid: &[f64]) -> CheckEntry {
    let mut entry = CheckEntry::new(TERMINAL, Severity::Hard);
    let n = problem.regime_count();
    let g = problem.terminal();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut worst_diff = f64::INFINITY;
    let mut diff_witness = None;
    let mut worst_sign = f64::INFINITY;
    let mut sign_witness = None;
    let infinite = matches!(problem.horizon(), Horizon::Infinite);
    for &x in grid {
        for i in 0..n {
            let gi = g.value(i, x);
            for j in (0..n).filter(|&j| j != i) {
                let margin = gi - (g.value(j, x) - problem.cost(i, j, x));
                let scale = 1e-12 * (1.0 + gi.abs());
                let margin = if margin.abs() <= scale { 0.0 } else { margin };
                if margin < worst {
                    worst = margin;
                    witness = Some(Witness::Pair { x, from: i, to: j });
                }
            }
            if infinite {
                if -gi < worst_sign {
                    worst_sign = -gi;
                    sign_witness = Some(Witness::Point { x, regime: i });
                }
                let (v, d1, d2) = g.eval(i, x);
                let b = problem.drift(i, x);
                let s = problem.diffusion(i, x);
                let base = b * d1 + 0.5 * s * s * d2 - problem.discount() * v;
                let kappa = problem.kappa(i);
                let m = base - (d1 * s * kappa).abs();
                if m < worst_diff {
                    worst_diff = m;
                    diff_witness = Some(Witness::Point { x, regime: i });
                }
            }
        }
    }
    if n < 2 {
        worst = f64::INFINITY;
    }
    let mut parts = Vec::new();
    if n >= 2 {
        parts.push(format!("min consistency margin {worst}"));
    }
    let mut failed_witness = None;
    if worst < 0.0 {
        failed_witness = witness.clone();
    }
    if infinite {
        parts.push(format!("max g {}", -worst_sign));
        parts.push(format!("min submartingale margin {worst_diff}"));
        if worst_sign < 0.0 && failed_witness.is_none() {
            failed_witness = sign_witness.clone();
        }
        if worst_diff < -1e-12 && failed_witness.is_none() {
            failed_witness = diff_witness.clone();
        }
    }
    entry.detail = parts.join("; ");
    entry.margin = Some(worst.min(if infinite { worst_sign.min(worst_diff) } else { f64::INFINITY }));
    if failed_witness.is_some() {
        entry.status = CheckStatus::Fail;
        entry.worst_witness = failed_witness;
    } else {
        entry.worst_witness = witness.or(diff_witness);
    }
    entry
}

/// `ψ(x,i) - ς(x,i,0) = ψ - κ_i|φ| ≥ 0`, required for infinite horizons.
pub fn validate_nonnegative_reward(problem: &SwitchingProblem, grid: &[f64]) -> CheckEntry {
    let mut entry = CheckEntry::new(NONNEGATIVE_REWARD, Severity::Hard);
    if !matches!(problem.horizon(), Horizon::Infinite) {
        entry.status = CheckStatus::Skipped;
        entry.detail = "finite horizon".into();
        return entry;
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &x in grid {
        for i in 0..problem.regime_count() {
            let m = problem.psi(i, x) - problem.sigma_support(i, x, 0.0).0;
            if m < worst {
                worst = m;
                witness = Some(Witness::Point { x, regime: i });
            }
        }
    }
    entry.margin = Some(worst);
    entry.worst_witness = witness;
    entry.detail = format!("min psi - kappa|phi| = {worst}");
    if worst < 0.0 {
        entry.status = CheckStatus::Fail;
    }
    entry
}

/// Parametric check that rewards, premia, costs and terminal payoffs grow at
/// most polynomially, plus the grid constant `C_f` of that growth.
pub fn validate_polynomial_growth(problem: &SwitchingProblem, grid: &[f64], q: f64) -> CheckEntry {
    let mut entry = CheckEntry::new(POLYNOMIAL_GROWTH, Severity::Advisory);
    let cf = growth_constant(problem, grid, q);
    let mut notes = Vec::new();
    if matches!(problem.costs(), CostSpec::Slippage { .. }) {
        notes.push("slippage costs grow exponentially in x".to_string());
    }
    if matches!(problem.terminal(), TerminalSpec::Buylow { .. }) {
        notes.push("buylow terminal grows exponentially in x".to_string());
    }
    for (i, psi) in problem.reward().psi.iter().enumerate() {
        if let Psi::Affine { c1, .. } = psi {
            if *c1 != 0.0 && q < 1.0 {
                notes.push(format!("regime {} reward is linear but q < 1", i + 1));
            }
        }
    }
    for (i, phi) in problem.reward().phi.iter().enumerate() {
        if let Phi::Affine { c1, .. } = phi {
            if *c1 != 0.0 && q < 1.0 {
                notes.push(format!("regime {} premium is linear but q < 1", i + 1));
            }
        }
    }
    entry.margin = Some(cf);
    if notes.is_empty() {
        entry.detail = format!("C_f = {cf} on the grid with q = {q}");
    } else {
        entry.status = CheckStatus::Fail;
        entry.detail = format!("{}; grid C_f = {cf}", notes.join("; "));
    }
    entry
}

/// `max (|ψ| + |φ| + |g| + max_j |c_{i,j}|) / (1 + |x|^q)` over grid and regimes.
pub fn growth_constant(problem: &SwitchingProblem, grid: &[f64], q: f64) -> f64 {
    let n = problem.regime_count();
    let mut cf: f64 = 0.0;
    for &x in grid {
        for i in 0..n {
            let c = (0..n).map(|j| problem.cost(i, j, x).abs()).fold(0.0, f64::max);
            let total = problem.psi(i, x).abs() + problem.phi(i, x).abs() + problem.terminal_value(i, x).abs() + c;
            cf = cf.max(total / (1.0 + x.abs().powf(q)));
        }
    }
    cf
}

/// Runs every grid check and the monotone-condition clauses.
pub fn validate_problem(problem: &SwitchingProblem, grid: &[f64], constants: &MomentConstants) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.push(validate_polynomial_growth(problem, grid, constants.q));
    report.push(validate_non_free_loop(problem, grid));
    report.push(validate_strong_triangular(problem, grid, constants));
    report.push(validate_terminal(problem, grid));
    report.push(validate_nonnegative_reward(problem, grid));
    report.push(crate::pde::validate_monotone(problem));
    report
}

/// The hard preconditions shared by the PDE solvers.
pub(crate) fn solver_preconditions(problem: &SwitchingProblem, grid: &[f64]) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.push(validate_non_free_loop(problem, grid));
    report.push(validate_terminal(problem, grid));
    report.push(validate_nonnegative_reward(problem, grid));
    report
}
