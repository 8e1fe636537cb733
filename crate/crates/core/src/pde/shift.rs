//! Monotone conditions and the equivalent drift-shifted problem.
//!
//! When the value is nondecreasing in `x`, the worst prior is `θ = κ_i`
//! everywhere and ambiguity reduces to the drift `b - κ_i|σ|` with `κ = 0`.

use thiserror::Error;

use crate::model::{CostSpec, DriftDiffusion, Psi, SwitchingProblem, TerminalSpec};
use crate::validate::{CheckEntry, CheckStatus, Severity, Witness, MONOTONE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("monotone condition {clause} fails: {detail}")]
    Clause { clause: usize, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub number: usize,
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

fn clause(number: usize, name: &'static str, ok: bool, detail: impl Into<String>) -> Clause {
    Clause { number, name, ok, detail: detail.into() }
}

/// Evaluates each monotone clause. All clauses are decided parametrically;
/// tabulated terminals are checked on their own nodes.
pub fn monotone_clauses(problem: &SwitchingProblem) -> Vec<Clause> {
    let n = problem.regime_count();
    let mut out = vec![
        clause(1, "kappa-ignorance", true, "box priors [-kappa_i, kappa_i]"),
        clause(2, "comparison-preserving dynamics", true, "one-dimensional SDE with Lipschitz coefficients"),
        clause(3, "discount independent of x", true, "constant rate"),
    ];

    let mut psi_bad = Vec::new();
    for (i, psi) in problem.reward().psi.iter().enumerate() {
        if let Psi::Affine { c1, .. } = psi {
            if *c1 < 0.0 {
                psi_bad.push(i + 1);
            }
        }
    }
    out.push(clause(
        4,
        "reward nondecreasing",
        psi_bad.is_empty(),
        if psi_bad.is_empty() {
            "all rewards nondecreasing".to_string()
        } else {
            format!("decreasing in regimes {psi_bad:?}")
        },
    ));

    let phi_bad: Vec<usize> = (0..n).filter(|&i| !problem.reward().phi[i].is_zero()).map(|i| i + 1).collect();
    out.push(clause(
        5,
        "zero ambiguity premium",
        phi_bad.is_empty(),
        if phi_bad.is_empty() { "phi = 0".to_string() } else { format!("phi nonzero in regimes {phi_bad:?}") },
    ));

    let g_bad: Vec<usize> = match problem.terminal() {
        TerminalSpec::Zero | TerminalSpec::Constant { .. } => Vec::new(),
        TerminalSpec::Buylow { k, .. } => {
            if *k < 1.0 {
                vec![1]
            } else {
                Vec::new()
            }
        }
        TerminalSpec::CustomGrid { values, .. } => {
            (0..n).filter(|&i| values[i].windows(2).any(|w| w[1] < w[0])).map(|i| i + 1).collect()
        }
    };
    out.push(clause(
        6,
        "terminal nondecreasing",
        g_bad.is_empty(),
        if g_bad.is_empty() {
            "terminal nondecreasing".to_string()
        } else {
            format!("decreasing in regimes {g_bad:?}")
        },
    ));

    let cost_ok = matches!(problem.costs(), CostSpec::Constant { .. });
    out.push(clause(
        7,
        "costs nonincreasing",
        cost_ok,
        if cost_ok { "constant costs" } else { "slippage cost c_12(x) = e^x (1 + K) is increasing" },
    ));
    out
}

pub fn validate_monotone(problem: &SwitchingProblem) -> CheckEntry {
    let clauses = monotone_clauses(problem);
    let failed: Vec<&Clause> = clauses.iter().filter(|c| !c.ok).collect();
    let status = if failed.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail };
    let detail = if failed.is_empty() {
        "all clauses hold".to_string()
    } else {
        failed.iter().map(|c| format!("clause {} ({}): {}", c.number, c.name, c.detail)).collect::<Vec<_>>().join("; ")
    };
    CheckEntry {
        name: MONOTONE.to_string(),
        status,
        severity: Severity::Advisory,
        detail,
        margin: None,
        worst_witness: failed.first().map(|c| Witness::Clause { clause: format!("{}", c.number) }),
    }
}

/// Replaces each drift by `b - κ_i|σ|` and sets `κ = 0`.
pub fn apply_monotone_shift(problem: &SwitchingProblem) -> Result<SwitchingProblem, ShiftError> {
    if let Some(c) = monotone_clauses(problem).into_iter().find(|c| !c.ok) {
        return Err(ShiftError::Clause { clause: c.number, detail: c.detail });
    }
    let n = problem.regime_count();
    if (0..n).all(|i| problem.kappa(i) == 0.0) {
        return Ok(problem.clone());
    }
    let mut dynamics = Vec::with_capacity(n);
    for (i, d) in problem.dynamics().iter().enumerate() {
        let k = problem.kappa(i);
        let shifted = match *d {
            DriftDiffusion::Gbm { b, sigma } => DriftDiffusion::Gbm { b: b - k * sigma.abs(), sigma },
            DriftDiffusion::Ou { a, mean, sigma } => DriftDiffusion::Ou { a, mean: mean - k * sigma.abs() / a, sigma },
            DriftDiffusion::Affine { b0, b1, s0, s1 } => {
                if s1 != 0.0 && k != 0.0 {
                    return Err(ShiftError::Clause {
                        clause: 2,
                        detail: format!("regime {}: shifted drift b - kappa|s0 + s1 x| is not affine", i + 1),
                    });
                }
                DriftDiffusion::Affine { b0: b0 - k * s0.abs(), b1, s0, s1 }
            }
        };
        dynamics.push(shifted);
    }
    let shifted =
        problem.with_dynamics(dynamics).and_then(|p| p.with_kappa(vec![0.0; n])).expect("shift preserves validity");
    Ok(shifted)
}
