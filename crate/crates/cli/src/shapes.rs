//! Recognition of the two case-study shapes inside a general problem.

use ambiswitch_core::closed_form::{BuyLowParams, FundParams};
use ambiswitch_core::{CostSpec, DriftDiffusion, Horizon, Psi, SwitchingProblem};

use crate::error::CliError;

fn incompatible(method: &str, reason: &str) -> CliError {
    CliError::Validation(format!("--method {method} does not fit this problem: {reason}"))
}

fn common(problem: &SwitchingProblem, method: &str) -> Result<(), CliError> {
    if problem.regime_count() != 2 {
        return Err(incompatible(method, "needs exactly 2 regimes"));
    }
    if problem.horizon() != Horizon::Infinite {
        return Err(incompatible(method, "needs an infinite horizon"));
    }
    if !problem.reward().phi.iter().all(|p| p.is_zero()) {
        return Err(incompatible(method, "needs phi = 0"));
    }
    Ok(())
}

/// Two identical OU regimes, zero reward, slippage costs, one `κ`.
pub fn buylow_params(problem: &SwitchingProblem) -> Result<BuyLowParams, CliError> {
    const M: &str = "smoothfit";
    common(problem, M)?;
    let d = problem.dynamics();
    let (a, b, sigma) = match (d[0], d[1]) {
        (DriftDiffusion::Ou { a, mean, sigma }, second) if second == d[0] => (a, mean, sigma),
        _ => return Err(incompatible(M, "needs two identical OU regimes")),
    };
    if !problem.reward().psi.iter().all(Psi::is_zero) {
        return Err(incompatible(M, "needs zero reward"));
    }
    let k = match problem.costs() {
        CostSpec::Slippage { k } => *k,
        _ => return Err(incompatible(M, "needs slippage costs")),
    };
    if problem.kappa(0) != problem.kappa(1) {
        return Err(incompatible(M, "needs equal kappa in both regimes"));
    }
    let params = BuyLowParams { a, b, sigma, rho: problem.discount(), k, kappa: problem.kappa(0) };
    params.validate().map_err(|e| incompatible(M, &e.to_string()))?;
    Ok(params)
}

/// Two GBM regimes with a common power reward and constant costs.
pub fn fund_params(problem: &SwitchingProblem) -> Result<FundParams, CliError> {
    const M: &str = "funds";
    common(problem, M)?;
    let (b1, sigma1, b2, sigma2) = match problem.dynamics() {
        [DriftDiffusion::Gbm { b: b1, sigma: s1 }, DriftDiffusion::Gbm { b: b2, sigma: s2 }] => (*b1, *s1, *b2, *s2),
        _ => return Err(incompatible(M, "needs two GBM regimes")),
    };
    let p = match problem.reward().psi.as_slice() {
        [Psi::Power { p }, Psi::Power { p: q }] if p == q => *p,
        _ => return Err(incompatible(M, "needs the same power reward in both regimes")),
    };
    let (c12, c21) = match problem.costs() {
        CostSpec::Constant { matrix } => (matrix[0][1], matrix[1][0]),
        _ => return Err(incompatible(M, "needs constant costs")),
    };
    let params = FundParams {
        b1,
        b2,
        sigma1,
        sigma2,
        p,
        rho: problem.discount(),
        c12,
        c21,
        kappa1: problem.kappa(0),
        kappa2: problem.kappa(1),
    };
    params.validate().map_err(|e| incompatible(M, &e.to_string()))?;
    Ok(params)
}
