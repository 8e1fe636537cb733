//! Analytic results for the two case studies: fund selection and buy-low
//! sell-high trading.

mod buylow;
mod funds;
pub mod quadrature;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use buylow::{
    phi_integral, solve_smoothfit, value_buy_sell, BuyLowParams, Conditions, PhiVariant, SmoothFitError,
    SmoothFitSolution,
};
pub use funds::{
    classify_fund_strategy, fund_k, fund_surface, fund_terminal, fund_thresholds, kappa2_boundary, FundError, FundGrid,
    FundParams, FundThresholds, StrategyType,
};

/// One row of a smooth-fit sweep over `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFitRow {
    pub kappa: f64,
    pub x1: f64,
    pub x2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub gap: f64,
    pub conditions_ok: bool,
    pub residual: f64,
}

/// Solves the smooth-fit system at each `κ`, in parallel, preserving order.
pub fn sweep_smoothfit(base: &BuyLowParams, kappas: &[f64]) -> Result<Vec<SmoothFitRow>, SmoothFitError> {
    kappas
        .par_iter()
        .map(|&kappa| {
            let s = solve_smoothfit(&BuyLowParams { kappa, ..*base })?;
            Ok(SmoothFitRow {
                kappa,
                x1: s.x1,
                x2: s.x2,
                c1: s.c1,
                c2: s.c2,
                gap: s.x2 - s.x1,
                conditions_ok: s.conditions.all_ok(),
                residual: s.residual,
            })
        })
        .collect()
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}
