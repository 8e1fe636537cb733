//! Selection between two investment funds with power utility `x^p`.
//!
//! Fund `i` follows a GBM with rate `b_i` and volatility `σ_i`. The strategy
//! type depends only on the ambiguity-adjusted constants
//! `K_i^κ = 1 / (ρ - (b_i - κ_iσ_i)p + σ_i²p(1-p)/2)` and the cost signs;
//! the thresholds themselves come from the stationary PDE.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid1D;
use crate::model::{
    AmbiguitySpec, CostSpec, DriftDiffusion, Horizon, ModelError, Phi, Psi, RewardSpec, SwitchingProblem, TerminalSpec,
};
use crate::pde::{
    apply_monotone_shift, extract_switching_regions, solve_infinite_horizon, Boundary, Direction, RegimeRegions,
    ShiftError, SolverConfig, SolverError, ValueSurface,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FundError {
    #[error("invalid fund parameters: {0}")]
    Params(String),
    #[error("regime {regime}: nonpositive denominator {denominator} in K")]
    Denominator { regime: usize, denominator: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundParams {
    pub b1: f64,
    pub b2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub p: f64,
    pub rho: f64,
    pub c12: f64,
    pub c21: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl FundParams {
    /// `b = (0.03, 0.07)`, `σ = (0.1, 0.3)`, `p = 0.5`, `ρ = 0.03`,
    /// `c_12 = 30000`, `c_21 = -1000`, `κ_1 = 0`.
    pub fn reference(kappa2: f64) -> Self {
        FundParams {
            b1: 0.03,
            b2: 0.07,
            sigma1: 0.1,
            sigma2: 0.3,
            p: 0.5,
            rho: 0.03,
            c12: 30000.0,
            c21: -1000.0,
            kappa1: 0.0,
            kappa2,
        }
    }

    pub fn validate(&self) -> Result<(), FundError> {
        let fail = |m: &str| Err(FundError::Params(m.to_string()));
        let all = [
            self.b1,
            self.b2,
            self.sigma1,
            self.sigma2,
            self.p,
            self.rho,
            self.c12,
            self.c21,
            self.kappa1,
            self.kappa2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("non-finite value");
        }
        if self.sigma1 <= 0.0 || self.sigma2 <= 0.0 {
            return fail("volatilities must be positive");
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return fail("p must lie in (0, 1)");
        }
        if self.c12 + self.c21 <= 0.0 {
            return fail("c12 + c21 must be positive");
        }
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return fail("kappa must be nonnegative");
        }
        let bound = self.p
            * (self.b1 - 0.5 * (1.0 - self.p) * self.sigma1.powi(2))
                .max(self.b2 - 0.5 * (1.0 - self.p) * self.sigma2.powi(2));
        if self.rho <= bound {
            return Err(FundError::Params(format!("rho must exceed {bound}")));
        }
        Ok(())
    }

    fn regime(&self, regime: usize) -> (f64, f64, f64) {
        match regime {
            1 => (self.b1, self.sigma1, self.kappa1),
            2 => (self.b2, self.sigma2, self.kappa2),
            _ => panic!("fund selection has regimes 1 and 2"),
        }
    }

    fn cost(&self, from: usize, to: usize) -> f64 {
        match (from, to) {
            (1, 2) => self.c12,
            (2, 1) => self.c21,
            _ => 0.0,
        }
    }

    /// The switching problem with ambiguity, regimes indexed from 0 and a
    /// constant temporary terminal condition.
    pub fn to_problem(&self) -> Result<SwitchingProblem, FundError> {
        self.validate()?;
        let psi = Psi::Power { p: self.p };
        let terminal = TerminalSpec::Constant { values: fund_terminal(self.c12, self.c21).to_vec() };
        Ok(SwitchingProblem::new(
            vec![
                DriftDiffusion::Gbm { b: self.b1, sigma: self.sigma1 },
                DriftDiffusion::Gbm { b: self.b2, sigma: self.sigma2 },
            ],
            RewardSpec { psi: vec![psi; 2], phi: vec![Phi::Zero; 2] },
            AmbiguitySpec { kappa: vec![self.kappa1, self.kappa2] },
            CostSpec::Constant { matrix: vec![vec![0.0, self.c12], vec![self.c21, 0.0]] },
            self.rho,
            Horizon::Infinite,
            terminal,
        )?)
    }
}

/// Nonpositive constants `(g_1, g_2)` with `g_i ≥ g_j - c_ij`: the regime
/// paying the negative cost sits at `-|c|` below the other, else both are 0.
pub fn fund_terminal(c12: f64, c21: f64) -> [f64; 2] {
    if c21 < 0.0 {
        [c21, 0.0]
    } else if c12 < 0.0 {
        [0.0, c12]
    } else {
        [0.0, 0.0]
    }
}

/// `K_i`, or `K_i^κ` with `b_i` replaced by `b_i - κ_iσ_i`. Regimes are 1 and 2.
pub fn fund_k(params: &FundParams, regime: usize, use_kappa: bool) -> Result<f64, FundError> {
    let (b, s, k) = params.regime(regime);
    let b = if use_kappa { b - k * s } else { b };
    let p = params.p;
    let denominator = params.rho - b * p + 0.5 * s * s * p * (1.0 - p);
    if !(denominator > 0.0) {
        return Err(FundError::Denominator { regime, denominator });
    }
    Ok(1.0 / denominator)
}

/// The ambiguity level of fund 2 at which `K_2^κ = K_1^κ`.
pub fn kappa2_boundary(params: &FundParams) -> f64 {
    let p = params.p;
    let b1 = params.b1 - params.kappa1 * params.sigma1;
    ((1.0 - p) * (params.sigma1.powi(2) - params.sigma2.powi(2)) - 2.0 * (b1 - params.b2)) / (2.0 * params.sigma2)
}

/// Strategy type; `from` and `to` are regimes numbered 1 and 2, with `to` the
/// regime of larger `K^κ` whenever the two differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StrategyType {
    /// Equal `K`, both costs positive.
    NeverSwitch,
    /// Switch `from → to` immediately; never switch back.
    AlwaysToJ { from: usize, to: usize },
    /// Switch `from → to` above a level; never switch back.
    OneWayThreshold { from: usize, to: usize },
    /// Switch `from → to` above one level and back below a lower one.
    TwoWayThresholds { from: usize, to: usize },
    /// Equal `K`: switch `from → to` because that cost is nonpositive.
    SwitchIfFree { from: usize, to: usize },
}

impl StrategyType {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyType::NeverSwitch => "NeverSwitch",
            StrategyType::AlwaysToJ { .. } => "AlwaysToJ",
            StrategyType::OneWayThreshold { .. } => "OneWayThreshold",
            StrategyType::TwoWayThresholds { .. } => "TwoWayThresholds",
            StrategyType::SwitchIfFree { .. } => "SwitchIfFree",
        }
    }

    pub fn has_thresholds(&self) -> bool {
        matches!(self, StrategyType::OneWayThreshold { .. } | StrategyType::TwoWayThresholds { .. })
    }
}

pub fn classify_fund_strategy(params: &FundParams) -> Result<StrategyType, FundError> {
    let k1 = fund_k(params, 1, true)?;
    let k2 = fund_k(params, 2, true)?;
    if k1 == k2 {
        return Ok(if params.c12 > 0.0 && params.c21 > 0.0 {
            StrategyType::NeverSwitch
        } else if params.c12 <= 0.0 {
            StrategyType::SwitchIfFree { from: 1, to: 2 }
        } else {
            StrategyType::SwitchIfFree { from: 2, to: 1 }
        });
    }
    let (i, j) = if k2 > k1 { (1, 2) } else { (2, 1) };
    let (cij, cji) = (params.cost(i, j), params.cost(j, i));
    Ok(if cij <= 0.0 {
        StrategyType::AlwaysToJ { from: i, to: j }
    } else if cji >= 0.0 {
        StrategyType::OneWayThreshold { from: i, to: j }
    } else {
        StrategyType::TwoWayThresholds { from: i, to: j }
    })
}

/// Log grid and solver settings for the fund PDE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub solver: SolverConfig,
}

impl Default for FundGrid {
    fn default() -> Self {
        FundGrid {
            x_min: 1e-2,
            x_max: 1e12,
            nx: 801,
            solver: SolverConfig { upper_boundary: Boundary::RewardGrowth, ..SolverConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundThresholds {
    pub strategy: StrategyType,
    pub k1: f64,
    pub k2: f64,
    /// Level above which fund 1 switches to fund 2; `None` when that region is empty.
    pub x_lower_1: Option<f64>,
    /// Level below which fund 2 switches to fund 1; `None` when that region is empty.
    pub x_upper_2: Option<f64>,
    /// Fund 1 switches everywhere on the grid.
    pub always_1: bool,
    /// Fund 2 switches everywhere on the grid.
    pub always_2: bool,
    pub regions: Vec<RegimeRegions>,
}

/// Solves the shifted, ambiguity-free stationary problem on a log grid.
pub fn fund_surface(params: &FundParams, grid: &FundGrid) -> Result<ValueSurface, FundError> {
    let problem = apply_monotone_shift(&params.to_problem()?)?;
    let g = Grid1D::log(grid.x_min, grid.x_max, grid.nx).map_err(SolverError::from)?;
    Ok(solve_infinite_horizon(&problem, &g, &grid.solver)?)
}

fn level(regions: &RegimeRegions, direction: Direction) -> Option<f64> {
    regions.threshold.filter(|t| t.direction == direction).map(|t| t.level)
}

pub fn fund_thresholds(params: &FundParams, grid: &FundGrid) -> Result<FundThresholds, FundError> {
    let strategy = classify_fund_strategy(params)?;
    let surface = fund_surface(params, grid)?;
    let regions = extract_switching_regions(&surface);
    Ok(FundThresholds {
        strategy,
        k1: fund_k(params, 1, true)?,
        k2: fund_k(params, 2, true)?,
        x_lower_1: level(&regions[0], Direction::Above),
        x_upper_2: level(&regions[1], Direction::Below),
        always_1: regions[0].always,
        always_2: regions[1].always,
        regions,
    })
}
