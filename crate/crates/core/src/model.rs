//! Problem data model: regime dynamics, rewards, switching costs, discounting,
//! horizon, terminal payoff and the box-prior ambiguity set.
//!
//! The controlled state follows, in regime `i` and under prior `θ`,
//!
//! ```text
//! dX = (b(X, i) - σ(X, i) θ) dt + σ(X, i) dW,    θ ∈ [-κ_i, κ_i]
//! ```
//!
//! Regimes are indexed from `0` in the API. Text output (CLI, reports)
//! numbers them from `1` to match the usual notation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reasons a problem instance is rejected at construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

impl ModelError {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invalid { path: path.into(), reason: reason.into() }
    }

    /// JSON-pointer style location of the offending field.
    pub fn path(&self) -> &str {
        match self {
            ModelError::Invalid { path, .. } => path,
        }
    }
}

/// Per-regime drift and diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftDiffusion {
    /// `b(x) = b x`, `σ(x) = sigma x`.
    Gbm { b: f64, sigma: f64 },
    /// `b(x) = a (mean - x)`, `σ(x) = sigma`.
    Ou { a: f64, mean: f64, sigma: f64 },
    /// `b(x) = b0 + b1 x`, `σ(x) = s0 + s1 x`.
    Affine { b0: f64, b1: f64, s0: f64, s1: f64 },
}

impl DriftDiffusion {
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        match *self {
            DriftDiffusion::Gbm { b, .. } => b * x,
            DriftDiffusion::Ou { a, mean, .. } => a * (mean - x),
            DriftDiffusion::Affine { b0, b1, .. } => b0 + b1 * x,
        }
    }

    #[inline]
    pub fn diffusion(&self, x: f64) -> f64 {
        match *self {
            DriftDiffusion::Gbm { sigma, .. } => sigma * x,
            DriftDiffusion::Ou { sigma, .. } => sigma,
            DriftDiffusion::Affine { s0, s1, .. } => s0 + s1 * x,
        }
    }

    /// Whether the state stays in `(0, ∞)` when started there.
    pub fn is_positive(&self) -> bool {
        matches!(self, DriftDiffusion::Gbm { .. })
    }

    fn check(&self, path: &str) -> Result<(), ModelError> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::invalid(format!("{path}/{name}"), "must be finite"))
            }
        };
        match *self {
            DriftDiffusion::Gbm { b, sigma } => {
                finite(b, "b")?;
                finite(sigma, "sigma")?;
                if sigma <= 0.0 {
                    return Err(ModelError::invalid(format!("{path}/sigma"), "must be > 0"));
                }
            }
            DriftDiffusion::Ou { a, mean, sigma } => {
                finite(a, "a")?;
                finite(mean, "mean")?;
                finite(sigma, "sigma")?;
                if a <= 0.0 {
                    return Err(ModelError::invalid(format!("{path}/a"), "must be > 0"));
                }
                if sigma <= 0.0 {
                    return Err(ModelError::invalid(format!("{path}/sigma"), "must be > 0"));
                }
            }
            DriftDiffusion::Affine { b0, b1, s0, s1 } => {
                finite(b0, "b0")?;
                finite(b1, "b1")?;
                finite(s0, "s0")?;
                finite(s1, "s1")?;
                if s0 == 0.0 && s1 == 0.0 {
                    return Err(ModelError::invalid(format!("{path}/s0"), "diffusion must not vanish identically"));
                }
            }
        }
        Ok(())
    }
}

/// Running reward `ψ(x, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Psi {
    Zero,
    /// `x^p` for `x ≥ 0`, `p ∈ (0, 1)`.
    Power {
        p: f64,
    },
    /// `c0 + c1 x`.
    Affine {
        c0: f64,
        c1: f64,
    },
}

impl Psi {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Psi::Zero => 0.0,
            Psi::Power { p } => {
                let x = x.max(0.0);
                if p == 0.5 {
                    x.sqrt()
                } else {
                    x.powf(p)
                }
            }
            Psi::Affine { c0, c1 } => c0 + c1 * x,
        }
    }

    /// `(ψ', ψ'')` at `x`.
    pub fn derivatives(&self, x: f64) -> (f64, f64) {
        match *self {
            Psi::Zero => (0.0, 0.0),
            Psi::Power { p } if x > 0.0 => (p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0)),
            Psi::Power { .. } => (0.0, 0.0),
            Psi::Affine { c1, .. } => (c1, 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Psi::Zero => true,
            Psi::Affine { c0, c1 } => c0 == 0.0 && c1 == 0.0,
            Psi::Power { .. } => false,
        }
    }
}

/// Ambiguity premium `φ(x, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Phi {
    Zero,
    Affine { c0: f64, c1: f64 },
}

impl Phi {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Phi::Zero => 0.0,
            Phi::Affine { c0, c1 } => c0 + c1 * x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Phi::Zero => true,
            Phi::Affine { c0, c1 } => c0 == 0.0 && c1 == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    pub psi: Vec<Psi>,
    pub phi: Vec<Phi>,
}

/// Box-prior radii: regime `i` uses `Θ = [-κ_i, κ_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySpec {
    pub kappa: Vec<f64>,
}

/// Switching costs `c_{i,j}(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Constant {
        matrix: Vec<Vec<f64>>,
    },
    /// `c_{1,2}(x) = e^x (1 + K)`, `c_{2,1}(x) = -e^x (1 - K)`.
    Slippage {
        #[serde(rename = "K")]
        k: f64,
    },
}

impl CostSpec {
    #[inline]
    pub fn cost(&self, i: usize, j: usize, x: f64) -> f64 {
        if i == j {
            return 0.0;
        }
        match self {
            CostSpec::Constant { matrix } => matrix[i][j],
            CostSpec::Slippage { k } => {
                if i == 0 {
                    x.exp() * (1.0 + k)
                } else {
                    -x.exp() * (1.0 - k)
                }
            }
        }
    }

    /// Derivative of `c_{i,j}` in `x`.
    pub fn cost_slope(&self, i: usize, j: usize, x: f64) -> f64 {
        match self {
            CostSpec::Constant { .. } => 0.0,
            CostSpec::Slippage { .. } => self.cost(i, j, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    Finite {
        #[serde(rename = "T")]
        t: f64,
    },
    Infinite,
}

/// Terminal payoff `g(x, i)`; for infinite horizons this is the temporary
/// terminal used by the finite-horizon approximations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TerminalSpec {
    Zero,
    /// Constant per regime.
    Constant {
        values: Vec<f64>,
    },
    /// `g(x, 1) = -e^x (1 - K) - C`, `g(x, 2) = -C`.
    Buylow {
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "C")]
        c: f64,
    },
    /// Piecewise-linear interpolation of tabulated values, flat outside.
    CustomGrid {
        x: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl TerminalSpec {
    pub fn value(&self, i: usize, x: f64) -> f64 {
        self.eval(i, x).0
    }

    /// `(g, g', g'')` at `x` in regime `i`.
    pub fn eval(&self, i: usize, x: f64) -> (f64, f64, f64) {
        match self {
            TerminalSpec::Zero => (0.0, 0.0, 0.0),
            TerminalSpec::Constant { values } => (values[i], 0.0, 0.0),
            TerminalSpec::Buylow { k, c } => {
                if i == 0 {
                    let e = -x.exp() * (1.0 - k);
                    (e - c, e, e)
                } else {
                    (-c, 0.0, 0.0)
                }
            }
            TerminalSpec::CustomGrid { x: xs, values } => {
                let v = &values[i];
                let n = xs.len();
                if n == 1 || x <= xs[0] {
                    return (v[0], 0.0, 0.0);
                }
                if x >= xs[n - 1] {
                    return (v[n - 1], 0.0, 0.0);
                }
                let k = xs.partition_point(|&p| p <= x) - 1;
                let slope = (v[k + 1] - v[k]) / (xs[k + 1] - xs[k]);
                (v[k] + slope * (x - xs[k]), slope, 0.0)
            }
        }
    }
}

/// A fully specified switching problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingProblem {
    regime_count: usize,
    dynamics: Vec<DriftDiffusion>,
    reward: RewardSpec,
    ambiguity: AmbiguitySpec,
    costs: CostSpec,
    discount: f64,
    horizon: Horizon,
    terminal: TerminalSpec,
}

impl SwitchingProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dynamics: Vec<DriftDiffusion>,
        reward: RewardSpec,
        ambiguity: AmbiguitySpec,
        costs: CostSpec,
        discount: f64,
        horizon: Horizon,
        terminal: TerminalSpec,
    ) -> Result<Self, ModelError> {
        let n = dynamics.len();
        if n == 0 {
            return Err(ModelError::invalid("/regimes", "at least one regime is required"));
        }
        for (i, d) in dynamics.iter().enumerate() {
            d.check(&format!("/dynamics/{i}"))?;
        }
        let per_regime = |len: usize, path: &str| {
            if len == n {
                Ok(())
            } else {
                Err(ModelError::invalid(path, format!("expected {n} entries, found {len}")))
            }
        };
        per_regime(reward.psi.len(), "/reward")?;
        per_regime(reward.phi.len(), "/phi")?;
        per_regime(ambiguity.kappa.len(), "/kappa")?;
        for (i, psi) in reward.psi.iter().enumerate() {
            match *psi {
                Psi::Power { p } => {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(ModelError::invalid(format!("/reward/{i}/p"), "must lie in (0, 1)"));
                    }
                    if !dynamics[i].is_positive() {
                        return Err(ModelError::invalid(
                            format!("/reward/{i}"),
                            "power reward requires positive (GBM) dynamics",
                        ));
                    }
                }
                Psi::Affine { c0, c1 } => {
                    if !(c0.is_finite() && c1.is_finite()) {
                        return Err(ModelError::invalid(format!("/reward/{i}"), "must be finite"));
                    }
                }
                Psi::Zero => {}
            }
        }
        for (i, phi) in reward.phi.iter().enumerate() {
            if let Phi::Affine { c0, c1 } = *phi {
                if !(c0.is_finite() && c1.is_finite()) {
                    return Err(ModelError::invalid(format!("/phi/{i}"), "must be finite"));
                }
            }
        }
        for (i, &k) in ambiguity.kappa.iter().enumerate() {
            if !(k.is_finite() && k >= 0.0) {
                return Err(ModelError::invalid(format!("/kappa/{i}"), "must be finite and >= 0"));
            }
        }
        match &costs {
            CostSpec::Constant { matrix } => {
                per_regime(matrix.len(), "/costs/matrix")?;
                for (i, row) in matrix.iter().enumerate() {
                    per_regime(row.len(), &format!("/costs/matrix/{i}"))?;
                    for (j, &c) in row.iter().enumerate() {
                        if !c.is_finite() {
                            return Err(ModelError::invalid(format!("/costs/matrix/{i}/{j}"), "must be finite"));
                        }
                    }
                    if row[i] != 0.0 {
                        return Err(ModelError::invalid(
                            format!("/costs/matrix/{i}/{i}"),
                            "diagonal costs must be zero",
                        ));
                    }
                }
            }
            CostSpec::Slippage { k } => {
                if n != 2 {
                    return Err(ModelError::invalid("/costs", "slippage costs require exactly 2 regimes"));
                }
                if !(*k > 0.0 && *k < 1.0) {
                    return Err(ModelError::invalid("/costs/K", "must lie in (0, 1)"));
                }
            }
        }
        if !discount.is_finite() || discount < 0.0 {
            return Err(ModelError::invalid("/discount", "must be finite and >= 0"));
        }
        match horizon {
            Horizon::Finite { t } => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(ModelError::invalid("/horizon/T", "must be > 0"));
                }
            }
            Horizon::Infinite => {
                if discount <= 0.0 {
                    return Err(ModelError::invalid("/discount", "infinite horizon requires a positive discount rate"));
                }
            }
        }
        match &terminal {
            TerminalSpec::Constant { values } => {
                per_regime(values.len(), "/terminal/values")?;
            }
            TerminalSpec::Buylow { k, c } => {
                if n != 2 {
                    return Err(ModelError::invalid("/terminal", "buylow terminal requires 2 regimes"));
                }
                if !(k.is_finite() && c.is_finite()) {
                    return Err(ModelError::invalid("/terminal", "must be finite"));
                }
            }
            TerminalSpec::CustomGrid { x, values } => {
                if x.is_empty() {
                    return Err(ModelError::invalid("/terminal/x", "must be nonempty"));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(ModelError::invalid("/terminal/x", "must be strictly increasing"));
                }
                per_regime(values.len(), "/terminal/values")?;
                for (i, row) in values.iter().enumerate() {
                    if row.len() != x.len() {
                        return Err(ModelError::invalid(
                            format!("/terminal/values/{i}"),
                            "length must match /terminal/x",
                        ));
                    }
                }
            }
            TerminalSpec::Zero => {}
        }
        Ok(SwitchingProblem { regime_count: n, dynamics, reward, ambiguity, costs, discount, horizon, terminal })
    }

    pub fn regime_count(&self) -> usize {
        self.regime_count
    }
    pub fn dynamics(&self) -> &[DriftDiffusion] {
        &self.dynamics
    }
    pub fn reward(&self) -> &RewardSpec {
        &self.reward
    }
    pub fn ambiguity(&self) -> &AmbiguitySpec {
        &self.ambiguity
    }
    pub fn costs(&self) -> &CostSpec {
        &self.costs
    }
    pub fn discount(&self) -> f64 {
        self.discount
    }
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }
    pub fn terminal(&self) -> &TerminalSpec {
        &self.terminal
    }
    pub fn kappa(&self, i: usize) -> f64 {
        self.ambiguity.kappa[i]
    }

    #[inline]
    pub fn drift(&self, i: usize, x: f64) -> f64 {
        self.dynamics[i].drift(x)
    }
    #[inline]
    pub fn diffusion(&self, i: usize, x: f64) -> f64 {
        self.dynamics[i].diffusion(x)
    }
    #[inline]
    pub fn psi(&self, i: usize, x: f64) -> f64 {
        self.reward.psi[i].value(x)
    }
    #[inline]
    pub fn phi(&self, i: usize, x: f64) -> f64 {
        self.reward.phi[i].value(x)
    }
    #[inline]
    pub fn cost(&self, i: usize, j: usize, x: f64) -> f64 {
        self.costs.cost(i, j, x)
    }
    pub fn terminal_value(&self, i: usize, x: f64) -> f64 {
        self.terminal.value(i, x)
    }

    /// Whether every regime has a state process confined to `(0, ∞)`.
    pub fn positive_state(&self) -> bool {
        self.dynamics.iter().all(DriftDiffusion::is_positive)
    }

    /// `ς(x, i, z) = max_{|θ| ≤ κ_i} θ (φ(x, i) + z)` together with the maximiser.
    pub fn sigma_support(&self, i: usize, x: f64, z: f64) -> (f64, f64) {
        sigma_support(self.kappa(i), self.phi(i, x), z)
    }

    pub fn with_kappa(&self, kappa: Vec<f64>) -> Result<Self, ModelError> {
        let mut ambiguity = self.ambiguity.clone();
        ambiguity.kappa = kappa;
        SwitchingProblem::new(
            self.dynamics.clone(),
            self.reward.clone(),
            ambiguity,
            self.costs.clone(),
            self.discount,
            self.horizon,
            self.terminal.clone(),
        )
    }

    pub fn with_dynamics(&self, dynamics: Vec<DriftDiffusion>) -> Result<Self, ModelError> {
        SwitchingProblem::new(
            dynamics,
            self.reward.clone(),
            self.ambiguity.clone(),
            self.costs.clone(),
            self.discount,
            self.horizon,
            self.terminal.clone(),
        )
    }

    pub fn with_horizon(&self, horizon: Horizon) -> Result<Self, ModelError> {
        SwitchingProblem::new(
            self.dynamics.clone(),
            self.reward.clone(),
            self.ambiguity.clone(),
            self.costs.clone(),
            self.discount,
            horizon,
            self.terminal.clone(),
        )
    }

    pub fn with_terminal(&self, terminal: TerminalSpec) -> Result<Self, ModelError> {
        SwitchingProblem::new(
            self.dynamics.clone(),
            self.reward.clone(),
            self.ambiguity.clone(),
            self.costs.clone(),
            self.discount,
            self.horizon,
            terminal,
        )
    }
}

/// Support function of the box `[-κ, κ]` at `φ + z`: returns `(κ|φ + z|, θ*)`
/// with `θ* = κ sign(φ + z)` and `sign(0) = +1`.
pub fn sigma_support(kappa: f64, phi: f64, z: f64) -> (f64, f64) {
    let s = phi + z;
    let theta = if s >= 0.0 { kappa } else { -kappa };
    (kappa * s.abs(), theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(psi: Psi, kappa: f64) -> SwitchingProblem {
        SwitchingProblem::new(
            vec![DriftDiffusion::Ou { a: 1.0, mean: 0.0, sigma: 1.0 }],
            RewardSpec { psi: vec![psi], phi: vec![Phi::Zero] },
            AmbiguitySpec { kappa: vec![kappa] },
            CostSpec::Constant { matrix: vec![vec![0.0]] },
            0.5,
            Horizon::Infinite,
            TerminalSpec::Zero,
        )
        .unwrap()
    }

    #[test]
    fn sigma_support_examples() {
        assert_eq!(sigma_support(0.1, 0.0, 2.0), (0.2, 0.1));
        assert_eq!(sigma_support(0.0, 3.0, -7.0).0, 0.0);
        let (s, th) = sigma_support(0.25, 1.5, -2.0);
        assert!((s - 0.125).abs() < 1e-15);
        assert_eq!(th, -0.25);
        assert_eq!(sigma_support(0.3, 0.0, 0.0).1, 0.3);
    }

    #[test]
    fn slippage_costs() {
        let c = CostSpec::Slippage { k: 0.01 };
        assert!((c.cost(0, 1, 0.0) - 1.01).abs() < 1e-15);
        assert!((c.cost(1, 0, 0.0) + 0.99).abs() < 1e-15);
        assert_eq!(c.cost(1, 1, 3.0), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = single(Psi::Zero, 0.0);
        assert!(p.with_kappa(vec![-0.1]).is_err());
        let err = SwitchingProblem::new(
            vec![DriftDiffusion::Ou { a: 0.0, mean: 0.0, sigma: 1.0 }],
            RewardSpec { psi: vec![Psi::Zero], phi: vec![Phi::Zero] },
            AmbiguitySpec { kappa: vec![0.0] },
            CostSpec::Constant { matrix: vec![vec![0.0]] },
            0.5,
            Horizon::Infinite,
            TerminalSpec::Zero,
        )
        .unwrap_err();
        assert_eq!(err.path(), "/dynamics/0/a");
        assert!(p.with_horizon(Horizon::Finite { t: 0.0 }).is_err());
        let power_ou = SwitchingProblem::new(
            vec![DriftDiffusion::Ou { a: 1.0, mean: 0.0, sigma: 1.0 }],
            RewardSpec { psi: vec![Psi::Power { p: 0.5 }], phi: vec![Phi::Zero] },
            AmbiguitySpec { kappa: vec![0.0] },
            CostSpec::Constant { matrix: vec![vec![0.0]] },
            0.5,
            Horizon::Infinite,
            TerminalSpec::Zero,
        );
        assert!(power_ou.is_err());
    }

    #[test]
    fn custom_grid_terminal_interpolates() {
        let g = TerminalSpec::CustomGrid { x: vec![0.0, 1.0, 3.0], values: vec![vec![0.0, 2.0, 2.0]] };
        assert_eq!(g.eval(0, 0.5), (1.0, 2.0, 0.0));
        assert_eq!(g.value(0, -1.0), 0.0);
        assert_eq!(g.value(0, 10.0), 2.0);
        assert_eq!(g.value(0, 2.0), 2.0);
    }
}
