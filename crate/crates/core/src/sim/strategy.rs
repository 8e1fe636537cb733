//! Switching strategies and prior policies driving a simulation.

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::SwitchingProblem;
use crate::pde::ValueSurface;

/// Decides, at `(t, x)` in a regime, whether to switch and where to.
pub trait Strategy: Sync {
    fn initial_regime(&self) -> usize;
    fn decide(&self, t: f64, x: f64, regime: usize) -> Option<usize>;
    /// Checks the strategy against a problem before simulating.
    fn check(&self, problem: &SwitchingProblem) -> Result<(), SimError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Trigger {
    /// Fires when `x ≤ level`.
    Below { level: f64 },
    /// Fires when `x ≥ level`.
    Above { level: f64 },
    /// Fires at every state.
    Always,
}

impl Trigger {
    #[inline]
    pub fn fires(&self, x: f64) -> bool {
        match *self {
            Trigger::Below { level } => x <= level,
            Trigger::Above { level } => x >= level,
            Trigger::Always => true,
        }
    }

    fn overlaps(&self, other: &Trigger) -> bool {
        use Trigger::*;
        match (*self, *other) {
            (Always, _) | (_, Always) | (Below { .. }, Below { .. }) | (Above { .. }, Above { .. }) => true,
            (Below { level: lo }, Above { level: hi }) | (Above { level: hi }, Below { level: lo }) => hi <= lo,
        }
    }

    fn level(&self) -> Option<f64> {
        match *self {
            Trigger::Below { level } | Trigger::Above { level } => Some(level),
            Trigger::Always => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchRule {
    pub trigger: Trigger,
    pub target: usize,
}

/// Per-regime threshold rules. Regimes are indexed from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdStrategy {
    pub rules: Vec<Vec<SwitchRule>>,
    pub initial_regime: usize,
}

impl ThresholdStrategy {
    /// Validates that triggers within a regime are disjoint, that targets are
    /// other regimes, and that no state value switches around a cycle.
    pub fn new(rules: Vec<Vec<SwitchRule>>, initial_regime: usize) -> Result<Self, SimError> {
        let n = rules.len();
        if initial_regime >= n {
            return Err(SimError::Strategy(format!("initial regime {initial_regime} out of range")));
        }
        for (i, list) in rules.iter().enumerate() {
            for (a, ra) in list.iter().enumerate() {
                if ra.target >= n || ra.target == i {
                    return Err(SimError::Strategy(format!("regime {i}: invalid target {}", ra.target)));
                }
                if ra.trigger.level().is_some_and(|l| !l.is_finite()) {
                    return Err(SimError::Strategy(format!("regime {i}: non-finite level")));
                }
                for rb in &list[a + 1..] {
                    if ra.trigger.overlaps(&rb.trigger) {
                        return Err(SimError::Strategy(format!("regime {i}: overlapping triggers")));
                    }
                }
            }
        }
        let s = ThresholdStrategy { rules, initial_regime };
        s.check_cycles()?;
        Ok(s)
    }

    /// Never switches.
    pub fn never(regimes: usize, initial_regime: usize) -> Result<Self, SimError> {
        Self::new(vec![Vec::new(); regimes], initial_regime)
    }

    pub fn regime_count(&self) -> usize {
        self.rules.len()
    }

    /// Probe points: every level, its neighbours and both far ends.
    fn probe_points(&self) -> Vec<f64> {
        let mut pts = vec![-1e300, 1e300];
        for t in self.rules.iter().flatten().filter_map(|r| r.trigger.level()) {
            let eps = 1e-9 * (1.0 + t.abs());
            pts.extend([t - eps, t, t + eps]);
        }
        pts
    }

    fn check_cycles(&self) -> Result<(), SimError> {
        let n = self.rules.len();
        for x in self.probe_points() {
            for start in 0..n {
                let mut regime = start;
                for _ in 0..=n {
                    match self.decide(0.0, x, regime) {
                        Some(j) => regime = j,
                        None => break,
                    }
                }
                if self.decide(0.0, x, regime).is_some() {
                    return Err(SimError::ZeroTimeCycle { x, regime: start });
                }
            }
        }
        Ok(())
    }
}

impl Strategy for ThresholdStrategy {
    fn initial_regime(&self) -> usize {
        self.initial_regime
    }

    #[inline]
    fn decide(&self, _t: f64, x: f64, regime: usize) -> Option<usize> {
        self.rules[regime].iter().find(|r| r.trigger.fires(x)).map(|r| r.target)
    }

    fn check(&self, problem: &SwitchingProblem) -> Result<(), SimError> {
        if self.rules.len() != problem.regime_count() {
            return Err(SimError::Strategy(format!(
                "strategy has {} regimes, problem has {}",
                self.rules.len(),
                problem.regime_count()
            )));
        }
        Ok(())
    }
}

/// Switches wherever a solved surface is binding, at the nearest node and
/// the nearest time slice.
#[derive(Debug, Clone)]
pub struct SurfaceStrategy<'a> {
    pub surface: &'a ValueSurface,
    pub initial_regime: usize,
}

impl Strategy for SurfaceStrategy<'_> {
    fn initial_regime(&self) -> usize {
        self.initial_regime
    }

    fn decide(&self, t: f64, x: f64, regime: usize) -> Option<usize> {
        let s = self.surface.slice_at(t);
        let k = self.surface.grid.nearest(x);
        self.surface.switch_mask[s][regime][k].then(|| self.surface.switch_target[s][regime][k])
    }

    fn check(&self, problem: &SwitchingProblem) -> Result<(), SimError> {
        if self.surface.regime_count() != problem.regime_count() || self.initial_regime >= problem.regime_count() {
            return Err(SimError::Strategy("surface does not match the problem".into()));
        }
        Ok(())
    }
}

/// The drift distortion `θ` applied in simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorPolicy<'a> {
    /// One constant per regime.
    Constant { theta: Vec<f64> },
    /// `θ = κ_i sign(φ + σ ∂_x v)` read off a solved surface: the worst case.
    SignOfGradient { surface: &'a ValueSurface },
}

impl PriorPolicy<'_> {
    pub fn zero(regimes: usize) -> Self {
        PriorPolicy::Constant { theta: vec![0.0; regimes] }
    }

    pub fn check(&self, problem: &SwitchingProblem) -> Result<(), SimError> {
        match self {
            PriorPolicy::Constant { theta } => {
                if theta.len() != problem.regime_count() {
                    return Err(SimError::Prior(format!("expected {} values", problem.regime_count())));
                }
                for (i, &t) in theta.iter().enumerate() {
                    if !(t.abs() <= problem.kappa(i) + 1e-15) {
                        return Err(SimError::Prior(format!("|theta| exceeds kappa in regime {i}")));
                    }
                }
                Ok(())
            }
            PriorPolicy::SignOfGradient { surface } => {
                if surface.regime_count() != problem.regime_count() {
                    return Err(SimError::Prior("surface does not match the problem".into()));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn theta(&self, problem: &SwitchingProblem, t: f64, x: f64, regime: usize) -> f64 {
        match self {
            PriorPolicy::Constant { theta } => theta[regime],
            PriorPolicy::SignOfGradient { surface } => {
                let kappa = problem.kappa(regime);
                if kappa == 0.0 {
                    return 0.0;
                }
                let grid = &surface.grid;
                let v = &surface.values[surface.slice_at(t)][regime];
                let (k, _) = grid.locate(x);
                let k = k.min(grid.nx - 2);
                let slope = (v[k + 1] - v[k]) / (grid.point(k + 1) - grid.point(k));
                let z = problem.diffusion(regime, x) * slope;
                problem.sigma_support(regime, x, z).1
            }
        }
    }
}
