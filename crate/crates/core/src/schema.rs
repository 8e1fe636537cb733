//! JSON problem documents.
//!
//! ```json
//! {
//!   "regimes": 2,
//!   "dynamics": [{"type": "gbm", "b": 0.03, "sigma": 0.1}, {"type": "gbm", "b": 0.07, "sigma": 0.3}],
//!   "reward": {"type": "power", "p": 0.5},
//!   "phi": {"type": "zero"},
//!   "kappa": [0.0, 0.05],
//!   "costs": {"type": "constant", "matrix": [[0, 30000], [-1000, 0]]},
//!   "discount": 0.03,
//!   "horizon": {"type": "infinite"},
//!   "terminal": {"type": "constant", "values": [-1000, 0]}
//! }
//! ```
//!
//! `reward` and `phi` take either one object for all regimes or an array with
//! one object per regime. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::model::{
    AmbiguitySpec, CostSpec, DriftDiffusion, Horizon, ModelError, Phi, Psi, RewardSpec, SwitchingProblem, TerminalSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerRegime<T> {
    Each(Vec<T>),
    One(T),
}

impl<T: Clone> PerRegime<T> {
    fn expand(&self, n: usize, path: &str) -> Result<Vec<T>, ModelError> {
        match self {
            PerRegime::One(v) => Ok(vec![v.clone(); n]),
            PerRegime::Each(v) if v.len() == n => Ok(v.clone()),
            PerRegime::Each(v) => Err(ModelError::invalid(path, format!("expected {n} entries, found {}", v.len()))),
        }
    }
}

fn zero_phi() -> PerRegime<Phi> {
    PerRegime::One(Phi::Zero)
}

fn zero_terminal() -> TerminalSpec {
    TerminalSpec::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub regimes: usize,
    pub dynamics: Vec<DriftDiffusion>,
    pub reward: PerRegime<Psi>,
    #[serde(default = "zero_phi")]
    pub phi: PerRegime<Phi>,
    pub kappa: Vec<f64>,
    pub costs: CostSpec,
    pub discount: f64,
    pub horizon: Horizon,
    #[serde(default = "zero_terminal")]
    pub terminal: TerminalSpec,
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<SwitchingProblem, ModelError> {
        let n = self.regimes;
        if n == 0 {
            return Err(ModelError::invalid("/regimes", "must be >= 1"));
        }
        if self.dynamics.len() != n {
            return Err(ModelError::invalid(
                "/dynamics",
                format!("expected {n} entries, found {}", self.dynamics.len()),
            ));
        }
        let psi = self.reward.expand(n, "/reward")?;
        let phi = self.phi.expand(n, "/phi")?;
        SwitchingProblem::new(
            self.dynamics.clone(),
            RewardSpec { psi, phi },
            AmbiguitySpec { kappa: self.kappa.clone() },
            self.costs.clone(),
            self.discount,
            self.horizon,
            self.terminal.clone(),
        )
    }

    pub fn from_problem(problem: &SwitchingProblem) -> Self {
        ProblemFile {
            regimes: problem.regime_count(),
            dynamics: problem.dynamics().to_vec(),
            reward: PerRegime::Each(problem.reward().psi.clone()),
            phi: PerRegime::Each(problem.reward().phi.clone()),
            kappa: problem.ambiguity().kappa.clone(),
            costs: problem.costs().clone(),
            discount: problem.discount(),
            horizon: problem.horizon(),
            terminal: problem.terminal().clone(),
        }
    }
}
