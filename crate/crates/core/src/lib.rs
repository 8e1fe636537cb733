//! Optimal switching under drift ambiguity.
//!
//! A controlled one-dimensional diffusion moves between regimes; the agent
//! maximises discounted running reward minus switching costs against the
//! worst drift distortion `θ ∈ [-κ_i, κ_i]`. Three routes compute the value:
//!
//! - [`pde`]: Picard obstacle iteration on the coupled variational inequalities;
//! - [`closed_form`]: the fund-selection classification and the buy-low
//!   sell-high smooth-fit system;
//! - [`sim`]: Monte Carlo estimation of the objective of a given strategy.

pub mod closed_form;
pub mod grid;
pub mod model;
pub mod pde;
pub mod schema;
pub mod sim;
pub mod validate;

pub use grid::{default_grid, Grid1D, GridScale};
pub use model::{
    sigma_support, AmbiguitySpec, CostSpec, DriftDiffusion, Horizon, Phi, Psi, RewardSpec, SwitchingProblem,
    TerminalSpec,
};
