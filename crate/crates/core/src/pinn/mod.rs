//! Trial-solution method for the normalized pricing PDE.
//!
//! The trial function
//!
//! ```text
//! ζ(t, s) = (1 − t) max(s − κ, 0) + t s (1 − κ) + t s (1 − s) N(t, s; θ)
//! ```
//!
//! meets the initial condition and both boundary conditions for every `θ`,
//! so training only has to drive the PDE residual to zero at the collocation
//! points. Separate boundary and terminal penalty terms would vanish
//! identically and are not computed.

mod grid;
mod loss;
mod optim;
mod train;
mod trial;

pub use grid::{make_grid, CollocationGrid};
pub use loss::{loss, loss_and_gradient, residual, LossMetrics};
pub use optim::{Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use train::{train, Batch, Checkpoint, Split, StopReason, TrainConfig, TrainReport};
pub use trial::{trial_derivatives, trial_eval, TrialDerivatives, TrialFunction};
