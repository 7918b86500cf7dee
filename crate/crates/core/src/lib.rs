//! Option pricing under a jump-diffusion asset whose drift and variance are
//! scaled by a delayed sentiment factor.
//!
//! The crate covers the whole pipeline:
//!
//! - [`market_data`]: CSV ingestion, log-returns and descriptive statistics.
//! - [`estimation`]: threshold jump detection and moment estimates.
//! - [`model`]: the market model, deterministic sentiment policies and the
//!   normalized pricing PDE.
//! - [`simulate`]: path simulation, a Feynman–Kac Monte Carlo pricer and the
//!   closed-form Black–Scholes call.
//! - [`fd`]: a Crank–Nicolson reference solver.
//! - [`neural`]: a small feed-forward network with exact input derivatives and
//!   parameter gradients.
//! - [`pinn`]: the trial-solution method and its training loop.
//! - [`pricing`]: dollar surfaces, spot quotes, model comparisons and delay
//!   sweeps.
//!
//! All prices inside the solvers live on the unit square: `t` is the fraction
//! of the contract life remaining (0 at expiry) and `s = S / S_max`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod fd;
pub mod market_data;
pub mod model;
pub mod neural;
pub mod pinn;
pub mod pricing;
pub mod simulate;

pub use error::{Error, Result};
