//! Path simulation and Monte Carlo pricing.

mod black_scholes;
pub mod feynman_kac;
pub mod paths;
pub mod rng;

pub use black_scholes::closed_form_bs;
pub use feynman_kac::{feynman_kac_price, McConfig, McEstimate, Welford};
pub use paths::{
    simulate_jump_diffusion, simulate_jump_diffusion_indexed, simulate_sentiment,
    simulate_sentiment_with, PathConfig, SamplePath, Scheme,
};
