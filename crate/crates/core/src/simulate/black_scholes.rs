//! Closed-form Black–Scholes call, used as a validation oracle.

use super::rng::normal_cdf;

/// European call `S Φ(d₁) − K e^{−r τ} Φ(d₂)`.
///
/// Degenerate inputs fall back to their limits: zero tenor gives the payoff,
/// zero volatility the discounted forward intrinsic value.
pub fn closed_form_bs(spot: f64, strike: f64, rate: f64, sigma: f64, tenor: f64) -> f64 {
    if tenor <= 0.0 {
        return (spot - strike).max(0.0);
    }
    let df = (-rate * tenor).exp();
    let vol = sigma * tenor.sqrt();
    if vol <= 0.0 || spot <= 0.0 {
        return (spot - strike * df).max(0.0);
    }
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * tenor) / vol;
    let d2 = d1 - vol;
    spot * normal_cdf(d1) - strike * df * normal_cdf(d2)
}
