//! Threshold jump detection and moment estimates of the model parameters.
//!
//! A return whose magnitude exceeds `epsilon` is classified as a jump and the
//! jump returns are taken directly as draws of the log jump size `ln y`. Drift
//! and volatility come from the full return sample, the jump intensity from
//! the jump count per year.

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;

/// Default threshold on the absolute daily log-return.
pub const DEFAULT_EPSILON: f64 = 0.07;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpThresholdConfig {
    pub epsilon: f64,
}

impl Default for JumpThresholdConfig {
    fn default() -> Self {
        JumpThresholdConfig {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl JumpThresholdConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "threshold must be positive"));
        }
        Ok(JumpThresholdConfig { epsilon })
    }
}

/// Indices of returns classified as jumps and as diffusion moves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JumpPartition {
    pub jumps: Vec<usize>,
    pub diffusion: Vec<usize>,
}

/// Parameters of the jump-diffusion component.
///
/// `mu_j` and `delta_j` are `None` when no jump was observed; in that case
/// `lambda` and `k` are exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDiffusionEstimate {
    pub mu_d: f64,
    pub sigma_d: f64,
    /// Jumps per year.
    pub lambda: f64,
    /// Expected relative jump size `E[y] - 1`.
    pub k: f64,
    pub mu_j: Option<f64>,
    pub delta_j: Option<f64>,
    pub jump_count: usize,
}

impl JumpDiffusionEstimate {
    /// `k = exp(mu_j + delta_j^2 / 2) - 1`.
    pub fn expected_jump(mu_j: f64, delta_j: f64) -> f64 {
        (mu_j + 0.5 * delta_j * delta_j).exp_m1()
    }

    /// Log jump-size mean and deviation used for simulation. When only `k` is
    /// known the jump size is taken as deterministic, `ln y = ln(1 + k)`.
    pub fn jump_law(&self) -> (f64, f64) {
        match (self.mu_j, self.delta_j) {
            (Some(m), Some(d)) => (m, d),
            (Some(m), None) => (m, 0.0),
            _ => (self.k.ln_1p(), 0.0),
        }
    }
}

/// Parameters of the geometric sentiment process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentEstimate {
    pub mu_p: f64,
    pub sigma_p: f64,
}

/// Splits return indices at `|r| > epsilon`.
pub fn detect_jumps(returns: &ReturnSeries, cfg: JumpThresholdConfig) -> JumpPartition {
    let mut out = JumpPartition::default();
    for (i, r) in returns.returns.iter().enumerate() {
        if r.abs() > cfg.epsilon {
            out.jumps.push(i);
        } else {
            out.diffusion.push(i);
        }
    }
    out
}

/// Sample mean and standard deviation (`n - 1` denominator). A single value
/// has deviation zero.
pub(crate) fn mean_std(x: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = x.clone().count();
    let mean = x.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = x.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Estimates drift, volatility and jump parameters from a return series.
pub fn estimate_jump_diffusion(
    returns: &ReturnSeries,
    cfg: JumpThresholdConfig,
) -> Result<JumpDiffusionEstimate> {
    let n = returns.returns.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let part = detect_jumps(returns, cfg);
    if part.diffusion.is_empty() {
        return Err(Error::ThresholdTooSmall);
    }
    let (mu_d, sigma_d) = mean_std(returns.returns.iter().copied());
    let jump_count = part.jumps.len();
    let (k, mu_j, delta_j) = if jump_count == 0 {
        (0.0, None, None)
    } else {
        let (m, d) = mean_std(part.jumps.iter().map(|&i| returns.returns[i]));
        (JumpDiffusionEstimate::expected_jump(m, d), Some(m), Some(d))
    };
    Ok(JumpDiffusionEstimate {
        mu_d,
        sigma_d,
        lambda: jump_count as f64 / returns.period_years,
        k,
        mu_j,
        delta_j,
        jump_count,
    })
}

/// Mean and standard deviation of the sentiment log-returns.
pub fn estimate_sentiment(returns: &ReturnSeries) -> Result<SentimentEstimate> {
    let n = returns.returns.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (mu_p, sigma_p) = mean_std(returns.returns.iter().copied());
    Ok(SentimentEstimate { mu_p, sigma_p })
}
