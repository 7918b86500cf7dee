//! Market model, deterministic sentiment policies and the normalized pricing
//! PDE.
//!
//! In calendar time `t'` and dollars `S'` the price of a call solves
//!
//! ```text
//! V_t' + ½ σ*² S'² V_S'S' + η S' V_S' − r V = β(S')
//! σ*² = σ_d² P̄,  η = r + (μ_d − λk) P̄,  β(S') = −(μ_d − λk) S' P̄
//! ```
//!
//! where `P̄` is the sentiment level at `t' − τ`. With `t = (T − t')/T` and
//! `s = S'/S_max`, and value measured in units of `S_max`, this becomes
//!
//! ```text
//! (1/T) V_t − ½ σ*² s² V_ss − η s V_s + r V + β(s) = 0
//! V(0, s) = max(s − κ, 0),  V(t, 0) = 0,  V(t, 1) = 1 − κ,  κ = E / S_max.
//! ```
//!
//! Since `β` is linear in the price, dividing the dollar equation by `S_max`
//! leaves it unchanged in form with `β(s) = −(μ_d − λk) s P̄`.

use crate::error::{Error, Result};
use crate::estimation::{JumpDiffusionEstimate, SentimentEstimate};

/// Everything needed to price one contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketModel {
    pub jd: JumpDiffusionEstimate,
    pub sp: SentimentEstimate,
    /// Initial sentiment level, held constant on `[−τ, 0]`.
    pub phi0: f64,
    /// Delay with which sentiment enters the price dynamics, in years.
    pub tau: f64,
    pub rate: f64,
    pub strike: f64,
    pub s_max: f64,
    pub maturity: f64,
}

impl MarketModel {
    /// Checks the contract invariants.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        positive("phi0", self.phi0)?;
        positive("strike", self.strike)?;
        positive("s_max", self.s_max)?;
        positive("maturity", self.maturity)?;
        if self.strike >= self.s_max {
            return Err(Error::invalid(
                "strike",
                format!("strike {} must be below s_max {}", self.strike, self.s_max),
            ));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::invalid("tau", "delay must be non-negative"));
        }
        if !(self.jd.sigma_d >= 0.0) || !(self.jd.lambda >= 0.0) || !(self.sp.sigma_p >= 0.0) {
            return Err(Error::invalid(
                "volatility",
                "sigma_d, sigma_p and lambda must be non-negative",
            ));
        }
        Ok(())
    }

    /// `κ = E / S_max`.
    pub fn strike_ratio(&self) -> f64 {
        self.strike / self.s_max
    }

    /// Jump-compensated drift `μ_d − λk`.
    pub fn compensated_drift(&self) -> f64 {
        self.jd.mu_d - self.jd.lambda * self.jd.k
    }
}

/// How the stochastic sentiment level is replaced by a deterministic path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SentimentPathPolicy {
    /// `P̄ ≡ φ(0)`.
    Frozen,
    /// `P̄(t) = E[P_t] = φ(0) exp(μ_p t)` for `t ≥ 0`, `φ(0)` before.
    #[default]
    MeanPath,
}

impl std::str::FromStr for SentimentPathPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "frozen" => Ok(SentimentPathPolicy::Frozen),
            "mean-path" | "mean_path" | "meanpath" => Ok(SentimentPathPolicy::MeanPath),
            other => Err(format!(
                "unknown policy '{other}' (expected frozen or mean-path)"
            )),
        }
    }
}

impl std::fmt::Display for SentimentPathPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SentimentPathPolicy::Frozen => "frozen",
            SentimentPathPolicy::MeanPath => "mean-path",
        })
    }
}

/// Deterministic delayed sentiment level `P̄(t' − τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentCurve {
    pub phi0: f64,
    pub mu_p: f64,
    pub tau: f64,
    pub policy: SentimentPathPolicy,
}

impl SentimentCurve {
    pub fn constant(level: f64) -> Self {
        SentimentCurve {
            phi0: level,
            mu_p: 0.0,
            tau: 0.0,
            policy: SentimentPathPolicy::Frozen,
        }
    }

    fn growth(&self) -> f64 {
        match self.policy {
            SentimentPathPolicy::Frozen => 0.0,
            SentimentPathPolicy::MeanPath => self.mu_p,
        }
    }

    /// Level at calendar time `t_cal`.
    pub fn level(&self, t_cal: f64) -> f64 {
        let lag = (t_cal - self.tau).max(0.0);
        match self.policy {
            SentimentPathPolicy::Frozen => self.phi0,
            SentimentPathPolicy::MeanPath => self.phi0 * (self.mu_p * lag).exp(),
        }
    }

    /// `∫_a^b P̄(u) du` in closed form.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return -self.integral(b, a);
        }
        let g = self.growth();
        let flat_end = b.min(self.tau);
        let flat = (flat_end - a).max(0.0) * self.phi0;
        let lo = a.max(self.tau);
        if b <= lo {
            return flat;
        }
        let len = b - lo;
        let rising = if g == 0.0 {
            self.phi0 * len
        } else {
            self.phi0 * (g * (lo - self.tau)).exp() * (g * len).exp_m1() / g
        };
        flat + rising
    }
}

/// Treatment of the upper edge `s = 1` of the truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpperBoundary {
    /// `V(t, 1) = 1 − κ` at every time.
    #[default]
    Fixed,
    /// `V(t, 1) = 1 − κ e^{−rTt}`, the discounted intrinsic value. Matches the
    /// large-price asymptote of the homogeneous equation.
    DiscountedIntrinsic,
}

/// Normalized pricing problem on the unit square.
///
/// Coefficient accessors take calendar time; use [`PdeProblem::calendar_time`]
/// to convert from the normalized `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeProblem {
    pub rate: f64,
    pub maturity: f64,
    pub strike_ratio: f64,
    /// `σ_d²`, multiplied by `P̄` to give `σ*²`.
    pub sigma_d_sq: f64,
    /// `μ_d − λk`, multiplied by `P̄` in both `η` and `β`.
    pub drift: f64,
    pub sentiment: SentimentCurve,
    pub upper: UpperBoundary,
}

impl PdeProblem {
    /// Constant-coefficient homogeneous problem: `σ*² = sigma²`, `η = r`,
    /// `β = 0`.
    pub fn black_scholes(sigma: f64, rate: f64, maturity: f64, strike_ratio: f64) -> Self {
        PdeProblem {
            rate,
            maturity,
            strike_ratio,
            sigma_d_sq: sigma * sigma,
            drift: 0.0,
            sentiment: SentimentCurve::constant(1.0),
            upper: UpperBoundary::Fixed,
        }
    }

    pub fn with_upper(mut self, upper: UpperBoundary) -> Self {
        self.upper = upper;
        self
    }

    /// Calendar time of normalized time `t`: `T (1 − t)`.
    pub fn calendar_time(&self, t_norm: f64) -> f64 {
        self.maturity * (1.0 - t_norm)
    }

    pub fn sentiment_at(&self, t_cal: f64) -> f64 {
        self.sentiment.level(t_cal)
    }

    /// `σ*² = σ_d² P̄`.
    pub fn sigma_star_sq(&self, t_cal: f64) -> f64 {
        self.sigma_d_sq * self.sentiment_at(t_cal)
    }

    /// `η = r + (μ_d − λk) P̄`.
    pub fn eta(&self, t_cal: f64) -> f64 {
        self.rate + self.drift * self.sentiment_at(t_cal)
    }

    /// Slope of the source term, `β(s) = beta_slope · s`.
    pub fn beta_slope(&self, t_cal: f64) -> f64 {
        -self.drift * self.sentiment_at(t_cal)
    }

    /// `β(s) = −(μ_d − λk) s P̄`.
    pub fn beta(&self, t_cal: f64, s: f64) -> f64 {
        self.beta_slope(t_cal) * s
    }

    /// Payoff at expiry, `max(s − κ, 0)`.
    pub fn initial_condition(&self, s: f64) -> f64 {
        (s - self.strike_ratio).max(0.0)
    }

    /// Value prescribed at `s = 1`.
    pub fn upper_boundary(&self, t_norm: f64) -> f64 {
        match self.upper {
            UpperBoundary::Fixed => 1.0 - self.strike_ratio,
            UpperBoundary::DiscountedIntrinsic => {
                1.0 - self.strike_ratio * (-self.rate * self.maturity * t_norm).exp()
            }
        }
    }
}

/// Deterministic sentiment level used in place of `P_{t − τ}`.
pub fn sentiment_level(model: &MarketModel, policy: SentimentPathPolicy, t_calendar: f64) -> f64 {
    curve(model, policy).level(t_calendar)
}

fn curve(model: &MarketModel, policy: SentimentPathPolicy) -> SentimentCurve {
    SentimentCurve {
        phi0: model.phi0,
        mu_p: model.sp.mu_p,
        tau: model.tau,
        policy,
    }
}

fn pde_with_drift(
    model: &MarketModel,
    policy: SentimentPathPolicy,
    drift: f64,
) -> Result<PdeProblem> {
    model.validate()?;
    if model.jd.sigma_d == 0.0 {
        return Err(Error::DegenerateDiffusion);
    }
    Ok(PdeProblem {
        rate: model.rate,
        maturity: model.maturity,
        strike_ratio: model.strike_ratio(),
        sigma_d_sq: model.jd.sigma_d * model.jd.sigma_d,
        drift,
        sentiment: curve(model, policy),
        upper: UpperBoundary::Fixed,
    })
}

/// Builds the jump-model PDE.
pub fn build_pde(model: &MarketModel, policy: SentimentPathPolicy) -> Result<PdeProblem> {
    pde_with_drift(model, policy, model.compensated_drift())
}

/// Builds the Black–Scholes reduction: same volatility, `η = r`, `β = 0`.
pub fn build_bs_pde(model: &MarketModel, policy: SentimentPathPolicy) -> Result<PdeProblem> {
    pde_with_drift(model, policy, 0.0)
}

/// Maps calendar time and dollar price to the unit square.
pub fn transform(t_calendar: f64, s_dollars: f64, model: &MarketModel) -> Result<(f64, f64)> {
    check_range("t_calendar", t_calendar, 0.0, model.maturity)?;
    check_range("s_dollars", s_dollars, 0.0, model.s_max)?;
    Ok((
        (model.maturity - t_calendar) / model.maturity,
        s_dollars / model.s_max,
    ))
}

/// Inverse of [`transform`].
pub fn inverse_transform(t: f64, s: f64, model: &MarketModel) -> Result<(f64, f64)> {
    check_range("t", t, 0.0, 1.0)?;
    check_range("s", s, 0.0, 1.0)?;
    Ok((model.maturity * (1.0 - t), s * model.s_max))
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            lo,
            hi,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Bitcoin parameter set shared by the tests.
    pub fn btc_model() -> MarketModel {
        MarketModel {
            jd: JumpDiffusionEstimate {
                mu_d: -0.00241,
                sigma_d: 0.04132,
                lambda: 31.8,
                k: -0.002195,
                mu_j: None,
                delta_j: None,
                jump_count: 159,
            },
            sp: SentimentEstimate {
                mu_p: 0.01033,
                sigma_p: 0.20934,
            },
            phi0: 0.01,
            tau: 0.0,
            rate: 0.04,
            strike: 30000.0,
            s_max: 63577.0,
            maturity: 5.0,
        }
    }

    #[test]
    fn sentiment_policies() {
        let m = btc_model();
        assert_eq!(sentiment_level(&m, SentimentPathPolicy::Frozen, 3.0), 0.01);
        let v = sentiment_level(&m, SentimentPathPolicy::MeanPath, 1.0);
        assert!((v - 0.010_103_835_4).abs() < 1e-10, "{v}");

        let mut flat = m;
        flat.sp.mu_p = 0.0;
        assert_eq!(
            sentiment_level(&flat, SentimentPathPolicy::MeanPath, 4.0),
            0.01
        );

        let mut delayed = m;
        delayed.tau = 0.5;
        for t in [-0.5, 0.0, 0.25, 0.5] {
            assert_eq!(
                sentiment_level(&delayed, SentimentPathPolicy::MeanPath, t),
                sentiment_level(&delayed, SentimentPathPolicy::Frozen, t)
            );
        }
    }

    #[test]
    fn sentiment_integral_matches_quadrature() {
        let c = SentimentCurve {
            phi0: 0.3,
            mu_p: 0.7,
            tau: 0.4,
            policy: SentimentPathPolicy::MeanPath,
        };
        for (a, b) in [(0.0, 0.2), (0.1, 0.9), (0.5, 2.0), (-0.3, 1.0)] {
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut q = 0.0;
            for i in 0..n {
                let u = a + (i as f64 + 0.5) * h;
                q += c.level(u) * h;
            }
            assert!((c.integral(a, b) - q).abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn reduction_when_drift_is_compensated() {
        let mut m = btc_model();
        m.jd.mu_d = m.jd.lambda * m.jd.k;
        let p = build_pde(&m, SentimentPathPolicy::MeanPath).unwrap();
        for t in [0.0, 1.3, 5.0] {
            assert_eq!(p.eta(t), m.rate);
            assert_eq!(p.beta(t, 0.7), 0.0);
        }
    }

    #[test]
    fn frozen_volatility_and_zero_source_at_origin() {
        let m = btc_model();
        let p = build_pde(&m, SentimentPathPolicy::Frozen).unwrap();
        assert_eq!(p.sigma_star_sq(2.0), 0.04132 * 0.04132 * 0.01);
        for t in [0.0, 2.5, 5.0] {
            assert_eq!(p.beta(t, 0.0), 0.0);
        }
    }

    #[test]
    fn degenerate_and_invalid_models() {
        let mut m = btc_model();
        m.jd.sigma_d = 0.0;
        assert!(matches!(
            build_pde(&m, SentimentPathPolicy::Frozen),
            Err(Error::DegenerateDiffusion)
        ));
        let mut m = btc_model();
        m.strike = m.s_max;
        assert!(build_pde(&m, SentimentPathPolicy::Frozen).is_err());
    }

    #[test]
    fn transform_examples() {
        let m = btc_model();
        assert_eq!(transform(5.0, 0.0, &m).unwrap(), (0.0, 0.0));
        assert_eq!(transform(0.0, 63577.0, &m).unwrap(), (1.0, 1.0));
        assert_eq!(transform(2.5, 63577.0 / 4.0, &m).unwrap(), (0.5, 0.25));
        assert!(transform(5.1, 1.0, &m).is_err());
        assert!(inverse_transform(0.5, 1.2, &m).is_err());
    }

    #[test]
    fn discounted_upper_boundary() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5)
            .with_upper(UpperBoundary::DiscountedIntrinsic);
        assert_eq!(p.upper_boundary(0.0), 0.5);
        assert!((p.upper_boundary(1.0) - (1.0 - 0.5 * (-0.05f64).exp())).abs() < 1e-16);
    }
}
