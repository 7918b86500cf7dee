//! The constrained trial function and its derivatives.

use crate::error::{Error, Result};
use crate::neural::{eval, EvalResult, NetworkArchitecture, NetworkParams};

/// Network plus the strike ratio `κ` that fixes the constraint terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction {
    pub arch: NetworkArchitecture,
    pub params: NetworkParams,
    pub strike_ratio: f64,
}

impl TrialFunction {
    pub fn new(
        arch: NetworkArchitecture,
        params: NetworkParams,
        strike_ratio: f64,
    ) -> Result<Self> {
        if !(strike_ratio > 0.0 && strike_ratio < 1.0) {
            return Err(Error::OutOfRange {
                name: "strike_ratio",
                value: strike_ratio,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if params.data.len() != arch.param_count() {
            return Err(Error::invalid(
                "params",
                format!(
                    "expected {} values, got {}",
                    arch.param_count(),
                    params.data.len()
                ),
            ));
        }
        Ok(TrialFunction {
            arch,
            params,
            strike_ratio,
        })
    }
}

/// `ζ` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialDerivatives {
    pub value: f64,
    pub dt: f64,
    pub ds: f64,
    pub dss: f64,
}

/// Constraint factor `B = t s (1 − s)` and its derivatives `(B, B_t, B_s, B_ss)`.
#[inline]
pub(crate) fn b_term(t: f64, s: f64) -> (f64, f64, f64, f64) {
    (
        t * s * (1.0 - s),
        s * (1.0 - s),
        t * (1.0 - 2.0 * s),
        -2.0 * t,
    )
}

/// Assembles `ζ` and its derivatives from a network evaluation. The payoff
/// kink is resolved to the right: at `s = κ` the slope of `max(s − κ, 0)` is 0.
#[inline]
pub(crate) fn assemble(kappa: f64, t: f64, s: f64, net: &EvalResult) -> TrialDerivatives {
    let payoff = (s - kappa).max(0.0);
    let step = if s > kappa { 1.0 } else { 0.0 };
    let a = (1.0 - t) * payoff + t * s * (1.0 - kappa);
    let a_t = -payoff + s * (1.0 - kappa);
    let a_s = (1.0 - t) * step + t * (1.0 - kappa);
    let (b, b_t, b_s, b_ss) = b_term(t, s);
    TrialDerivatives {
        value: a + b * net.n,
        dt: a_t + b_t * net.n + b * net.dn_dt,
        ds: a_s + b_s * net.n + b * net.dn_ds,
        dss: b_ss * net.n + 2.0 * b_s * net.dn_ds + b * net.d2n_ds2,
    }
}

/// Normalized option value `ζ(t, s)`.
pub fn trial_eval(tf: &TrialFunction, t: f64, s: f64) -> f64 {
    trial_derivatives(tf, t, s).value
}

/// `ζ`, `ζ_t`, `ζ_s` and `ζ_ss` at `(t, s)`.
pub fn trial_derivatives(tf: &TrialFunction, t: f64, s: f64) -> TrialDerivatives {
    let net = eval(&tf.arch, &tf.params, t, s);
    assemble(tf.strike_ratio, t, s, &net)
}
