//! Sample paths of the sentiment factor and of the sentiment-driven
//! jump-diffusion.
//!
//! Time is measured in the units the model parameters are quoted in. The
//! delayed level `P_{t−τ}` is read from the simulated sentiment path at the
//! grid point `round(τ/Δt)` steps back, and equals `φ(0)` before time zero.

use std::io::Write;

use rand::RngCore;

use super::rng::{derive_seed, exponential, path_stream, standard_normal};
use crate::error::{Error, Result};
use crate::estimation::SentimentEstimate;
use crate::model::MarketModel;

const JUMP_STREAM_LABEL: u64 = 0x6a75_6d70;

/// Discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Euler–Maruyama with one Bernoulli(λΔt) jump trial per step.
    Euler,
    /// Lognormal increments and exponential jump inter-arrival times.
    #[default]
    Exact,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "exact" => Ok(Scheme::Exact),
            other => Err(format!(
                "unknown scheme '{other}' (expected euler or exact)"
            )),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Euler => "euler",
            Scheme::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl PathConfig {
    fn check(&self) -> Result<f64> {
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "at least one step is required"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        Ok(self.horizon / self.n_steps as f64)
    }
}

/// One simulated trajectory. `s_values` is empty for sentiment-only paths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub jump_times: Vec<f64>,
}

impl SamplePath {
    /// Writes `t,s,p` rows. Missing price values are left blank.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,s,p")?;
        for (i, t) in self.times.iter().enumerate() {
            match self.s_values.get(i) {
                Some(s) => writeln!(out, "{t},{s},{}", self.p_values[i])?,
                None => writeln!(out, "{t},,{}", self.p_values[i])?,
            }
        }
        Ok(())
    }
}

fn sentiment_step<R: RngCore + ?Sized>(
    p: f64,
    sp: &SentimentEstimate,
    dt: f64,
    scheme: Scheme,
    rng: &mut R,
    time: f64,
) -> Result<f64> {
    let z = standard_normal(rng);
    let next = match scheme {
        Scheme::Exact => {
            p * ((sp.mu_p - 0.5 * sp.sigma_p * sp.sigma_p) * dt + sp.sigma_p * dt.sqrt() * z).exp()
        }
        Scheme::Euler => p * (1.0 + sp.mu_p * dt + sp.sigma_p * dt.sqrt() * z),
    };
    if next > 0.0 {
        Ok(next)
    } else {
        Err(Error::PositivityViolation { time })
    }
}

/// Sentiment path `P` started at `φ(0)`, using stream 0 of `cfg.seed`.
pub fn simulate_sentiment(
    sp: &SentimentEstimate,
    phi0: f64,
    cfg: &PathConfig,
) -> Result<SamplePath> {
    simulate_sentiment_with(sp, phi0, cfg, &mut path_stream(cfg.seed, 0))
}

/// Sentiment path drawing from a caller-supplied generator.
pub fn simulate_sentiment_with<R: RngCore + ?Sized>(
    sp: &SentimentEstimate,
    phi0: f64,
    cfg: &PathConfig,
    rng: &mut R,
) -> Result<SamplePath> {
    let dt = cfg.check()?;
    if !(phi0 > 0.0) {
        return Err(Error::invalid("phi0", "must be positive"));
    }
    let mut path = SamplePath {
        times: Vec::with_capacity(cfg.n_steps + 1),
        p_values: Vec::with_capacity(cfg.n_steps + 1),
        ..Default::default()
    };
    let mut p = phi0;
    path.times.push(0.0);
    path.p_values.push(p);
    for k in 0..cfg.n_steps {
        let t1 = (k + 1) as f64 * dt;
        p = sentiment_step(p, sp, dt, cfg.scheme, rng, t1)?;
        path.times.push(t1);
        path.p_values.push(p);
    }
    Ok(path)
}

/// Joint path of price and sentiment started at `s0`, path index 0.
pub fn simulate_jump_diffusion(
    model: &MarketModel,
    s0: f64,
    cfg: &PathConfig,
) -> Result<SamplePath> {
    simulate_jump_diffusion_indexed(model, s0, cfg, 0)
}

/// Joint path number `index` of the run seeded by `cfg.seed`.
pub fn simulate_jump_diffusion_indexed(
    model: &MarketModel,
    s0: f64,
    cfg: &PathConfig,
    index: u64,
) -> Result<SamplePath> {
    let dt = cfg.check()?;
    if !(s0 > 0.0) {
        return Err(Error::invalid("s0", "must be positive"));
    }
    let mut rng = path_stream(cfg.seed, index);
    let mut jump_rng = path_stream(derive_seed(cfg.seed, JUMP_STREAM_LABEL), index);
    let sentiment = simulate_sentiment_with(&model.sp, model.phi0, cfg, &mut rng)?;

    let jd = &model.jd;
    let (mu_j, delta_j) = jd.jump_law();
    let drift = model.compensated_drift();
    let var = jd.sigma_d * jd.sigma_d;
    let lag = (model.tau / dt).round() as usize;
    let lagged = |k: usize| {
        if k >= lag {
            sentiment.p_values[k - lag]
        } else {
            model.phi0
        }
    };

    let mut path = SamplePath {
        times: sentiment.times.clone(),
        s_values: Vec::with_capacity(cfg.n_steps + 1),
        p_values: sentiment.p_values.clone(),
        jump_times: Vec::new(),
    };
    let mut s = s0;
    path.s_values.push(s);

    let mut next_jump = if jd.lambda > 0.0 && cfg.scheme == Scheme::Exact {
        exponential(&mut jump_rng, jd.lambda)
    } else {
        f64::INFINITY
    };

    for k in 0..cfg.n_steps {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        let p = lagged(k);
        let z = standard_normal(&mut rng);
        match cfg.scheme {
            Scheme::Exact => {
                s *= ((drift - 0.5 * var) * p * dt + (var * p * dt).sqrt() * z).exp();
                while next_jump <= t1 {
                    let y = (mu_j + delta_j * standard_normal(&mut jump_rng)).exp();
                    let factor = 1.0 + p * (y - 1.0);
                    if !(factor > 0.0) {
                        return Err(Error::PositivityViolation { time: next_jump });
                    }
                    s *= factor;
                    path.jump_times.push(next_jump);
                    next_jump += exponential(&mut jump_rng, jd.lambda);
                }
            }
            Scheme::Euler => {
                s *= 1.0 + drift * p * dt + (var * p * dt).sqrt() * z;
                if !(s > 0.0) {
                    return Err(Error::PositivityViolation { time: t1 });
                }
                let u = super::rng::uniform_open(&mut jump_rng);
                if u < jd.lambda * dt {
                    let y = (mu_j + delta_j * standard_normal(&mut jump_rng)).exp();
                    let factor = 1.0 + p * (y - 1.0);
                    if !(factor > 0.0) {
                        return Err(Error::PositivityViolation { time: t0 });
                    }
                    s *= factor;
                    path.jump_times.push(t0);
                }
            }
        }
        path.s_values.push(s);
    }
    Ok(path)
}
