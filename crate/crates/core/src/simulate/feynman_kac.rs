//! Monte Carlo solution of the normalized pricing PDE through its
//! Feynman–Kac representation.
//!
//! The representing process is the pure diffusion `ds = η s du + σ* s dW`
//! started at calendar time `t0`, killed at `s = 1` where it collects the
//! upper boundary value. The price is
//!
//! ```text
//! V = E[e^{−r(T−t0)} max(s_T − κ, 0) 1{alive}] + E[e^{−r(θ−t0)} g(θ) 1{θ ≤ T}]
//!     − E[∫_{t0}^{θ∧T} e^{−r(u−t0)} β(u, s_u) du]
//! ```
//!
//! Because every coefficient depends on time only, each step uses the exact
//! lognormal increment built from `∫P̄`. Killing inside a step is handled by
//! the Brownian-bridge crossing probability, carried as a survival weight
//! rather than sampled. The source term over a step uses its exact conditional
//! expectation given the step's starting point.

use rayon::prelude::*;

use super::rng::{path_stream, standard_normal};
use crate::error::{Error, Result};
use crate::model::PdeProblem;

/// Minimum number of paths accepted by the pricer.
pub const MIN_PATHS: usize = 100;

/// Paths (or antithetic pairs) per reduction chunk. Fixed so that the result
/// does not depend on the number of worker threads.
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub threads: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 100_000,
            n_steps: 200,
            seed: 42,
            antithetic: false,
            threads: 1,
        }
    }
}

/// Monte Carlo price in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl std::fmt::Display for McEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.value, self.std_error, self.n_paths)
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Per-step quantities shared by all paths.
struct Step {
    mean: f64,
    var: f64,
    /// `e^{a ∫P̄} − 1`, the source integral factor.
    source: f64,
    disc_start: f64,
    /// Discounted boundary value at mid-step, paid on killing.
    rebate: f64,
}

fn schedule(pde: &PdeProblem, t0: f64, n_steps: usize) -> Vec<Step> {
    let h = (pde.maturity - t0) / n_steps as f64;
    (0..n_steps)
        .map(|k| {
            let u0 = t0 + k as f64 * h;
            let u1 = if k + 1 == n_steps {
                pde.maturity
            } else {
                u0 + h
            };
            let ip = pde.sentiment.integral(u0, u1);
            let mid = 0.5 * (u0 + u1);
            let t_norm_mid = (pde.maturity - mid) / pde.maturity;
            Step {
                mean: pde.rate * (u1 - u0) + pde.drift * ip - 0.5 * pde.sigma_d_sq * ip,
                var: pde.sigma_d_sq * ip,
                source: (pde.drift * ip).exp_m1(),
                disc_start: (-pde.rate * (u0 - t0)).exp(),
                rebate: pde.upper_boundary(t_norm_mid) * (-pde.rate * (mid - t0)).exp(),
            }
        })
        .collect()
}

fn path_value(
    steps: &[Step],
    x0: f64,
    kappa: f64,
    disc_end: f64,
    normals: impl Iterator<Item = f64>,
) -> f64 {
    let mut x = x0;
    let mut alive = 1.0;
    let mut acc = 0.0;
    for (step, z) in steps.iter().zip(normals) {
        acc += alive * x.exp() * step.disc_start * step.source;
        let x1 = x + step.mean + step.var.sqrt() * z;
        let hit = if x1 >= 0.0 {
            1.0
        } else if step.var > 0.0 {
            (-2.0 * x * x1 / step.var).exp()
        } else {
            0.0
        };
        acc += alive * hit * step.rebate;
        alive *= 1.0 - hit;
        x = x1;
        if alive == 0.0 {
            return acc;
        }
    }
    acc + alive * disc_end * (x.exp() - kappa).max(0.0)
}

/// Prices the normalized problem at `spot_normalized` and calendar time
/// `t_start`.
pub fn feynman_kac_price(
    pde: &PdeProblem,
    spot_normalized: f64,
    t_start: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.n_paths < MIN_PATHS {
        return Err(Error::InsufficientPaths(cfg.n_paths));
    }
    crate::model::check_range("spot_normalized", spot_normalized, 0.0, 1.0)?;
    crate::model::check_range("t_start", t_start, 0.0, pde.maturity)?;
    if cfg.n_steps == 0 {
        return Err(Error::invalid("n_steps", "at least one step is required"));
    }
    let kappa = pde.strike_ratio;
    let exact = |value: f64| McEstimate {
        value,
        std_error: 0.0,
        n_paths: cfg.n_paths,
    };
    if spot_normalized == 0.0 {
        return Ok(exact(0.0));
    }
    if spot_normalized >= 1.0 {
        let t_norm = (pde.maturity - t_start) / pde.maturity;
        return Ok(exact(pde.upper_boundary(t_norm)));
    }
    if t_start >= pde.maturity {
        return Ok(exact(pde.initial_condition(spot_normalized)));
    }

    let steps = schedule(pde, t_start, cfg.n_steps);
    let disc_end = (-pde.rate * (pde.maturity - t_start)).exp();
    let x0 = spot_normalized.ln();
    let n_samples = if cfg.antithetic {
        cfg.n_paths.div_ceil(2)
    } else {
        cfg.n_paths
    };

    let sample = |i: usize| -> f64 {
        let mut rng = path_stream(cfg.seed, i as u64);
        if cfg.antithetic {
            let z: Vec<f64> = (0..steps.len())
                .map(|_| standard_normal(&mut rng))
                .collect();
            let a = path_value(&steps, x0, kappa, disc_end, z.iter().copied());
            let b = path_value(&steps, x0, kappa, disc_end, z.iter().map(|v| -v));
            0.5 * (a + b)
        } else {
            path_value(
                &steps,
                x0,
                kappa,
                disc_end,
                std::iter::repeat_with(|| standard_normal(&mut rng)),
            )
        }
    };
    let chunk = |c: usize| -> Welford {
        let mut w = Welford::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
            w.push(sample(i));
        }
        w
    };

    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<Welford> = if cfg.threads <= 1 {
        (0..n_chunks).map(chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(chunk).collect())
    };
    let mut total = Welford::default();
    for p in &partials {
        total.merge(p);
    }
    if !total.mean.is_finite() {
        return Err(Error::NonFinite { step: cfg.n_steps });
    }
    Ok(McEstimate {
        value: total.mean,
        std_error: (total.variance() / total.count as f64).sqrt(),
        n_paths: if cfg.antithetic {
            2 * n_samples
        } else {
            n_samples
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::closed_form_bs;

    fn cfg(n: usize) -> McConfig {
        McConfig {
            n_paths: n,
            n_steps: 50,
            seed: 5,
            antithetic: false,
            threads: 1,
        }
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..313].iter().for_each(|x| a.push(*x));
        xs[313..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn too_few_paths() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        assert!(matches!(
            feynman_kac_price(&p, 0.5, 0.0, &cfg(99)),
            Err(Error::InsufficientPaths(99))
        ));
    }

    #[test]
    fn terminal_and_boundary_cases() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        let e = feynman_kac_price(&p, 0.8, 1.0, &cfg(100)).unwrap();
        assert_eq!(e.std_error, 0.0);
        assert!((e.value - 0.3).abs() < 1e-15);
        let e = feynman_kac_price(&p, 1.0, 0.3, &cfg(100)).unwrap();
        assert_eq!(e.value, 0.5);
    }

    #[test]
    fn deep_out_of_the_money_is_worthless() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 0.1, 0.5);
        let e = feynman_kac_price(&p, 0.01, 0.0, &cfg(1000)).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        let mut c = cfg(3000);
        let a = feynman_kac_price(&p, 0.5, 0.0, &c).unwrap();
        c.threads = 4;
        let b = feynman_kac_price(&p, 0.5, 0.0, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brackets_closed_form() {
        let p = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        let e = feynman_kac_price(&p, 0.5, 0.0, &cfg(20_000)).unwrap();
        let bs = closed_form_bs(0.5, 0.5, 0.05, 0.2, 1.0);
        assert!((e.value - bs).abs() < 3.0 * e.std_error, "{e:?} vs {bs}");
    }
}
