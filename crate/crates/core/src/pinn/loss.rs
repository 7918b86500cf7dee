//! PDE residual of the trial function, loss metrics and the loss gradient.
//!
//! ```text
//! R = c ζ_t − ½σ*²s² ζ_ss − η s ζ_s + r ζ + β(t, s),   c = 1/T or 1
//! L = ½ Σ R²
//! ```
//!
//! `R` is affine in `(N, N_t, N_s, N_ss)`, so `∂L/∂θ = Σ R ∂R/∂θ` is obtained
//! by back-propagating the upstream coefficients
//!
//! ```text
//! ∂R/∂N    = c B_t − ½σ*²s² B_ss − η s B_s + r B
//! ∂R/∂N_t  = c B
//! ∂R/∂N_s  = −σ*²s² B_s − η s B
//! ∂R/∂N_ss = −½σ*²s² B
//! ```

use rayon::prelude::*;

use super::trial::{assemble, b_term, TrialFunction};
use crate::model::PdeProblem;
use crate::neural::{Tape, Upstream};

/// Points per gradient chunk. Chunks are summed in order, so the result does
/// not depend on how many threads evaluate them.
const CHUNK: usize = 16;

/// Loss and error metrics over a set of collocation points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossMetrics {
    /// `½ Σ R²`.
    pub loss: f64,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub count: usize,
}

impl LossMetrics {
    fn from_sums(sum_sq: f64, sum_abs: f64, count: usize) -> Self {
        if count == 0 {
            return LossMetrics::default();
        }
        let mse = sum_sq / count as f64;
        LossMetrics {
            loss: 0.5 * sum_sq,
            mse,
            rmse: mse.sqrt(),
            mae: sum_abs / count as f64,
            count,
        }
    }
}

/// Coefficients of the PDE at normalized time `t`.
#[derive(Clone, Copy)]
struct Coeffs {
    c: f64,
    sig2: f64,
    eta: f64,
    rate: f64,
    slope: f64,
}

impl Coeffs {
    fn at(pde: &PdeProblem, t: f64, include_1_over_t: bool) -> Self {
        let t_cal = pde.calendar_time(t);
        Coeffs {
            c: if include_1_over_t {
                1.0 / pde.maturity
            } else {
                1.0
            },
            sig2: pde.sigma_star_sq(t_cal),
            eta: pde.eta(t_cal),
            rate: pde.rate,
            slope: pde.beta_slope(t_cal),
        }
    }

    fn residual(&self, s: f64, z: &super::TrialDerivatives) -> f64 {
        self.c * z.dt - 0.5 * self.sig2 * s * s * z.dss - self.eta * s * z.ds
            + self.rate * z.value
            + self.slope * s
    }

    fn partials(&self, t: f64, s: f64) -> Upstream {
        let (b, b_t, b_s, b_ss) = b_term(t, s);
        let diff = 0.5 * self.sig2 * s * s;
        let conv = self.eta * s;
        Upstream {
            n: self.c * b_t - diff * b_ss - conv * b_s + self.rate * b,
            dn_dt: self.c * b,
            dn_ds: -2.0 * diff * b_s - conv * b,
            d2n_ds2: -diff * b,
        }
    }
}

/// PDE residual of the trial function at `(t, s)`.
pub fn residual(
    tf: &TrialFunction,
    pde: &PdeProblem,
    t: f64,
    s: f64,
    include_1_over_t: bool,
) -> f64 {
    let z = super::trial_derivatives(tf, t, s);
    Coeffs::at(pde, t, include_1_over_t).residual(s, &z)
}

/// Loss and metrics over `points`.
pub fn loss(
    tf: &TrialFunction,
    pde: &PdeProblem,
    points: &[(f64, f64)],
    include_1_over_t: bool,
) -> LossMetrics {
    let mut tape = Tape::new(&tf.arch);
    let (mut sq, mut ab) = (0.0, 0.0);
    for &(t, s) in points {
        let net = tape.forward(&tf.arch, &tf.params, t, s);
        let z = assemble(tf.strike_ratio, t, s, &net);
        let r = Coeffs::at(pde, t, include_1_over_t).residual(s, &z);
        sq += r * r;
        ab += r.abs();
    }
    LossMetrics::from_sums(sq, ab, points.len())
}

fn chunk_gradient(
    tf: &TrialFunction,
    pde: &PdeProblem,
    points: &[(f64, f64)],
    include_1_over_t: bool,
) -> (f64, f64, Vec<f64>) {
    let mut tape = Tape::new(&tf.arch);
    let mut grad = vec![0.0; tf.params.data.len()];
    let (mut sq, mut ab) = (0.0, 0.0);
    for &(t, s) in points {
        let coeffs = Coeffs::at(pde, t, include_1_over_t);
        let net = tape.forward(&tf.arch, &tf.params, t, s);
        let z = assemble(tf.strike_ratio, t, s, &net);
        let r = coeffs.residual(s, &z);
        sq += r * r;
        ab += r.abs();
        let p = coeffs.partials(t, s);
        let up = Upstream {
            n: r * p.n,
            dn_dt: r * p.dn_dt,
            dn_ds: r * p.dn_ds,
            d2n_ds2: r * p.d2n_ds2,
        };
        tape.backward(&tf.arch, &tf.params, up, &mut grad);
    }
    (sq, ab, grad)
}

/// Loss metrics and `∇_θ L` over `points`. Pass a thread pool to evaluate
/// chunks in parallel; the reduction order is fixed either way.
pub fn loss_and_gradient(
    tf: &TrialFunction,
    pde: &PdeProblem,
    points: &[(f64, f64)],
    include_1_over_t: bool,
    pool: Option<&rayon::ThreadPool>,
) -> (LossMetrics, Vec<f64>) {
    let work = |chunk: &[(f64, f64)]| chunk_gradient(tf, pde, chunk, include_1_over_t);
    let parts: Vec<(f64, f64, Vec<f64>)> = match pool {
        Some(pool) => pool.install(|| points.par_chunks(CHUNK).map(work).collect()),
        None => points.chunks(CHUNK).map(work).collect(),
    };
    let mut grad = vec![0.0; tf.params.data.len()];
    let (mut sq, mut ab) = (0.0, 0.0);
    for (s2, a1, g) in parts {
        sq += s2;
        ab += a1;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    (LossMetrics::from_sums(sq, ab, points.len()), grad)
}
