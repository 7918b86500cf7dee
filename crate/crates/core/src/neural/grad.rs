//! Reverse accumulation of parameter gradients through the value and
//! input-derivative channels of the forward pass.
//!
//! For a hidden unit with `a = f(z)`, `a_t = f'z_t`, `a_s = f'z_s` and
//! `a_ss = f''z_s² + f'z_ss`, the adjoints pull back as
//!
//! ```text
//! z̄    = ā f' + ā_t f'' z_t + ā_s f'' z_s + ā_ss (f''' z_s² + f'' z_ss)
//! z̄_t  = ā_t f'
//! z̄_s  = ā_s f' + 2 ā_ss f'' z_s
//! z̄_ss = ā_ss f'
//! ```
//!
//! and an affine layer `z = W a + b` contributes
//! `W̄ += z̄ aᵀ + z̄_t a_tᵀ + z̄_s a_sᵀ + z̄_ss a_ssᵀ`, `b̄ += z̄`.

use super::{NetworkArchitecture, NetworkParams, Tape};

/// Coefficients of the scalar `n·N + dn_dt·N_t + dn_ds·N_s + d2n_ds2·N_ss`
/// whose gradient is requested.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Upstream {
    pub n: f64,
    pub dn_dt: f64,
    pub dn_ds: f64,
    pub d2n_ds2: f64,
}

impl Upstream {
    pub fn is_zero(&self) -> bool {
        self.n == 0.0 && self.dn_dt == 0.0 && self.dn_ds == 0.0 && self.d2n_ds2 == 0.0
    }
}

impl Tape {
    /// Adds the gradient of the upstream functional at the point of the last
    /// [`Tape::forward`] call to `grad`.
    pub fn backward(
        &mut self,
        arch: &NetworkArchitecture,
        params: &NetworkParams,
        up: Upstream,
        grad: &mut [f64],
    ) {
        if up.is_zero() {
            return;
        }
        let depth = arch.depth();
        self.gz[0][0] = up.n;
        self.gz[1][0] = up.dn_dt;
        self.gz[2][0] = up.dn_ds;
        self.gz[3][0] = up.d2n_ds2;

        for l in (0..depth).rev() {
            let (n_in, n_out) = arch.shape(l);
            let w_off = arch.offset(l);
            let b_off = w_off + n_in * n_out;
            let input = &self.a[l];
            for o in 0..n_out {
                let g = [self.gz[0][o], self.gz[1][o], self.gz[2][o], self.gz[3][o]];
                let row = &mut grad[w_off + o * n_in..w_off + (o + 1) * n_in];
                for k in 0..n_in {
                    row[k] += g[0] * input[0][k]
                        + g[1] * input[1][k]
                        + g[2] * input[2][k]
                        + g[3] * input[3][k];
                }
                grad[b_off + o] += g[0];
            }
            if l == 0 {
                break;
            }

            let w = params.weights(arch, l);
            for c in 0..4 {
                self.ga[c][..n_in].fill(0.0);
            }
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                for c in 0..4 {
                    let g = self.gz[c][o];
                    if g != 0.0 {
                        for (a, r) in self.ga[c][..n_in].iter_mut().zip(row) {
                            *a += r * g;
                        }
                    }
                }
            }

            let z = &self.z[l - 1];
            let df = &self.df[l - 1];
            for k in 0..n_in {
                let (d1, d2, d3) = (df[0][k], df[1][k], df[2][k]);
                let (zt, zs, zss) = (z[1][k], z[2][k], z[3][k]);
                let (a0, a1, a2, a3) = (self.ga[0][k], self.ga[1][k], self.ga[2][k], self.ga[3][k]);
                self.gz[0][k] =
                    a0 * d1 + a1 * d2 * zt + a2 * d2 * zs + a3 * (d3 * zs * zs + d2 * zss);
                self.gz[1][k] = a1 * d1;
                self.gz[2][k] = a2 * d1 + 2.0 * a3 * d2 * zs;
                self.gz[3][k] = a3 * d1;
            }
        }
    }
}

/// Gradient of the upstream functional at `(t, s)` with respect to every
/// parameter, in the flat layout of [`NetworkParams`].
pub fn param_gradients(
    arch: &NetworkArchitecture,
    params: &NetworkParams,
    t: f64,
    s: f64,
    up: Upstream,
) -> Vec<f64> {
    let mut tape = Tape::new(arch);
    let mut grad = vec![0.0; arch.param_count()];
    tape.forward(arch, params, t, s);
    tape.backward(arch, params, up, &mut grad);
    grad
}
