//! Forward evaluation with input derivatives.

use super::{Activation, NetworkArchitecture, NetworkParams};
use crate::error::{Error, Result};

/// Network output and its derivatives with respect to the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalResult {
    pub n: f64,
    pub dn_dt: f64,
    pub dn_ds: f64,
    pub d2n_ds2: f64,
}

/// Reusable forward-pass buffers. Holds everything the reverse pass needs.
#[derive(Debug, Clone)]
pub struct Tape {
    /// Layer inputs and their `t`, `s`, `ss` derivatives; index 0 is `(t, s)`.
    pub(super) a: Vec<[Vec<f64>; 4]>,
    /// Pre-activations and their derivatives, one entry per affine layer.
    pub(super) z: Vec<[Vec<f64>; 4]>,
    /// `f'`, `f''`, `f'''` at each hidden pre-activation.
    pub(super) df: Vec<[Vec<f64>; 3]>,
    /// Reverse-pass adjoints of the current pre-activation and layer input.
    pub(super) gz: [Vec<f64>; 4],
    pub(super) ga: [Vec<f64>; 4],
}

impl Tape {
    pub fn new(arch: &NetworkArchitecture) -> Self {
        let sizes = arch.layer_sizes();
        let quad = |n: usize| [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        Tape {
            a: sizes.iter().map(|&n| quad(n)).collect(),
            z: sizes[1..].iter().map(|&n| quad(n)).collect(),
            df: sizes[1..]
                .iter()
                .map(|&n| [vec![0.0; n], vec![0.0; n], vec![0.0; n]])
                .collect(),
            gz: quad(arch.widest()),
            ga: quad(arch.widest()),
        }
    }

    /// Runs the network at `(t, s)`, recording intermediate values.
    pub fn forward(
        &mut self,
        arch: &NetworkArchitecture,
        params: &NetworkParams,
        t: f64,
        s: f64,
    ) -> EvalResult {
        let depth = arch.depth();
        self.a[0][0].copy_from_slice(&[t, s]);
        self.a[0][1].copy_from_slice(&[1.0, 0.0]);
        self.a[0][2].copy_from_slice(&[0.0, 1.0]);
        self.a[0][3].copy_from_slice(&[0.0, 0.0]);

        for l in 0..depth {
            let (n_in, n_out) = arch.shape(l);
            let w = params.weights(arch, l);
            let b = params.biases(arch, l);
            let (before, after) = self.a.split_at_mut(l + 1);
            let input = &before[l];
            let z = &mut self.z[l];
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let (mut v, mut vt, mut vs, mut vss) = (b[o], 0.0, 0.0, 0.0);
                for k in 0..n_in {
                    v += row[k] * input[0][k];
                    vt += row[k] * input[1][k];
                    vs += row[k] * input[2][k];
                    vss += row[k] * input[3][k];
                }
                z[0][o] = v;
                z[1][o] = vt;
                z[2][o] = vs;
                z[3][o] = vss;
            }
            let out = &mut after[0];
            if l + 1 == depth {
                for c in 0..4 {
                    out[c].copy_from_slice(&z[c]);
                }
            } else {
                let df = &mut self.df[l];
                for o in 0..n_out {
                    let (f, d1, d2, d3) = arch.activation.eval4(z[0][o]);
                    df[0][o] = d1;
                    df[1][o] = d2;
                    df[2][o] = d3;
                    let zs = z[2][o];
                    out[0][o] = f;
                    out[1][o] = d1 * z[1][o];
                    out[2][o] = d1 * zs;
                    out[3][o] = d2 * zs * zs + d1 * z[3][o];
                }
            }
        }
        let last = &self.a[depth];
        EvalResult {
            n: last[0][0],
            dn_dt: last[1][0],
            dn_ds: last[2][0],
            d2n_ds2: last[3][0],
        }
    }
}

/// Evaluates the network and its input derivatives at `(t, s)`.
pub fn eval(arch: &NetworkArchitecture, params: &NetworkParams, t: f64, s: f64) -> EvalResult {
    Tape::new(arch).forward(arch, params, t, s)
}

/// Closed-form evaluation of a 2-M-1 sigmoid network
/// `N = Σ q_r f(w_r t + γ_r s + b_r) + c`:
///
/// ```text
/// ∂N/∂t   = Σ q_r w_r f(z_r)(1 − f(z_r))
/// ∂N/∂s   = Σ q_r γ_r f(z_r)(1 − f(z_r))
/// ∂²N/∂s² = Σ q_r γ_r² f(z_r)(1 − f(z_r))(1 − 2f(z_r))
/// ```
pub fn single_layer_analytic(
    arch: &NetworkArchitecture,
    params: &NetworkParams,
    t: f64,
    s: f64,
) -> Result<EvalResult> {
    if arch.depth() != 2 || arch.activation != Activation::Sigmoid {
        return Err(Error::invalid(
            "architecture",
            format!(
                "closed form needs a 2-M-1 sigmoid network, got {arch} {}",
                arch.activation
            ),
        ));
    }
    let hidden = arch.layer_sizes()[1];
    let w = params.weights(arch, 0);
    let b = params.biases(arch, 0);
    let q = params.weights(arch, 1);
    let mut out = EvalResult {
        n: params.biases(arch, 1)[0],
        ..Default::default()
    };
    for r in 0..hidden {
        let (wr, gr) = (w[2 * r], w[2 * r + 1]);
        let f = 1.0 / (1.0 + (-(wr * t + gr * s + b[r])).exp());
        let g = f * (1.0 - f);
        out.n += q[r] * f;
        out.dn_dt += q[r] * wr * g;
        out.dn_ds += q[r] * gr * g;
        out.d2n_ds2 += q[r] * gr * gr * g * (1.0 - 2.0 * f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::init_params;

    fn arch(sizes: &[usize], act: Activation) -> NetworkArchitecture {
        NetworkArchitecture::new(sizes.to_vec(), act).unwrap()
    }

    #[test]
    fn zero_network() {
        let a = arch(&[2, 3, 1], Activation::Sigmoid);
        let p = NetworkParams::zeros(&a);
        assert_eq!(eval(&a, &p, 0.3, 0.7), EvalResult::default());
    }

    #[test]
    fn single_neuron_at_zero_weights() {
        let a = arch(&[2, 1, 1], Activation::Sigmoid);
        let mut p = NetworkParams::zeros(&a);
        p.weights_mut(&a, 1)[0] = 1.0;
        let r = eval(&a, &p, 0.4, 0.9);
        assert_eq!(r.n, 0.5);
        assert_eq!((r.dn_dt, r.dn_ds, r.d2n_ds2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_layer_hand_value() {
        let a = arch(&[2, 1, 1], Activation::Sigmoid);
        let mut p = NetworkParams::zeros(&a);
        p.weights_mut(&a, 0)[0] = 1.0;
        p.weights_mut(&a, 1)[0] = 1.0;
        let r = single_layer_analytic(&a, &p, 0.0, 0.3).unwrap();
        assert_eq!(r.dn_dt, 0.25);
        assert_eq!(r.d2n_ds2, 0.0);
        assert_eq!(r, eval(&a, &p, 0.0, 0.3));
    }

    #[test]
    fn closed_form_rejects_deep_nets() {
        let a = arch(&[2, 4, 4, 1], Activation::Sigmoid);
        assert!(single_layer_analytic(&a, &NetworkParams::zeros(&a), 0.1, 0.1).is_err());
        let a = arch(&[2, 4, 1], Activation::Tanh);
        assert!(single_layer_analytic(&a, &NetworkParams::zeros(&a), 0.1, 0.1).is_err());
    }

    #[test]
    fn relu_has_no_curvature() {
        let a = arch(&[2, 16, 8, 1], Activation::Relu);
        let p = init_params(&a, 3);
        for k in 0..20 {
            let x = k as f64 / 19.0;
            assert_eq!(eval(&a, &p, x, 1.0 - x).d2n_ds2, 0.0);
        }
    }

    #[test]
    fn tape_reuse_is_stateless() {
        let a = arch(&[2, 8, 4, 1], Activation::Tanh);
        let p = init_params(&a, 1);
        let mut tape = Tape::new(&a);
        let first = tape.forward(&a, &p, 0.2, 0.6);
        tape.forward(&a, &p, 0.9, 0.1);
        assert_eq!(first, tape.forward(&a, &p, 0.2, 0.6));
    }
}
