//! Feed-forward network with exact input derivatives.
//!
//! The network maps `(t, s)` to a scalar `N`. Alongside the value it
//! propagates `∂/∂t`, `∂/∂s` and `∂²/∂s²` through every layer, and it can
//! back-propagate any linear functional of those four outputs to the weights.
//! Hidden layers share one activation; the output layer is affine.

mod eval;
mod grad;
mod io;

pub use eval::{eval, single_layer_analytic, EvalResult, Tape};
pub use grad::{param_gradients, Upstream};
pub use io::{format_weights, parse_weights, read_weights, write_weights, WEIGHTS_MAGIC};

use crate::error::{Error, Result};
use crate::simulate::rng::{path_stream, uniform_open};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
    /// Derivative taken as 0 at the kink; second and third derivatives are 0.
    Relu,
}

impl Activation {
    /// Value and first three derivatives at `z`.
    #[inline]
    pub fn eval4(self, z: f64) -> (f64, f64, f64, f64) {
        match self {
            Activation::Sigmoid => {
                let f = 1.0 / (1.0 + (-z).exp());
                let d1 = f * (1.0 - f);
                let g = 1.0 - 2.0 * f;
                (f, d1, d1 * g, d1 * g * g - 2.0 * d1 * d1)
            }
            Activation::Tanh => {
                let f = z.tanh();
                let d1 = 1.0 - f * f;
                (f, d1, -2.0 * f * d1, -2.0 * d1 * d1 + 4.0 * f * f * d1)
            }
            Activation::Relu => {
                if z > 0.0 {
                    (z, 1.0, 0.0, 0.0)
                } else {
                    (0.0, 0.0, 0.0, 0.0)
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(format!("unknown activation '{other}'")),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

/// Layer widths (input 2, output 1) and hidden activation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkArchitecture {
    layer_sizes: Vec<usize>,
    pub activation: Activation,
}

impl NetworkArchitecture {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes[0] != 2 || *layer_sizes.last().unwrap() != 1 {
            return Err(Error::invalid(
                "layers",
                format!("must start with 2 and end with 1, got {layer_sizes:?}"),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::invalid("layers", "layer widths must be positive"));
        }
        Ok(NetworkArchitecture {
            layer_sizes,
            activation,
        })
    }

    /// The 2-64-32-16-8-1 network.
    pub fn reference(activation: Activation) -> Self {
        NetworkArchitecture::new(vec![2, 64, 32, 16, 8, 1], activation).expect("valid sizes")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `(fan_in, fan_out)` of affine layer `l`.
    pub fn shape(&self, l: usize) -> (usize, usize) {
        (self.layer_sizes[l], self.layer_sizes[l + 1])
    }

    pub fn param_count(&self) -> usize {
        (0..self.depth())
            .map(|l| {
                let (i, o) = self.shape(l);
                o * i + o
            })
            .sum()
    }

    /// Offset of layer `l`'s weights in the flat parameter vector; its biases
    /// follow the `fan_out × fan_in` row-major weight block.
    pub fn offset(&self, l: usize) -> usize {
        (0..l)
            .map(|k| {
                let (i, o) = self.shape(k);
                o * i + o
            })
            .sum()
    }

    pub fn widest(&self) -> usize {
        *self.layer_sizes.iter().max().unwrap()
    }
}

impl std::fmt::Display for NetworkArchitecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.layer_sizes.iter().map(|v| v.to_string()).collect();
        f.write_str(&s.join("-"))
    }
}

/// Weights and biases stored as one flat vector, layer by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub data: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(arch: &NetworkArchitecture) -> Self {
        NetworkParams {
            data: vec![0.0; arch.param_count()],
        }
    }

    pub fn weights<'a>(&'a self, arch: &NetworkArchitecture, l: usize) -> &'a [f64] {
        let (i, o) = arch.shape(l);
        let off = arch.offset(l);
        &self.data[off..off + o * i]
    }

    pub fn biases<'a>(&'a self, arch: &NetworkArchitecture, l: usize) -> &'a [f64] {
        let (i, o) = arch.shape(l);
        let off = arch.offset(l) + o * i;
        &self.data[off..off + o]
    }

    pub fn weights_mut<'a>(&'a mut self, arch: &NetworkArchitecture, l: usize) -> &'a mut [f64] {
        let (i, o) = arch.shape(l);
        let off = arch.offset(l);
        &mut self.data[off..off + o * i]
    }

    pub fn biases_mut<'a>(&'a mut self, arch: &NetworkArchitecture, l: usize) -> &'a mut [f64] {
        let (i, o) = arch.shape(l);
        let off = arch.offset(l) + o * i;
        &mut self.data[off..off + o]
    }
}

/// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero biases.
pub fn init_params(arch: &NetworkArchitecture, seed: u64) -> NetworkParams {
    let mut rng = path_stream(seed, 0);
    let mut params = NetworkParams::zeros(arch);
    for l in 0..arch.depth() {
        let (i, o) = arch.shape(l);
        let bound = (6.0 / (i + o) as f64).sqrt();
        for w in params.weights_mut(arch, l) {
            *w = bound * (2.0 * uniform_open(&mut rng) - 1.0);
        }
    }
    params
}
