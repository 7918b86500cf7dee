//! Versioned plain-text weight files.
//!
//! ```text
//! jdpinn-weights v1
//! layers: 2 64 32 16 8 1
//! activation: sigmoid
//! <layer 1 weights, row-major>
//! <layer 1 biases>
//! ...
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so a save/load cycle
//! reproduces every parameter bit for bit.

use std::path::Path;

use super::{Activation, NetworkArchitecture, NetworkParams};
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &str = "jdpinn-weights v1";

fn join(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    parts.join(" ")
}

/// Renders the weight file contents.
pub fn format_weights(arch: &NetworkArchitecture, params: &NetworkParams) -> String {
    let sizes: Vec<String> = arch.layer_sizes().iter().map(|s| s.to_string()).collect();
    let mut out = format!(
        "{WEIGHTS_MAGIC}\nlayers: {}\nactivation: {}\n",
        sizes.join(" "),
        arch.activation
    );
    for l in 0..arch.depth() {
        out.push_str(&join(params.weights(arch, l)));
        out.push('\n');
        out.push_str(&join(params.biases(arch, l)));
        out.push('\n');
    }
    out
}

pub fn write_weights(
    path: impl AsRef<Path>,
    arch: &NetworkArchitecture,
    params: &NetworkParams,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_weights(arch, params)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses weight file contents; `origin` labels errors.
pub fn parse_weights(text: &str, origin: &Path) -> Result<(NetworkArchitecture, NetworkParams)> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
    };

    let (n, magic) = next("header")?;
    if magic != WEIGHTS_MAGIC {
        return Err(err(
            n,
            format!("expected '{WEIGHTS_MAGIC}', found '{magic}'"),
        ));
    }
    let (n, layers) = next("layers line")?;
    let sizes = layers
        .strip_prefix("layers:")
        .ok_or_else(|| err(n, "expected 'layers:'".into()))?
        .split_whitespace()
        .map(|v| v.parse::<usize>().map_err(|e| err(n, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (n, act) = next("activation line")?;
    let activation: Activation = act
        .strip_prefix("activation:")
        .ok_or_else(|| err(n, "expected 'activation:'".into()))?
        .parse()
        .map_err(|e: String| err(n, e))?;
    let arch = NetworkArchitecture::new(sizes, activation).map_err(|e| err(n, e.to_string()))?;

    let mut params = NetworkParams::zeros(&arch);
    for l in 0..arch.depth() {
        for target in [0, 1] {
            let (n, row) = next("parameter line")?;
            let values = row
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| err(n, format!("'{v}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let slot = if target == 0 {
                params.weights_mut(&arch, l)
            } else {
                params.biases_mut(&arch, l)
            };
            if values.len() != slot.len() {
                return Err(err(
                    n,
                    format!("expected {} values, found {}", slot.len(), values.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(err(n, "non-finite parameter".into()));
            }
            slot.copy_from_slice(&values);
        }
    }
    Ok((arch, params))
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<(NetworkArchitecture, NetworkParams)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_weights(&text, path)
}
