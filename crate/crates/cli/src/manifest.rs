//! Run manifests.
//!
//! A manifest records the resolved configuration of a run, including values
//! that came from environment variables, so `jdpinn replay` can repeat the
//! run without the original environment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliError;

pub const TOOLKIT: &str = "jdpinn";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// Directory relative paths in `config` are resolved against.
    pub working_dir: PathBuf,
    pub config: Command,
    pub seed: Option<u64>,
    pub threads: usize,
    pub artifacts: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("manifest: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if m.toolkit != TOOLKIT {
            return Err(CliError::Data(format!(
                "{}: not a {TOOLKIT} manifest",
                path.display()
            )));
        }
        Ok(m)
    }
}

/// Manifest location: the explicit path, else next to the first artifact,
/// else `jdpinn-<command>.manifest.json` in the working directory.
pub fn default_path(explicit: Option<&Path>, artifacts: &[PathBuf], command: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match artifacts.first() {
        Some(a) => {
            let mut s = a.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from(format!("{TOOLKIT}-{command}.manifest.json")),
    }
}
