//! Command-line arguments.
//!
//! Every flag can also be set through a `JDPINN_*` environment variable.
//! The argument structs are serializable so that a run manifest can store
//! the fully resolved configuration and replay it later.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use jdpinn_core::market_data::DayCount;
use jdpinn_core::model::SentimentPathPolicy;
use jdpinn_core::neural::Activation;
use jdpinn_core::pinn::OptimizerKind;
use jdpinn_core::pricing::DelayMode;
use jdpinn_core::simulate::Scheme;

/// Serde adapter for types that round-trip through `Display` and `FromStr`.
mod text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// `<cols>x<rows>`: price intervals by time intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub n_s: usize,
    pub n_t: usize,
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected <n_s>x<n_t>, found '{s}'");
        let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let n_s = a.trim().parse().map_err(|_| bad())?;
        let n_t = b.trim().parse().map_err(|_| bad())?;
        if n_s == 0 || n_t == 0 {
            return Err(bad());
        }
        Ok(GridSpec { n_s, n_t })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n_s, self.n_t)
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

/// `full` or a mini-batch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSpec {
    Full,
    Size(usize),
}

impl std::str::FromStr for BatchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("full") {
            return Ok(BatchSpec::Full);
        }
        match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(BatchSpec::Size(n)),
            _ => Err(format!("expected 'full' or a positive size, found '{s}'")),
        }
    }
}

impl std::fmt::Display for BatchSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BatchSpec::Full => f.write_str("full"),
            BatchSpec::Size(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Black–Scholes reduction: no jump drift, no source term.
    Bs,
    /// Jump-diffusion with sentiment.
    Jmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Fd,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauUnit {
    /// Converted with the parameter file's day count.
    Days,
    Years,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RunOptions {
    /// Worker threads for Monte Carlo, training and sweeps.
    #[arg(long, env = "JDPINN_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Where to write the run manifest.
    #[arg(long, env = "JDPINN_MANIFEST")]
    pub manifest: Option<PathBuf>,
}

/// Finite-difference settings.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FdArgs {
    #[arg(long, env = "JDPINN_FD_GRID", default_value = "400x400")]
    pub fd_grid: GridSpec,
    /// Start with implicit half-steps to damp the payoff kink.
    #[arg(long, env = "JDPINN_RANNACHER")]
    pub rannacher: bool,
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McArgs {
    #[arg(long, env = "JDPINN_PATHS", default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, env = "JDPINN_STEPS", default_value_t = 200)]
    pub steps: usize,
    #[arg(long, env = "JDPINN_ANTITHETIC")]
    pub antithetic: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// `date,close` CSV of daily prices.
    #[arg(long, env = "JDPINN_PRICES")]
    pub prices: PathBuf,
    /// `date,value` CSV of trend readings; sentiment keys are omitted
    /// without it.
    #[arg(long, env = "JDPINN_TREND")]
    pub trend: Option<PathBuf>,
    /// Absolute log-return above which a move counts as a jump.
    #[arg(long, env = "JDPINN_THRESHOLD", default_value_t = jdpinn_core::estimation::DEFAULT_EPSILON)]
    pub threshold: f64,
    #[arg(long, env = "JDPINN_DAY_COUNT", default_value = "365")]
    #[serde(with = "text")]
    pub day_count: DayCount,
    /// Parameter file to write.
    #[arg(long, env = "JDPINN_OUT")]
    pub out: PathBuf,
    /// Descriptive-statistics CSV; defaults to `<out>.stats.csv`.
    #[arg(long, env = "JDPINN_REPORT")]
    pub report: Option<PathBuf>,
    #[arg(long, env = "JDPINN_PHI0", default_value_t = 0.01)]
    pub phi0: f64,
    #[arg(long, env = "JDPINN_TAU", default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, env = "JDPINN_RATE", default_value_t = 0.04)]
    pub rate: f64,
    #[arg(long, env = "JDPINN_STRIKE", default_value_t = 30_000.0)]
    pub strike: f64,
    #[arg(long, env = "JDPINN_S_MAX", default_value_t = 63_577.0)]
    pub s_max: f64,
    #[arg(long, env = "JDPINN_MATURITY", default_value_t = 5.0)]
    pub maturity: f64,
    #[arg(long, env = "JDPINN_POLICY", default_value = "mean-path")]
    #[serde(with = "text")]
    pub policy: SentimentPathPolicy,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    #[arg(long, env = "JDPINN_MODEL", value_enum, default_value_t = ModelKind::Jmd)]
    pub model: ModelKind,
    /// Collocation lattice.
    #[arg(long, env = "JDPINN_GRID", default_value = "10x10")]
    pub grid: GridSpec,
    /// Layer widths, input first.
    #[arg(long, env = "JDPINN_LAYERS", default_value = "2-64-32-16-8-1")]
    pub layers: String,
    #[arg(long, env = "JDPINN_ACTIVATION", default_value = "sigmoid")]
    #[serde(with = "text")]
    pub activation: Activation,
    #[arg(long, env = "JDPINN_OPTIMIZER", default_value = "sgd")]
    #[serde(with = "text")]
    pub optimizer: OptimizerKind,
    #[arg(long, env = "JDPINN_LR", default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, env = "JDPINN_ITERS", default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, env = "JDPINN_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Fraction of lattice points used for training.
    #[arg(long, env = "JDPINN_SPLIT", default_value_t = 0.8)]
    pub split: f64,
    #[arg(long, env = "JDPINN_BATCH", default_value = "full")]
    #[serde(with = "text")]
    pub batch: BatchSpec,
    #[arg(long, env = "JDPINN_DISPLAY_EVERY", default_value_t = 500)]
    pub display_every: usize,
    /// Stop when the parameter step norm falls to this value.
    #[arg(long, env = "JDPINN_TOL", default_value_t = 1e-8)]
    pub tol: f64,
    /// Scale the time derivative by 1/T in the residual.
    #[arg(long, env = "JDPINN_INCLUDE_INV_T", default_value_t = true, action = clap::ArgAction::Set)]
    pub include_inv_t: bool,
    #[arg(long, env = "JDPINN_OUT_WEIGHTS")]
    pub out_weights: PathBuf,
    /// Metrics CSV; defaults to `<out-weights>.metrics.csv`.
    #[arg(long, env = "JDPINN_METRICS")]
    pub metrics: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").args(["weights", "fd", "mc"])))]
pub struct PriceArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    #[arg(long, env = "JDPINN_MODEL", value_enum, default_value_t = ModelKind::Jmd)]
    pub model: ModelKind,
    /// Price with a trained network.
    #[arg(long, env = "JDPINN_WEIGHTS")]
    pub weights: Option<PathBuf>,
    /// Price with the finite-difference solver (the default).
    #[arg(long)]
    pub fd: bool,
    /// Price with Monte Carlo.
    #[arg(long)]
    pub mc: bool,
    /// Underlying price in dollars.
    #[arg(long, env = "JDPINN_SPOT")]
    pub spot: f64,
    /// Years to expiry; defaults to the full maturity.
    #[arg(long, env = "JDPINN_TENOR")]
    pub tenor: Option<f64>,
    /// Full surface CSV.
    #[arg(long, env = "JDPINN_SURFACE_OUT")]
    pub surface_out: Option<PathBuf>,
    /// Lattice for network and Monte Carlo surfaces.
    #[arg(long, env = "JDPINN_SURFACE_GRID", default_value = "10x10")]
    pub surface_grid: GridSpec,
    /// Quote CSV.
    #[arg(long, env = "JDPINN_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "JDPINN_SEED", default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub fd_args: FdArgs,
    #[command(flatten)]
    pub mc_args: McArgs,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    /// Finite-difference lattice.
    #[arg(long, env = "JDPINN_GRID", default_value = "400x400")]
    pub grid: GridSpec,
    #[arg(long, env = "JDPINN_RANNACHER")]
    pub rannacher: bool,
    #[arg(long, env = "JDPINN_PATHS", default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, env = "JDPINN_STEPS", default_value_t = 200)]
    pub steps: usize,
    #[arg(long, env = "JDPINN_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Trained network to compare against the FD surface.
    #[arg(long, env = "JDPINN_WEIGHTS")]
    pub weights: Option<PathBuf>,
    /// Per-probe table CSV.
    #[arg(long, env = "JDPINN_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DelaySweepArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    /// Comma-separated delays.
    #[arg(
        long,
        env = "JDPINN_TAUS",
        value_delimiter = ',',
        default_value = "5,10,15,20"
    )]
    pub taus: Vec<f64>,
    #[arg(long, env = "JDPINN_TAU_UNIT", value_enum, default_value_t = TauUnit::Days)]
    pub tau_unit: TauUnit,
    #[arg(long, env = "JDPINN_MODE", default_value = "effective-maturity")]
    #[serde(with = "text")]
    pub mode: DelayMode,
    #[arg(long, env = "JDPINN_SOLVER", value_enum, default_value_t = SolverKind::Fd)]
    pub solver: SolverKind,
    /// Underlying price in dollars.
    #[arg(long, env = "JDPINN_SPOT")]
    pub spot: f64,
    #[arg(long, env = "JDPINN_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "JDPINN_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub fd_args: FdArgs,
    #[command(flatten)]
    pub mc_args: McArgs,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    /// Time rows `t = r / rows` for `r = 1..=rows`.
    #[arg(long, env = "JDPINN_ROWS", default_value_t = 3)]
    pub rows: usize,
    /// Price nodes `s = i / nodes` for `i = 0..=nodes`.
    #[arg(long, env = "JDPINN_NODES", default_value_t = 9)]
    pub nodes: usize,
    #[arg(long, env = "JDPINN_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub fd_args: FdArgs,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, env = "JDPINN_PARAMS")]
    pub params: PathBuf,
    /// Starting price in dollars.
    #[arg(long, env = "JDPINN_S0")]
    pub s0: f64,
    #[arg(long, env = "JDPINN_STEPS", default_value_t = 1_000)]
    pub steps: usize,
    /// Years to simulate; defaults to the maturity.
    #[arg(long, env = "JDPINN_HORIZON")]
    pub horizon: Option<f64>,
    #[arg(long, env = "JDPINN_SCHEME", default_value = "exact")]
    #[serde(with = "text")]
    pub scheme: Scheme,
    #[arg(long, env = "JDPINN_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "JDPINN_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest of the run to repeat.
    #[arg(long, env = "JDPINN_REPLAY_MANIFEST")]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Estimate model parameters from price and trend CSVs.
    Estimate(EstimateArgs),
    /// Train a trial-solution network.
    Train(TrainArgs),
    /// Quote one option and optionally write the full surface.
    Price(PriceArgs),
    /// Cross-check the solvers against each other.
    Validate(ValidateArgs),
    /// Re-price across sentiment delays.
    DelaySweep(DelaySweepArgs),
    /// Black–Scholes versus jump-model table.
    Compare(CompareArgs),
    /// Simulate one price and sentiment path.
    Simulate(SimulateArgs),
    /// Re-run a recorded command.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Train(_) => "train",
            Command::Price(_) => "price",
            Command::Validate(_) => "validate",
            Command::DelaySweep(_) => "delay-sweep",
            Command::Compare(_) => "compare",
            Command::Simulate(_) => "simulate",
            Command::Replay(_) => "replay",
        }
    }

    pub fn run_options(&self) -> Option<&RunOptions> {
        match self {
            Command::Estimate(a) => Some(&a.run),
            Command::Train(a) => Some(&a.run),
            Command::Price(a) => Some(&a.run),
            Command::Validate(a) => Some(&a.run),
            Command::DelaySweep(a) => Some(&a.run),
            Command::Compare(a) => Some(&a.run),
            Command::Simulate(a) => Some(&a.run),
            Command::Replay(_) => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Train(a) => Some(a.seed),
            Command::Price(a) => Some(a.seed),
            Command::Validate(a) => Some(a.seed),
            Command::DelaySweep(a) => Some(a.seed),
            Command::Simulate(a) => Some(a.seed),
            _ => None,
        }
    }
}

/// Option pricing with jump-diffusion and sentiment.
#[derive(Debug, Parser)]
#[command(name = "jdpinn", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}
