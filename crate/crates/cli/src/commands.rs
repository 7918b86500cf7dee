//! Command implementations.
//!
//! Each command appends the files it writes to `artifacts` as soon as they
//! exist, so the manifest lists them even when the command later fails.

use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use jdpinn_core::estimation::{estimate_jump_diffusion, estimate_sentiment, JumpThresholdConfig};
use jdpinn_core::fd::{solve_with, FdGrid, FdOptions, FdSolution};
use jdpinn_core::market_data::{
    describe, load_price_csv, load_trend_csv, log_returns, trend_log_returns, DescriptiveStats,
};
use jdpinn_core::model::{build_bs_pde, build_pde, PdeProblem};
use jdpinn_core::neural::{init_params, read_weights, write_weights, NetworkArchitecture};
use jdpinn_core::pinn::{
    make_grid, train, trial_eval, Batch, Split, TrainConfig, TrainReport, TrialFunction,
};
use jdpinn_core::pricing::{
    compare_models, delay_sweep, quote_at, OptionQuote, PriceSurface, SurfaceSource, SweepSolver,
};
use jdpinn_core::simulate::rng::derive_seed;
use jdpinn_core::simulate::{
    closed_form_bs, feynman_kac_price, simulate_jump_diffusion, McConfig, PathConfig,
};
use jdpinn_core::Error;

use crate::args::{
    BatchSpec, CompareArgs, DelaySweepArgs, EstimateArgs, FdArgs, McArgs, ModelKind, PriceArgs,
    SimulateArgs, SolverKind, TauUnit, TrainArgs, ValidateArgs,
};
use crate::error::CliError;
use crate::param_file::{Contract, ParamFile};

const GRID_SEED_LABEL: u64 = 1;
const INIT_SEED_LABEL: u64 = 2;
const TRAIN_SEED_LABEL: u64 = 3;

/// Tolerance of the closed-form check, as a fraction of `S_max`.
pub const BS_TOLERANCE: f64 = 0.005;
/// Allowed FD/MC gap in Monte Carlo standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Allowed mean absolute network/FD gap, as a fraction of `S_max`.
pub const PINN_MAE_TOLERANCE: f64 = 0.02;

/// Normalized times of the cross-solver probes.
pub const PROBE_T: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 1.0];
/// Normalized prices of the cross-solver probes.
pub const PROBE_S: [f64; 3] = [0.2, 0.5, 0.8];

fn create(path: &Path, artifacts: &mut Vec<PathBuf>) -> Result<BufWriter<std::fs::File>, CliError> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    artifacts.push(path.to_path_buf());
    Ok(BufWriter::new(f))
}

fn write_with<F>(path: &Path, artifacts: &mut Vec<PathBuf>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<std::fs::File>) -> std::io::Result<()>,
{
    let mut w = create(path, artifacts)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn pde_for(pf: &ParamFile, kind: ModelKind) -> Result<PdeProblem, CliError> {
    Ok(match kind {
        ModelKind::Bs => build_bs_pde(&pf.model, pf.policy)?,
        ModelKind::Jmd => build_pde(&pf.model, pf.policy)?,
    })
}

fn fd_grid(spec: &FdArgs) -> Result<(FdGrid, FdOptions), CliError> {
    Ok((
        FdGrid::new(spec.fd_grid.n_s, spec.fd_grid.n_t)?,
        FdOptions {
            rannacher: spec.rannacher,
        },
    ))
}

fn mc_config(spec: &McArgs, seed: u64, threads: usize) -> McConfig {
    McConfig {
        n_paths: spec.paths,
        n_steps: spec.steps,
        seed,
        antithetic: spec.antithetic,
        threads,
    }
}

fn fmt_stat(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "NA".to_string()
    }
}

fn stats_fields(s: &DescriptiveStats) -> [f64; 10] {
    [
        s.count as f64,
        s.mean,
        s.min,
        s.q1,
        s.median,
        s.q3,
        s.max,
        s.std_dev,
        s.skewness,
        s.kurtosis,
    ]
}

const STATS_HEADER: [&str; 10] = [
    "count", "mean", "min", "q1", "median", "q3", "max", "std_dev", "skewness", "kurtosis",
];

pub fn estimate(a: &EstimateArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let prices = load_price_csv(&a.prices)?;
    let returns = log_returns(&prices, a.day_count);
    let jd = estimate_jump_diffusion(&returns, JumpThresholdConfig::new(a.threshold)?)?;
    let mut rows = vec![("log_returns", describe(&returns)?)];
    let sentiment = match &a.trend {
        Some(path) => {
            let trend = trend_log_returns(&load_trend_csv(path)?, a.day_count)?;
            rows.push(("trend_log_returns", describe(&trend)?));
            Some(estimate_sentiment(&trend)?)
        }
        None => None,
    };

    let contract = Contract {
        phi0: a.phi0,
        tau: a.tau,
        rate: a.rate,
        strike: a.strike,
        s_max: a.s_max,
        maturity: a.maturity,
    };
    let mut text = format!(
        "# {} returns over {} years, threshold {}\n# jump_count = {}\n",
        returns.returns.len(),
        returns.period_years,
        a.threshold,
        jd.jump_count
    );
    text.push_str(&ParamFile::render(
        &jd,
        sentiment.as_ref(),
        &contract,
        a.day_count,
        a.policy,
    ));
    write_with(&a.out, artifacts, |w| w.write_all(text.as_bytes()))?;

    let report = a
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".stats.csv"));
    write_with(&report, artifacts, |w| {
        writeln!(w, "series,{}", STATS_HEADER.join(","))?;
        for (name, s) in &rows {
            let vals: Vec<String> = stats_fields(s).iter().map(|v| fmt_stat(*v)).collect();
            writeln!(w, "{name},{}", vals.join(","))?;
        }
        Ok(())
    })?;

    let mut table = format!("{:<10}", "");
    for (name, _) in &rows {
        let _ = write!(table, "{name:>20}");
    }
    table.push('\n');
    for (k, label) in STATS_HEADER.iter().enumerate() {
        let _ = write!(table, "{label:<10}");
        for (_, s) in &rows {
            let _ = write!(table, "{:>20}", fmt_stat(stats_fields(s)[k]));
        }
        table.push('\n');
    }
    print!("{table}");
    println!(
        "lambda={} k={} jumps={} mu_d={} sigma_d={}",
        jd.lambda, jd.k, jd.jump_count, jd.mu_d, jd.sigma_d
    );

    if sentiment.is_none() {
        return Err(CliError::Data(format!(
            "partial estimate: no trend file, sentiment keys omitted from {}",
            a.out.display()
        )));
    }
    Ok(())
}

fn parse_layers(text: &str) -> Result<Vec<usize>, CliError> {
    text.split('-')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad layer list '{text}'")))
        })
        .collect()
}

fn print_final(report: &TrainReport) {
    for split in [Split::Train, Split::Test, Split::Full] {
        if let Some(c) = report.series(split).last() {
            println!(
                "step={} split={} mse={:e} rmse={:e} mae={:e}",
                c.step, split, c.metrics.mse, c.metrics.rmse, c.metrics.mae
            );
        }
    }
}

pub fn train_cmd(a: &TrainArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let pf = ParamFile::load(&a.params)?;
    let pde = pde_for(&pf, a.model)?;
    let arch = NetworkArchitecture::new(parse_layers(&a.layers)?, a.activation)?;
    let params = init_params(&arch, derive_seed(a.seed, INIT_SEED_LABEL));
    let tf = TrialFunction::new(arch.clone(), params, pf.model.strike_ratio())?;
    let grid = make_grid(
        a.grid.n_s,
        a.grid.n_t,
        a.split,
        derive_seed(a.seed, GRID_SEED_LABEL),
    )?;
    let cfg = TrainConfig {
        optimizer: a.optimizer,
        learning_rate: a.lr,
        iterations: a.iters,
        batch: match a.batch {
            BatchSpec::Full => Batch::Full,
            BatchSpec::Size(n) => Batch::MiniBatch(n),
        },
        seed: derive_seed(a.seed, TRAIN_SEED_LABEL),
        convergence_tol: a.tol,
        display_every: a.display_every,
        include_1_over_t: a.include_inv_t,
        threads: a.run.threads,
    };
    let (report, failure) = match train(&tf, &pde, &grid, &cfg) {
        Ok(r) => (r, None),
        Err(Error::Diverged { step, report }) => (
            *report,
            Some(CliError::Numerical(format!(
                "training diverged at step {step}; last finite checkpoint kept"
            ))),
        ),
        Err(e) => return Err(e.into()),
    };
    write_weights(&a.out_weights, &arch, &report.params)?;
    artifacts.push(a.out_weights.clone());
    let metrics = a
        .metrics
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out_weights, ".metrics.csv"));
    write_with(&metrics, artifacts, |w| report.write_metrics_csv(w))?;
    print_final(&report);
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn mc_surface(
    pde: &PdeProblem,
    pf: &ParamFile,
    grid: crate::args::GridSpec,
    cfg: &McConfig,
) -> Result<PriceSurface, CliError> {
    let t = PriceSurface::uniform_nodes(grid.n_t);
    let s = PriceSurface::uniform_nodes(grid.n_s);
    let mut values = Vec::with_capacity(t.len() * s.len());
    for &tj in &t {
        let t_start = pf.model.maturity * (1.0 - tj);
        for &si in &s {
            values.push(feynman_kac_price(pde, si, t_start, cfg)?.value);
        }
    }
    Ok(PriceSurface {
        t,
        s,
        values_normalized: values,
        s_max: pf.model.s_max,
        maturity: pf.model.maturity,
        source: SurfaceSource::Mc,
    })
}

pub fn price(a: &PriceArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let pf = ParamFile::load(&a.params)?;
    let m = pf.model;
    let pde = pde_for(&pf, a.model)?;
    let tenor = a.tenor.unwrap_or(m.maturity);
    if !(tenor > 0.0 && tenor <= m.maturity) {
        return Err(CliError::Usage(format!(
            "tenor {tenor} must lie in (0, {}]",
            m.maturity
        )));
    }
    if !(0.0..=m.s_max).contains(&a.spot) {
        return Err(CliError::Usage(format!(
            "spot {} must lie in [0, s_max {}]",
            a.spot, m.s_max
        )));
    }

    let mut std_error = None;
    let (quote, surface) = if let Some(path) = &a.weights {
        let (arch, params) = read_weights(path)?;
        let tf = TrialFunction::new(arch, params, m.strike_ratio())?;
        let surface = PriceSurface::from_trial(
            &tf,
            &PriceSurface::uniform_nodes(a.surface_grid.n_t),
            &PriceSurface::uniform_nodes(a.surface_grid.n_s),
            &m,
        );
        (quote_at(&surface, a.spot, tenor, m.strike)?, Some(surface))
    } else if a.mc {
        let cfg = mc_config(&a.mc_args, a.seed, a.run.threads);
        let e = feynman_kac_price(&pde, a.spot / m.s_max, m.maturity - tenor, &cfg)?;
        std_error = Some(e.std_error * m.s_max);
        let quote = OptionQuote {
            spot_dollars: a.spot,
            strike_dollars: m.strike,
            tenor_years: tenor,
            value_dollars: e.value * m.s_max,
            source: SurfaceSource::Mc,
        };
        let surface = match a.surface_out {
            Some(_) => Some(mc_surface(&pde, &pf, a.surface_grid, &cfg)?),
            None => None,
        };
        (quote, surface)
    } else {
        let (grid, opts) = fd_grid(&a.fd_args)?;
        let sol = solve_with(&pde, grid, opts)?;
        let surface = PriceSurface::from_fd(&sol, &m);
        (quote_at(&surface, a.spot, tenor, m.strike)?, Some(surface))
    };

    match std_error {
        Some(se) => println!("{quote} std_error={se:.4}"),
        None => println!("{quote}"),
    }
    if let Some(path) = &a.out {
        write_with(path, artifacts, |w| {
            writeln!(
                w,
                "spot_dollars,strike_dollars,tenor_years,value_dollars,std_error_dollars,source"
            )?;
            writeln!(
                w,
                "{:?},{:?},{:?},{:?},{},{}",
                quote.spot_dollars,
                quote.strike_dollars,
                quote.tenor_years,
                quote.value_dollars,
                std_error.map_or_else(|| "NA".to_string(), |se| format!("{se:?}")),
                quote.source
            )
        })?;
    }
    if let (Some(path), Some(surface)) = (&a.surface_out, &surface) {
        write_with(path, artifacts, |w| surface.write_csv(w))?;
    }
    Ok(())
}

/// One line of the validation table.
#[derive(Debug, Clone)]
struct Probe {
    check: &'static str,
    t: f64,
    s: f64,
    reference: f64,
    candidate: f64,
    tolerance: f64,
}

impl Probe {
    fn diff(&self) -> f64 {
        (self.candidate - self.reference).abs()
    }

    fn pass(&self) -> bool {
        self.diff() <= self.tolerance
    }
}

/// Closed-form value of the Black–Scholes reduction, using the root mean
/// square volatility over the remaining life.
pub fn reduction_closed_form(pde: &PdeProblem, t: f64, s: f64) -> f64 {
    if t <= 0.0 {
        return pde.initial_condition(s);
    }
    let life = pde.maturity * t;
    let start = pde.calendar_time(t);
    let var = pde.sigma_d_sq * pde.sentiment.integral(start, pde.maturity);
    closed_form_bs(s, pde.strike_ratio, pde.rate, (var / life).sqrt(), life)
}

fn bs_probe(pf: &ParamFile, grid: FdGrid, opts: FdOptions) -> Result<Probe, CliError> {
    let pde = build_bs_pde(&pf.model, pf.policy)?;
    let sol = solve_with(&pde, grid, opts)?;
    let mut worst = Probe {
        check: "bs-closed-form",
        t: 0.0,
        s: 0.0,
        reference: 0.0,
        candidate: 0.0,
        tolerance: BS_TOLERANCE,
    };
    for j in 1..=grid.n_t {
        for i in 0..=grid.n_s {
            let s = sol.s(i);
            if !(0.2..=0.8).contains(&s) {
                continue;
            }
            let p = Probe {
                t: sol.t(j),
                s,
                reference: reduction_closed_form(&pde, sol.t(j), s),
                candidate: sol.value(j, i),
                ..worst.clone()
            };
            if p.diff() > worst.diff() {
                worst = p;
            }
        }
    }
    Ok(worst)
}

fn mc_probes(pde: &PdeProblem, sol: &FdSolution, cfg: &McConfig) -> Result<Vec<Probe>, CliError> {
    let mut out = Vec::new();
    for &t in &PROBE_T {
        for &s in &PROBE_S {
            let e = feynman_kac_price(pde, s, pde.calendar_time(t), cfg)?;
            out.push(Probe {
                check: "fd-vs-mc",
                t,
                s,
                reference: e.value,
                candidate: sol.interpolate(t, s),
                tolerance: MC_SIGMAS * e.std_error,
            });
        }
    }
    Ok(out)
}

pub fn validate(a: &ValidateArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let pf = ParamFile::load(&a.params)?;
    let grid = FdGrid::new(a.grid.n_s, a.grid.n_t)?;
    let opts = FdOptions {
        rannacher: a.rannacher,
    };
    let mut probes = vec![bs_probe(&pf, grid, opts)?];

    let pde = build_pde(&pf.model, pf.policy)?;
    let sol = solve_with(&pde, grid, opts)?;
    let cfg = McConfig {
        n_paths: a.paths,
        n_steps: a.steps,
        seed: a.seed,
        antithetic: false,
        threads: a.run.threads,
    };
    probes.extend(mc_probes(&pde, &sol, &cfg)?);

    if let Some(path) = &a.weights {
        let (arch, params) = read_weights(path)?;
        let tf = TrialFunction::new(arch, params, pf.model.strike_ratio())?;
        let nodes: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let mut total = 0.0;
        for &t in &nodes {
            for &s in &nodes {
                total += (trial_eval(&tf, t, s) - sol.interpolate(t, s)).abs();
            }
        }
        probes.push(Probe {
            check: "pinn-mae",
            t: f64::NAN,
            s: f64::NAN,
            reference: 0.0,
            candidate: total / (nodes.len() * nodes.len()) as f64,
            tolerance: PINN_MAE_TOLERANCE,
        });
    }

    let mut table = String::from("check,t,s,reference,candidate,abs_diff,tolerance,status\n");
    for p in &probes {
        let _ = writeln!(
            table,
            "{},{},{},{:e},{:e},{:e},{:e},{}",
            p.check,
            fmt_stat(p.t),
            fmt_stat(p.s),
            p.reference,
            p.candidate,
            p.diff(),
            p.tolerance,
            if p.pass() { "pass" } else { "FAIL" }
        );
    }
    print!("{table}");
    if let Some(path) = &a.out {
        write_with(path, artifacts, |w| w.write_all(table.as_bytes()))?;
    }
    let failed = probes.iter().filter(|p| !p.pass()).count();
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} probes outside tolerance",
            probes.len()
        )));
    }
    Ok(())
}

pub fn delay(a: &DelaySweepArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let pf = ParamFile::load(&a.params)?;
    let scale = match a.tau_unit {
        TauUnit::Days => 1.0 / pf.day_count.days_per_year(),
        TauUnit::Years => 1.0,
    };
    let taus: Vec<f64> = a.taus.iter().map(|t| t * scale).collect();
    let solver = match a.solver {
        SolverKind::Fd => {
            let (grid, options) = fd_grid(&a.fd_args)?;
            SweepSolver::Fd { grid, options }
        }
        SolverKind::Mc => SweepSolver::Mc(mc_config(&a.mc_args, a.seed, a.run.threads)),
    };
    let rows = delay_sweep(&pf.model, pf.policy, &taus, a.mode, a.spot, &solver)?;

    let mut table = String::from("tau,tau_years,value_dollars,std_error_dollars\n");
    for (input, row) in a.taus.iter().zip(&rows) {
        let _ = writeln!(
            table,
            "{input},{:?},{:.4},{:.4}",
            row.tau, row.value_dollars, row.std_error_dollars
        );
    }
    print!("{table}");
    if let Some(path) = &a.out {
        write_with(path, artifacts, |w| w.write_all(table.as_bytes()))?;
    }
    Ok(())
}

pub fn compare(a: &CompareArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if a.rows == 0 || a.nodes == 0 {
        return Err(CliError::Usage("rows and nodes must be positive".into()));
    }
    let pf = ParamFile::load(&a.params)?;
    let (grid, options) = fd_grid(&a.fd_args)?;
    let t_rows: Vec<f64> = (1..=a.rows).map(|r| r as f64 / a.rows as f64).collect();
    let table = compare_models(&pf.model, pf.policy, grid, options, &t_rows, a.nodes)?;
    write_with(&a.out, artifacts, |w| table.write_csv(w))?;
    let mut buf = Vec::new();
    table
        .write_csv(&mut buf)
        .map_err(|e| CliError::io(&a.out, e))?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}

pub fn simulate(a: &SimulateArgs, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let pf = ParamFile::load(&a.params)?;
    let cfg = PathConfig {
        n_steps: a.steps,
        horizon: a.horizon.unwrap_or(pf.model.maturity),
        seed: a.seed,
        scheme: a.scheme,
    };
    let path = simulate_jump_diffusion(&pf.model, a.s0, &cfg)?;
    write_with(&a.out, artifacts, |w| path.write_csv(w))?;
    println!(
        "steps={} jumps={} s_end={}",
        a.steps,
        path.jump_times.len(),
        path.s_values.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
