//! Dollar surfaces, spot quotes, model comparisons and delay sweeps.
//!
//! Surfaces keep the normalized coordinates of the solvers. Dollar values are
//! `S_max · V`, dollar prices `S_max · s` and calendar time `T (1 − t)`, so the
//! row `t = 1` holds today's prices for the full contract life.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd::{solve_with, FdGrid, FdOptions, FdSolution};
use crate::model::{
    build_bs_pde, build_pde, check_range, MarketModel, PdeProblem, SentimentPathPolicy,
};
use crate::pinn::{trial_eval, TrialFunction};
use crate::simulate::{feynman_kac_price, McConfig};

/// Solver a surface or quote came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceSource {
    Pinn,
    Fd,
    Mc,
}

impl std::fmt::Display for SurfaceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SurfaceSource::Pinn => "pinn",
            SurfaceSource::Fd => "fd",
            SurfaceSource::Mc => "mc",
        })
    }
}

/// Option values on a rectangular `(t, s)` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSurface {
    /// Normalized times, ascending.
    pub t: Vec<f64>,
    /// Normalized prices, ascending.
    pub s: Vec<f64>,
    /// Row-major by time.
    pub values_normalized: Vec<f64>,
    pub s_max: f64,
    pub maturity: f64,
    pub source: SurfaceSource,
}

impl PriceSurface {
    /// Surface of an FD solution on its own lattice.
    pub fn from_fd(solution: &FdSolution, model: &MarketModel) -> Self {
        let g = solution.grid;
        PriceSurface {
            t: (0..=g.n_t).map(|j| solution.t(j)).collect(),
            s: (0..=g.n_s).map(|i| solution.s(i)).collect(),
            values_normalized: solution.values().to_vec(),
            s_max: model.s_max,
            maturity: model.maturity,
            source: SurfaceSource::Fd,
        }
    }

    /// Surface of a trial function at the given nodes.
    pub fn from_trial(tf: &TrialFunction, t: &[f64], s: &[f64], model: &MarketModel) -> Self {
        let values = t
            .iter()
            .flat_map(|&tj| s.iter().map(move |&si| trial_eval(tf, tj, si)))
            .collect();
        PriceSurface {
            t: t.to_vec(),
            s: s.to_vec(),
            values_normalized: values,
            s_max: model.s_max,
            maturity: model.maturity,
            source: SurfaceSource::Pinn,
        }
    }

    /// Uniform nodes `0, 1/n, …, 1`.
    pub fn uniform_nodes(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values_normalized[j * self.s.len() + i]
    }

    pub fn value_dollars(&self, j: usize, i: usize) -> f64 {
        self.value(j, i) * self.s_max
    }

    pub fn values_dollars(&self) -> Vec<f64> {
        self.values_normalized
            .iter()
            .map(|v| v * self.s_max)
            .collect()
    }

    /// Replaces the values from a dollar array.
    pub fn set_from_dollars(&mut self, dollars: &[f64]) {
        self.values_normalized = dollars.iter().map(|v| v / self.s_max).collect();
    }

    /// Index of the row at normalized time `t`, if the lattice has one.
    pub fn row_index(&self, t: f64) -> Option<usize> {
        self.t.iter().position(|x| (x - t).abs() <= 1e-12)
    }

    /// Writes `t,s,value_normalized,value_dollars` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,s,value_normalized,value_dollars")?;
        for (j, t) in self.t.iter().enumerate() {
            for (i, s) in self.s.iter().enumerate() {
                let v = self.value(j, i);
                writeln!(out, "{t:?},{s:?},{v:?},{:?}", v * self.s_max)?;
            }
        }
        Ok(())
    }
}

/// A single option price in dollars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionQuote {
    pub spot_dollars: f64,
    pub strike_dollars: f64,
    pub tenor_years: f64,
    pub value_dollars: f64,
    pub source: SurfaceSource,
}

impl std::fmt::Display for OptionQuote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "spot={:.2} strike={:.2} tenor={} value={:.2} source={}",
            self.spot_dollars,
            self.strike_dollars,
            self.tenor_years,
            self.value_dollars,
            self.source
        )
    }
}

fn lerp_row(surface: &PriceSurface, j: usize, s: f64) -> f64 {
    let nodes = &surface.s;
    let hi = nodes.partition_point(|x| *x < s).min(nodes.len() - 1);
    if nodes[hi] == s || hi == 0 {
        return surface.value(j, hi);
    }
    let lo = hi - 1;
    let w = (s - nodes[lo]) / (nodes[hi] - nodes[lo]);
    surface.value(j, lo) * (1.0 - w) + surface.value(j, hi) * w
}

/// Linear interpolation in price along time row `t_row`.
pub fn interpolate_spot(
    surface: &PriceSurface,
    spot_dollars: f64,
    t_row: usize,
    strike_dollars: f64,
) -> Result<OptionQuote> {
    check_range("spot", spot_dollars, 0.0, surface.s_max)?;
    if t_row >= surface.t.len() {
        return Err(Error::invalid(
            "t_row",
            format!("row {t_row} does not exist"),
        ));
    }
    let v = lerp_row(surface, t_row, spot_dollars / surface.s_max);
    Ok(OptionQuote {
        spot_dollars,
        strike_dollars,
        tenor_years: surface.t[t_row] * surface.maturity,
        value_dollars: v * surface.s_max,
        source: surface.source,
    })
}

/// Quote at an arbitrary tenor: linear in price along the two bracketing
/// time rows, then linear in time.
pub fn quote_at(
    surface: &PriceSurface,
    spot_dollars: f64,
    tenor_years: f64,
    strike_dollars: f64,
) -> Result<OptionQuote> {
    check_range("tenor", tenor_years, 0.0, surface.maturity)?;
    let t = tenor_years / surface.maturity;
    if let Some(j) = surface.row_index(t) {
        return interpolate_spot(surface, spot_dollars, j, strike_dollars);
    }
    check_range("spot", spot_dollars, 0.0, surface.s_max)?;
    let hi = surface
        .t
        .partition_point(|x| *x < t)
        .clamp(1, surface.t.len() - 1);
    let lo = hi - 1;
    let w = (t - surface.t[lo]) / (surface.t[hi] - surface.t[lo]);
    let s = spot_dollars / surface.s_max;
    let v = lerp_row(surface, lo, s) * (1.0 - w) + lerp_row(surface, hi, s) * w;
    Ok(OptionQuote {
        spot_dollars,
        strike_dollars,
        tenor_years,
        value_dollars: v * surface.s_max,
        source: surface.source,
    })
}

/// Which solver re-prices each point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepSolver {
    Fd { grid: FdGrid, options: FdOptions },
    Mc(McConfig),
}

/// How a delay changes the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMode {
    /// The sentiment level is read at `t − τ`.
    SentimentShift,
    /// The contract life shortens to `T − τ`; the sentiment timing is left
    /// alone.
    EffectiveMaturity,
}

impl std::str::FromStr for DelayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sentiment-shift" | "shift" => Ok(DelayMode::SentimentShift),
            "effective-maturity" | "maturity" => Ok(DelayMode::EffectiveMaturity),
            other => Err(format!(
                "unknown delay mode '{other}' (expected sentiment-shift or effective-maturity)"
            )),
        }
    }
}

impl std::fmt::Display for DelayMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DelayMode::SentimentShift => "sentiment-shift",
            DelayMode::EffectiveMaturity => "effective-maturity",
        })
    }
}

/// One row of a delay sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayRow {
    pub tau: f64,
    pub value_dollars: f64,
    /// Monte Carlo standard error in dollars; zero for FD.
    pub std_error_dollars: f64,
}

/// Today's price at `spot_dollars` of the contract described by `pde`.
pub fn price_today(
    pde: &PdeProblem,
    s_max: f64,
    spot_dollars: f64,
    solver: &SweepSolver,
) -> Result<(f64, f64)> {
    check_range("spot", spot_dollars, 0.0, s_max)?;
    let s = spot_dollars / s_max;
    match solver {
        SweepSolver::Fd { grid, options } => {
            let sol = solve_with(pde, *grid, *options)?;
            Ok((sol.interpolate(1.0, s) * s_max, 0.0))
        }
        SweepSolver::Mc(cfg) => {
            let e = feynman_kac_price(pde, s, 0.0, cfg)?;
            Ok((e.value * s_max, e.std_error * s_max))
        }
    }
}

/// Re-prices the contract for each delay in `taus` (years).
pub fn delay_sweep(
    model: &MarketModel,
    policy: SentimentPathPolicy,
    taus: &[f64],
    mode: DelayMode,
    spot_dollars: f64,
    solver: &SweepSolver,
) -> Result<Vec<DelayRow>> {
    for &tau in taus {
        if !(tau >= 0.0) || tau >= model.maturity {
            return Err(Error::invalid(
                "tau",
                format!("delay {tau} must lie in [0, maturity {})", model.maturity),
            ));
        }
    }
    taus.par_iter()
        .map(|&tau| {
            let mut m = *model;
            match mode {
                DelayMode::SentimentShift => m.tau = tau,
                DelayMode::EffectiveMaturity => m.maturity = model.maturity - tau,
            }
            let pde = build_pde(&m, policy)?;
            let (value, se) = price_today(&pde, m.s_max, spot_dollars, solver)?;
            Ok(DelayRow {
                tau,
                value_dollars: value,
                std_error_dollars: se,
            })
        })
        .collect()
}

/// Side-by-side dollar values of the Black–Scholes reduction and the jump
/// model at chosen time rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub s_dollars: Vec<f64>,
    pub t_rows: Vec<f64>,
    /// `bs[r][i]` is the value at `t_rows[r]`, `s_dollars[i]`.
    pub bs: Vec<Vec<f64>>,
    pub jmd: Vec<Vec<f64>>,
}

impl ComparisonTable {
    /// Writes `s_dollars,bs_t1,…,jmd_t1,…` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.t_rows.len();
        let mut header = vec!["s_dollars".to_string()];
        header.extend((1..=n).map(|r| format!("bs_t{r}")));
        header.extend((1..=n).map(|r| format!("jmd_t{r}")));
        writeln!(out, "{}", header.join(","))?;
        for (i, s) in self.s_dollars.iter().enumerate() {
            let mut row = vec![format!("{s:.2}")];
            row.extend(self.bs.iter().map(|r| format!("{:.2}", r[i])));
            row.extend(self.jmd.iter().map(|r| format!("{:.2}", r[i])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Solves both models on `grid` and samples them at `s = i / n_nodes` for
/// `i = 0..=n_nodes` on each requested time row.
pub fn compare_models(
    model: &MarketModel,
    policy: SentimentPathPolicy,
    grid: FdGrid,
    options: FdOptions,
    t_rows: &[f64],
    n_nodes: usize,
) -> Result<ComparisonTable> {
    let bs = solve_with(&build_bs_pde(model, policy)?, grid, options)?;
    let jmd = solve_with(&build_pde(model, policy)?, grid, options)?;
    let nodes = PriceSurface::uniform_nodes(n_nodes);
    let sample = |sol: &FdSolution| -> Vec<Vec<f64>> {
        t_rows
            .iter()
            .map(|&t| {
                nodes
                    .iter()
                    .map(|&s| sol.interpolate(t, s) * model.s_max)
                    .collect()
            })
            .collect()
    };
    Ok(ComparisonTable {
        s_dollars: nodes.iter().map(|s| s * model.s_max).collect(),
        t_rows: t_rows.to_vec(),
        bs: sample(&bs),
        jmd: sample(&jmd),
    })
}
