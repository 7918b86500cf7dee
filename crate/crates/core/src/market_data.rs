//! Daily price and trend ingestion, log-returns and descriptive statistics.
//!
//! Input files are two-column CSV (`date,close` or `date,value`) with ISO-8601
//! dates. A single header line is allowed and recognised by a second field
//! that does not parse as a number. Gaps in the calendar are kept as they are:
//! returns are taken between consecutive available observations.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Year fraction convention used to turn a sample into `period_years`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DayCount {
    /// Calendar span divided by 365. Used for assets that trade every day.
    #[default]
    Calendar365,
    /// Number of returns divided by 252 trading days.
    Trading252,
}

impl DayCount {
    /// Days per year under this convention.
    pub fn days_per_year(self) -> f64 {
        match self {
            DayCount::Calendar365 => 365.0,
            DayCount::Trading252 => 252.0,
        }
    }
}

impl std::str::FromStr for DayCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "365" | "calendar365" | "calendar" | "crypto" => Ok(DayCount::Calendar365),
            "252" | "trading252" | "trading" | "equity" => Ok(DayCount::Trading252),
            other => Err(format!("unknown day count '{other}' (expected 365 or 252)")),
        }
    }
}

impl std::fmt::Display for DayCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DayCount::Calendar365 => "365",
            DayCount::Trading252 => "252",
        })
    }
}

/// Dated observations with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
struct Dated {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl Dated {
    fn from_pairs(mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        rows.sort_by_key(|(d, _)| *d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDate { date: w[0].0 });
        }
        Ok(Dated {
            dates: rows.iter().map(|(d, _)| *d).collect(),
            values: rows.iter().map(|(_, v)| *v).collect(),
        })
    }
}

/// Daily closing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries(Dated);

impl PriceSeries {
    /// Builds a series from unordered `(date, close)` pairs.
    pub fn new(rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: rows.len(),
            });
        }
        if let Some((_, v)) = rows.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("close", format!("non-positive price {v}")));
        }
        Dated::from_pairs(rows).map(PriceSeries)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.0.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.0.values
    }

    pub fn len(&self) -> usize {
        self.0.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.values.is_empty()
    }
}

/// Weekly (or any cadence) search-trend values on a 0..=100 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSeries(Dated);

impl TrendSeries {
    pub fn new(rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: rows.len(),
            });
        }
        if let Some((_, v)) = rows.iter().find(|(_, v)| !(0.0..=100.0).contains(v)) {
            return Err(Error::OutOfRange {
                name: "trend value",
                value: *v,
                lo: 0.0,
                hi: 100.0,
            });
        }
        Dated::from_pairs(rows).map(TrendSeries)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.0.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn len(&self) -> usize {
        self.0.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.values.is_empty()
    }
}

/// Continuously compounded returns and the span of time they cover.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub returns: Vec<f64>,
    pub period_years: f64,
}

/// Summary statistics in the layout of a standard returns table.
///
/// Skewness and kurtosis use population central moments, kurtosis is raw
/// (a normal sample gives 3). Both are `NaN` when the sample has zero spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

fn read_dated_csv(path: &Path, positive: bool) -> Result<Vec<(NaiveDate, f64)>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let value = record[1].parse::<f64>();
        if idx == 0 && value.is_err() {
            continue; // header
        }
        let value = value.map_err(|_| parse_err(line, format!("bad number '{}'", &record[1])))?;
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| parse_err(line, format!("bad date '{}'", &record[0])))?;
        if positive && !(value > 0.0) {
            return Err(Error::NonPositivePrice {
                path: path.to_path_buf(),
                line,
                value,
            });
        }
        rows.push((date, value));
    }
    Ok(rows)
}

/// Reads a `date,close` file.
pub fn load_price_csv(path: impl AsRef<Path>) -> Result<PriceSeries> {
    PriceSeries::new(read_dated_csv(path.as_ref(), true)?)
}

/// Reads a `date,value` trend file.
pub fn load_trend_csv(path: impl AsRef<Path>) -> Result<TrendSeries> {
    TrendSeries::new(read_dated_csv(path.as_ref(), false)?)
}

fn period_years(dates: &[NaiveDate], day_count: DayCount) -> f64 {
    match day_count {
        DayCount::Calendar365 => {
            let span = (dates[dates.len() - 1] - dates[0]).num_days();
            span as f64 / 365.0
        }
        DayCount::Trading252 => (dates.len() - 1) as f64 / 252.0,
    }
}

fn returns_of(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
}

/// Log-returns `ln(close[i+1] / close[i])` of a price series.
pub fn log_returns(series: &PriceSeries, day_count: DayCount) -> ReturnSeries {
    ReturnSeries {
        returns: returns_of(series.closes()),
        period_years: period_years(series.dates(), day_count),
    }
}

/// Log-returns of a trend series. A zero reading has no logarithm and is
/// rejected.
pub fn trend_log_returns(series: &TrendSeries, day_count: DayCount) -> Result<ReturnSeries> {
    if let Some(pos) = series.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::invalid(
            "trend value",
            format!("zero reading on {} has no log-return", series.dates()[pos]),
        ));
    }
    Ok(ReturnSeries {
        returns: returns_of(series.values()),
        period_years: period_years(series.dates(), day_count),
    })
}

/// Quantile by linear interpolation between order statistics: position
/// `h = (n - 1) p`, value `x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Descriptive statistics of a return sample.
pub fn describe(returns: &ReturnSeries) -> Result<DescriptiveStats> {
    let x = &returns.returns;
    let n = x.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (f64::NAN, f64::NAN)
    };

    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(DescriptiveStats {
        count: n,
        mean,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        std_dev,
        skewness,
        kurtosis,
    })
}
