//! Flat `key = value` parameter files.
//!
//! Blank lines and `#` comments are ignored. Every key except `mu_j` and
//! `delta_j` is required; those two may be omitted or written as `NA` when no
//! jump was observed. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use jdpinn_core::estimation::{JumpDiffusionEstimate, SentimentEstimate};
use jdpinn_core::market_data::DayCount;
use jdpinn_core::model::{MarketModel, SentimentPathPolicy};

use crate::error::CliError;

const REQUIRED: [&str; 14] = [
    "mu_d",
    "sigma_d",
    "lambda",
    "k",
    "mu_p",
    "sigma_p",
    "phi0",
    "tau",
    "rate",
    "strike",
    "s_max",
    "maturity",
    "day_count",
    "policy",
];
const OPTIONAL: [&str; 2] = ["mu_j", "delta_j"];

/// Parsed parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub model: MarketModel,
    pub day_count: DayCount,
    pub policy: SentimentPathPolicy,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:?}"))
}

impl ParamFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let err = |line: usize, msg: String| {
            CliError::Data(format!("{}:{line}: {msg}", origin.display()))
        };
        let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected 'key = value', found '{line}'")))?;
            let key = k.trim().to_string();
            if !REQUIRED.contains(&key.as_str()) && !OPTIONAL.contains(&key.as_str()) {
                return Err(err(i + 1, format!("unknown key '{key}'")));
            }
            if map
                .insert(key.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(err(i + 1, format!("duplicate key '{key}'")));
            }
        }
        let missing: Vec<&str> = REQUIRED
            .iter()
            .copied()
            .filter(|k| !map.contains_key(*k))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Data(format!(
                "{}: missing keys: {}",
                origin.display(),
                missing.join(", ")
            )));
        }
        let num = |key: &str| -> Result<f64, CliError> {
            let (line, v) = &map[key];
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(*line, format!("{key}: bad number '{v}'")))
        };
        let opt = |key: &str| -> Result<Option<f64>, CliError> {
            match map.get(key) {
                None => Ok(None),
                Some((_, v)) if v.eq_ignore_ascii_case("na") => Ok(None),
                Some(_) => num(key).map(Some),
            }
        };
        let (dc_line, dc) = &map["day_count"];
        let day_count: DayCount = dc.parse().map_err(|e: String| err(*dc_line, e))?;
        let (pol_line, pol) = &map["policy"];
        let policy: SentimentPathPolicy = pol.parse().map_err(|e: String| err(*pol_line, e))?;

        let model = MarketModel {
            jd: JumpDiffusionEstimate {
                mu_d: num("mu_d")?,
                sigma_d: num("sigma_d")?,
                lambda: num("lambda")?,
                k: num("k")?,
                mu_j: opt("mu_j")?,
                delta_j: opt("delta_j")?,
                jump_count: 0,
            },
            sp: SentimentEstimate {
                mu_p: num("mu_p")?,
                sigma_p: num("sigma_p")?,
            },
            phi0: num("phi0")?,
            tau: num("tau")?,
            rate: num("rate")?,
            strike: num("strike")?,
            s_max: num("s_max")?,
            maturity: num("maturity")?,
        };
        model
            .validate()
            .map_err(|e| CliError::Data(format!("{}: {e}", origin.display())))?;
        Ok(ParamFile {
            model,
            day_count,
            policy,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Renders the file. Sentiment keys are left out when `sentiment` is
    /// `None`, which produces a deliberately incomplete file.
    pub fn render(
        jd: &JumpDiffusionEstimate,
        sentiment: Option<&SentimentEstimate>,
        contract: &Contract,
        day_count: DayCount,
        policy: SentimentPathPolicy,
    ) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("mu_d", format!("{:?}", jd.mu_d));
        kv("sigma_d", format!("{:?}", jd.sigma_d));
        kv("lambda", format!("{:?}", jd.lambda));
        kv("k", format!("{:?}", jd.k));
        kv("mu_j", fmt_opt(jd.mu_j));
        kv("delta_j", fmt_opt(jd.delta_j));
        if let Some(sp) = sentiment {
            kv("mu_p", format!("{:?}", sp.mu_p));
            kv("sigma_p", format!("{:?}", sp.sigma_p));
        }
        kv("phi0", format!("{:?}", contract.phi0));
        kv("tau", format!("{:?}", contract.tau));
        kv("rate", format!("{:?}", contract.rate));
        kv("strike", format!("{:?}", contract.strike));
        kv("s_max", format!("{:?}", contract.s_max));
        kv("maturity", format!("{:?}", contract.maturity));
        kv("day_count", day_count.to_string());
        kv("policy", policy.to_string());
        out
    }

    #[cfg(test)]
    pub fn to_text(&self) -> String {
        let m = &self.model;
        Self::render(
            &m.jd,
            Some(&m.sp),
            &Contract {
                phi0: m.phi0,
                tau: m.tau,
                rate: m.rate,
                strike: m.strike,
                s_max: m.s_max,
                maturity: m.maturity,
            },
            self.day_count,
            self.policy,
        )
    }
}

/// Contract and sentiment terms that do not come from market data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub phi0: f64,
    pub tau: f64,
    pub rate: f64,
    pub strike: f64,
    pub s_max: f64,
    pub maturity: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BTC: &str = "\
# bitcoin parameters
mu_d = -0.00241
sigma_d = 0.04132
lambda = 31.8
k = -0.002195
mu_j = NA
mu_p = 0.01033
sigma_p = 0.20934
phi0 = 0.01
tau = 0
rate = 0.04
strike = 30000
s_max = 63577
maturity = 5
day_count = 365
policy = mean-path
";

    #[test]
    fn parses_and_round_trips() {
        let p = ParamFile::parse(BTC, Path::new("btc.txt")).unwrap();
        assert_eq!(p.model.jd.lambda, 31.8);
        assert_eq!(p.model.jd.mu_j, None);
        assert_eq!(p.model.s_max, 63577.0);
        assert_eq!(p.policy, SentimentPathPolicy::MeanPath);
        let again = ParamFile::parse(&p.to_text(), Path::new("x")).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        let bad = format!("{BTC}volatility = 3\n");
        let e = ParamFile::parse(&bad, Path::new("p"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("unknown key 'volatility'"), "{e}");
        let short = BTC.replace("rate = 0.04\n", "");
        let e = ParamFile::parse(&short, Path::new("p"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("missing keys: rate"), "{e}");
        let neg = BTC.replace("strike = 30000", "strike = 70000");
        assert!(ParamFile::parse(&neg, Path::new("p")).is_err());
    }
}
