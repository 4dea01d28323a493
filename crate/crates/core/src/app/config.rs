//! Run options shared by the command line and TOML config files.
//!
//! Every flag has a config key of the same (kebab-case) name. Flags given on
//! the command line override the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::simulators::ModelSpec;
use crate::study::OracleThreshold;
use crate::window::{Conditioning, EstimatorKind, TailFunctional, ThresholdSpec};

/// What an input CSV holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// A `value` column, e.g. from `simulate`.
    Value,
    /// `date,price`
    Price,
    /// `date,return`
    Return,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// Input CSV
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_kind: Option<SeriesKind>,
    /// Model preset: garch-t4, sv-t2.6, sp500-garch, sp500-aparch, pg-garch, pg-aparch, iid-t4, iid-t3, iid-normal
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Explicit model parameters (config file only); wins over `model`
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_spec: Option<ModelSpec>,
    /// Asymmetric model preset compared against in `apply`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aparch: Option<String>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aparch_spec: Option<ModelSpec>,
    /// Length of a simulated series
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    /// Sample size in Monte Carlo studies
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_quantile: Option<f64>,
    #[arg(long, conflicts_with = "threshold_quantile")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_level: Option<f64>,
    /// Lags: `1,2,-1` or an inclusive range `1..5`
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags: Option<String>,
    /// Points x: `-2,-1,1,2` or `from:to:step`
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// cdf, exceeds or abs-exceeds
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// forward, backward, or a comma list where several are allowed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    /// absolute, positive or negative
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<String>,
    /// Fixed tail index for the backward estimator (default: Hill)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Clamp reported backward estimates to [0, 1]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp: Option<bool>,
    /// stationary or multiplier (comma list in study-coverage)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Block length, or a comma list in study-coverage
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    /// Bootstrap replicates
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Confidence level, or quantile level for independence references
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Lower threshold quantile for rescaled intervals
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rescale_from: Option<f64>,
    /// Monte Carlo repetitions in studies
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_replicates: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_length: Option<usize>,
    /// pooled or per-replicate
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_threshold: Option<String>,
    /// Resamples for independence references
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_reps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Options {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `over` replace those in `self`. A threshold given in
    /// `over` in either form replaces both threshold keys.
    pub fn overlay(self, over: Options) -> Result<Self> {
        let threshold_given = over.threshold_quantile.is_some() || over.threshold_level.is_some();
        let mut base = serde_json::to_value(self)?;
        let top = serde_json::to_value(over)?;
        let map = base.as_object_mut().expect("options serialize to a map");
        if threshold_given {
            map.remove("threshold-quantile");
            map.remove("threshold-level");
        }
        if let Some(top) = top.as_object() {
            for (k, v) in top {
                map.insert(k.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(base)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn threshold(&self, default_quantile: f64) -> ThresholdSpec {
        match (self.threshold_level, self.threshold_quantile) {
            (Some(u), _) => ThresholdSpec::Level(u),
            (None, Some(q)) => ThresholdSpec::Quantile(q),
            (None, None) => ThresholdSpec::Quantile(default_quantile),
        }
    }

    pub fn model_or(&self, default: &str) -> Result<ModelSpec> {
        let m = match (&self.model_spec, &self.model) {
            (Some(spec), _) => *spec,
            (None, Some(name)) => ModelSpec::preset(name)?,
            (None, None) => ModelSpec::preset(default)?,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn lags_or(&self, default: &str) -> Result<Vec<i64>> {
        parse_lags(self.lags.as_deref().unwrap_or(default))
    }

    pub fn grid_or(&self, default: &str) -> Result<Vec<f64>> {
        parse_grid(self.grid.as_deref().unwrap_or(default))
    }

    pub fn conditioning_or(&self, default: Conditioning) -> Result<Conditioning> {
        self.conditioning.as_deref().map_or(Ok(default), str::parse)
    }

    pub fn estimators_or(&self, default: &str) -> Result<Vec<EstimatorKind>> {
        split(self.estimator.as_deref().unwrap_or(default))
            .map(str::parse)
            .collect()
    }

    pub fn targets(&self, default_kind: &str, default_grid: &str) -> Result<Vec<TailFunctional>> {
        let kind = self.target.as_deref().unwrap_or(default_kind);
        self.grid_or(default_grid)?
            .into_iter()
            .map(|x| TailFunctional::parse(kind, x))
            .collect()
    }

    pub fn oracle_threshold_mode(&self) -> Result<OracleThreshold> {
        match self.oracle_threshold.as_deref().unwrap_or("pooled") {
            "pooled" => Ok(OracleThreshold::Pooled),
            "per-replicate" => Ok(OracleThreshold::PerReplicate),
            other => Err(Error::InvalidInput(format!(
                "oracle threshold must be pooled or per-replicate, got `{other}`"
            ))),
        }
    }

    pub fn blocks_or(&self, default: &str) -> Result<Vec<usize>> {
        split(self.block.as_deref().unwrap_or(default))
            .map(|s| {
                s.parse::<usize>()
                    .ok()
                    .filter(|b| *b >= 1)
                    .ok_or_else(|| Error::InvalidInput(format!("bad block length `{s}`")))
            })
            .collect()
    }
}

fn split(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// `1,2,-1`, or an inclusive range `a..b` (also `a..=b`).
pub fn parse_lags(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::InvalidInput(format!("cannot parse lags `{s}`"));
    let mut out = Vec::new();
    for part in split(s) {
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(Error::InvalidInput(format!("lags must be nonzero and non-empty: `{s}`")));
    }
    Ok(out)
}

/// `-2,-1,1,2` or `from:to:step` (inclusive of `to` up to rounding).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("cannot parse grid `{s}`"));
    let pieces: Vec<&str> = s.split(':').map(str::trim).collect();
    let out: Vec<f64> = match pieces.as_slice() {
        [from, to, step] => {
            let (a, b, h): (f64, f64, f64) = (
                from.parse().map_err(|_| bad())?,
                to.parse().map_err(|_| bad())?,
                step.parse().map_err(|_| bad())?,
            );
            if !(h > 0.0) || b < a {
                return Err(bad());
            }
            let steps = ((b - a) / h + 1e-9).floor() as usize;
            (0..=steps).map(|i| a + i as f64 * h).collect()
        }
        [_] => split(s)
            .map(|t| t.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_lags("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_lags("-2, 1,3..=4").unwrap(), vec![-2, 1, 3, 4]);
        assert!(parse_lags("0").is_err());
        assert!(parse_lags("x").is_err());
        assert_eq!(parse_grid("-2,-1,1,2").unwrap(), vec![-2.0, -1.0, 1.0, 2.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:0:1").is_err());
    }

    #[test]
    fn overlay_and_toml_round_trip() {
        let file: Options = toml::from_str(
            r#"
            threshold-level = 5.0
            lags = "1..3"
            seed = 9
            [model-spec]
            kind = "garch11"
            omega = 0.1
            alpha1 = 0.1
            beta1 = 0.8
            innovation = { law = "normal" }
            "#,
        )
        .unwrap();
        let cli = Options {
            threshold_quantile: Some(0.9),
            seed: Some(3),
            ..Default::default()
        };
        let merged = file.clone().overlay(cli).unwrap();
        assert_eq!(merged.threshold(0.95), ThresholdSpec::Quantile(0.9));
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.lags.as_deref(), Some("1..3"));
        let back: Options = toml::from_str(&merged.to_toml().unwrap()).unwrap();
        assert_eq!(back, merged);
        assert_eq!(back.hash().unwrap(), merged.hash().unwrap());
        assert!(matches!(merged.model_or("garch-t4").unwrap(), ModelSpec::Garch11 { .. }));
        assert!(toml::from_str::<Options>("bogus = 1").is_err());
    }
}
