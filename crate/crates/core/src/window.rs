//! Series framing, thresholds and exceedances.
//!
//! A [`SeriesWindow`] holds a core stretch of `n` observations plus `max_lag`
//! read-only buffer values on each side. Estimators only condition on core
//! positions, and for a core position `k` every lag `|t| <= max_lag` reads a
//! valid value, so no estimator ever indexes out of range.
//!
//! Core positions are 0-based throughout the API: position `k` is the
//! `(k + 1)`-th core observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A stationary sample with lag buffers on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesWindow {
    values: Vec<f64>,
    n: usize,
    max_lag: usize,
}

impl SeriesWindow {
    /// Frames `values` as `max_lag` leading buffer values, a core, and
    /// `max_lag` trailing buffer values.
    ///
    /// Raw data is trimmed rather than padded, so the core has
    /// `values.len() - 2 * max_lag` observations and must be nonempty.
    pub fn new(values: Vec<f64>, max_lag: usize) -> Result<Self> {
        let buffers = 2 * max_lag;
        if values.len() <= buffers {
            return Err(Error::TooShort {
                needed: buffers + 1,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "observation {i} is not finite"
            )));
        }
        let n = values.len() - buffers;
        Ok(Self { values, n, max_lag })
    }

    /// Number of core observations.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// All values including buffers.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Core observations only.
    pub fn core(&self) -> &[f64] {
        &self.values[self.max_lag..self.max_lag + self.n]
    }

    /// Core observation at position `k`.
    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        self.values[self.max_lag + k]
    }

    /// Observation `lag` steps away from core position `k`.
    ///
    /// Panics if `|lag| > max_lag` or `k` is not a core position.
    #[inline]
    pub fn lagged(&self, k: usize, lag: i64) -> f64 {
        assert!(k < self.n, "position {k} outside core of length {}", self.n);
        assert!(
            lag.unsigned_abs() as usize <= self.max_lag,
            "lag {lag} exceeds buffer {}",
            self.max_lag
        );
        self.values[((self.max_lag + k) as i64 + lag) as usize]
    }

    /// Checks that `lag` is a nonzero lag supported by the buffers.
    pub fn check_lag(&self, lag: i64) -> Result<()> {
        if lag == 0 || lag.unsigned_abs() as usize > self.max_lag {
            return Err(Error::InvalidInput(format!(
                "lag {lag} must be nonzero with |lag| <= {}",
                self.max_lag
            )));
        }
        Ok(())
    }

    /// Multiplies every observation by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            n: self.n,
            max_lag: self.max_lag,
        }
    }
}

/// Which exceedances define the conditioning event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `|X_0| > u`
    Absolute,
    /// `X_0 > u`
    Positive,
    /// `-X_0 > u`
    Negative,
}

impl Conditioning {
    /// Whether `value` is an exceedance of `u` under this conditioning.
    #[inline]
    pub fn admits(self, value: f64, u: f64) -> bool {
        match self {
            Conditioning::Absolute => value.abs() > u,
            Conditioning::Positive => value > u,
            Conditioning::Negative => -value > u,
        }
    }

    /// The value `|X_0|`, `X_0` or `-X_0` used to normalize lagged values.
    #[inline]
    pub fn normalizer(self, value: f64) -> f64 {
        match self {
            Conditioning::Absolute => value.abs(),
            Conditioning::Positive => value,
            Conditioning::Negative => -value,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Conditioning::Absolute => "absolute",
            Conditioning::Positive => "positive",
            Conditioning::Negative => "negative",
        }
    }
}

impl std::str::FromStr for Conditioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(Conditioning::Absolute),
            "positive" | "positive-shock" | "pos" => Ok(Conditioning::Positive),
            "negative" | "negative-shock" | "neg" => Ok(Conditioning::Negative),
            other => Err(Error::InvalidInput(format!("unknown conditioning `{other}`"))),
        }
    }
}

/// How the threshold `u` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSpec {
    /// Empirical quantile of `|X_i|` over the core.
    Quantile(f64),
    /// A fixed positive level.
    Level(f64),
}

/// Empirical `q`-quantile of ascending `sorted` data.
///
/// Position `p = 1 + q (k - 1)` among `k` order statistics, linearly
/// interpolated between neighbours.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Sorts a copy of `data` and returns its empirical `q`-quantile.
pub fn quantile_of(data: &[f64], q: f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    empirical_quantile(&sorted, q)
}

/// Resolves `spec` against the core of `w`.
pub fn resolve_threshold(w: &SeriesWindow, spec: ThresholdSpec) -> Result<f64> {
    let u = match spec {
        ThresholdSpec::Quantile(q) => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "threshold quantile must lie in (0,1), got {q}"
                )));
            }
            let abs: Vec<f64> = w.core().iter().map(|v| v.abs()).collect();
            quantile_of(&abs, q)
        }
        ThresholdSpec::Level(u) => u,
    };
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "threshold must be positive and finite, got {u}"
        )));
    }
    if !w.core().iter().any(|v| v.abs() > u) {
        return Err(Error::NoExceedances { threshold: u });
    }
    Ok(u)
}

/// Core positions whose value exceeds `u` under `conditioning`, ascending.
pub fn exceedance_indices(w: &SeriesWindow, u: f64, conditioning: Conditioning) -> Vec<usize> {
    w.core()
        .iter()
        .enumerate()
        .filter(|(_, &v)| conditioning.admits(v, u))
        .map(|(k, _)| k)
        .collect()
}

/// Which representation produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Forward,
    Backward,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Forward => "forward",
            EstimatorKind::Backward => "backward",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(EstimatorKind::Forward),
            "backward" => Ok(EstimatorKind::Backward),
            other => Err(Error::InvalidInput(format!("unknown estimator `{other}`"))),
        }
    }
}

/// A single estimated cdf value `P(Theta_t <= x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimator: EstimatorKind,
    pub conditioning: Conditioning,
    pub lag: i64,
    pub x: f64,
    pub value: f64,
    pub exceedance_count: usize,
    pub alpha_used: Option<f64>,
}

/// A scalar functional of the law of `Theta_t`, expressed through its cdf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "x", rename_all = "kebab-case")]
pub enum TailFunctional {
    /// `P(Theta_t <= x)`
    Cdf(f64),
    /// `P(Theta_t > x) = 1 - F(x)`
    Exceeds(f64),
    /// `P(|Theta_t| > x) = 1 - F(x) + F(-x)` for `x > 0`
    AbsExceeds(f64),
}

impl TailFunctional {
    /// Evaluates the functional from a cdf evaluator.
    pub fn evaluate<F>(self, mut cdf: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match self {
            TailFunctional::Cdf(x) => cdf(x),
            TailFunctional::Exceeds(x) => Ok(1.0 - cdf(x)?),
            TailFunctional::AbsExceeds(x) => {
                if !(x > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "abs-exceeds needs x > 0, got {x}"
                    )));
                }
                let upper = cdf(x)?;
                let lower = cdf(-x)?;
                Ok(1.0 - upper + lower)
            }
        }
    }

    pub fn x(self) -> f64 {
        match self {
            TailFunctional::Cdf(x) | TailFunctional::Exceeds(x) | TailFunctional::AbsExceeds(x) => x,
        }
    }

    pub fn label(self) -> String {
        match self {
            TailFunctional::Cdf(x) => format!("cdf({x})"),
            TailFunctional::Exceeds(x) => format!("exceeds({x})"),
            TailFunctional::AbsExceeds(x) => format!("abs-exceeds({x})"),
        }
    }

    /// Builds a functional from a kind name and argument.
    pub fn parse(kind: &str, x: f64) -> Result<Self> {
        match kind {
            "cdf" => Ok(TailFunctional::Cdf(x)),
            "exceeds" | "survival" => Ok(TailFunctional::Exceeds(x)),
            "abs-exceeds" | "abs-survival" => Ok(TailFunctional::AbsExceeds(x)),
            other => Err(Error::InvalidInput(format!("unknown target `{other}`"))),
        }
    }
}
