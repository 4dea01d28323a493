//! Bootstrap confidence intervals for pre-asymptotic tail probabilities.
//!
//! Two schemes are available:
//!
//! - the stationary bootstrap, which concatenates blocks with uniform start
//!   points and geometric lengths (wrapping around the end of the core) and
//!   re-applies the estimator to the resampled series;
//! - the multiplier block bootstrap, which splits the first `m * r` core
//!   positions into `m` blocks of length `r` and reweights each block's
//!   contribution to every sum by `1 + xi_j`.
//!
//! Both keep the threshold fixed at the value resolved on the original
//! sample. Intervals are reflected around the point estimate, or rescaled
//! from a lower threshold when exceedances over the target threshold are
//! scarce.

use rand::Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{backward_value, check_alpha, Exceedances, RatioSums};
use crate::rng::{self, StreamRng};
use crate::window::{
    empirical_quantile, resolve_threshold, Conditioning, EstimatorKind, SeriesWindow,
    TailFunctional, ThresholdSpec,
};

/// Attempts per replicate before it is counted as discarded.
pub const MAX_REDRAWS: usize = 10;

/// Largest tolerated share of discarded replicates.
pub const MAX_DISCARDED_SHARE: f64 = 0.2;

/// Law of the multipliers `xi_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "value", rename_all = "kebab-case")]
pub enum MultiplierLaw {
    StandardNormal,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Every multiplier equals the given constant. Only meant for tests:
    /// it does not have mean 0 and variance 1.
    PointMass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Geometric block lengths with success probability `p` (mean `1 / p`).
    Stationary { p: f64 },
    /// Fixed blocks of length `block`.
    Multiplier { block: usize, law: MultiplierLaw },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapScheme {
    pub kind: SchemeKind,
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapScheme {
    pub fn stationary(mean_block: f64, replicates: usize, seed: u64) -> Self {
        Self {
            kind: SchemeKind::Stationary { p: 1.0 / mean_block },
            replicates,
            seed,
        }
    }

    pub fn multiplier(block: usize, replicates: usize, seed: u64) -> Self {
        Self {
            kind: SchemeKind::Multiplier {
                block,
                law: MultiplierLaw::StandardNormal,
            },
            replicates,
            seed,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SchemeKind::Stationary { .. } => "stationary",
            SchemeKind::Multiplier { .. } => "multiplier",
        }
    }

    /// Block length (mean block length for the stationary scheme).
    pub fn block(&self) -> f64 {
        match self.kind {
            SchemeKind::Stationary { p } => 1.0 / p,
            SchemeKind::Multiplier { block, .. } => block as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            SchemeKind::Stationary { p } if !(p > 0.0 && p <= 1.0) => {
                return Err(Error::InvalidInput(format!("p must lie in (0, 1], got {p}")))
            }
            SchemeKind::Multiplier { block: 0, .. } => {
                return Err(Error::InvalidInput("block length must be >= 1".into()))
            }
            _ => {}
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("need at least one replicate".into()));
        }
        Ok(())
    }
}

/// Copies `total` values from `core` following `(start, length)` blocks.
///
/// Starts are 0-based core positions; reading past the end of the core
/// continues from its beginning.
pub fn wrap_blocks<I>(core: &[f64], blocks: I, total: usize) -> Vec<f64>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let n = core.len();
    let mut out = Vec::with_capacity(total);
    for (start, len) in blocks {
        for j in 0..len {
            if out.len() == total {
                return out;
            }
            out.push(core[(start + j) % n]);
        }
    }
    out
}

fn stationary_resample_rng(w: &SeriesWindow, p: f64, rng: &mut StreamRng) -> Result<SeriesWindow> {
    let n = w.len();
    let total = n + 2 * w.max_lag();
    let geometric = Geometric::new(p).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut out = Vec::with_capacity(total);
    let core = w.core();
    while out.len() < total {
        let start = rng.random_range(0..n);
        let len = 1 + geometric.sample(rng) as usize;
        for j in 0..len.min(total - out.len()) {
            out.push(core[(start + j) % n]);
        }
    }
    SeriesWindow::new(out, w.max_lag())
}

/// One stationary-bootstrap pseudo-series with the same framing as `w`.
///
/// Draws `n + 2 * max_lag` values from the core and frames them with
/// `max_lag` buffer values on each side.
pub fn stationary_resample(w: &SeriesWindow, p: f64, seed: u64) -> Result<SeriesWindow> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("p must lie in (0, 1], got {p}")));
    }
    stationary_resample_rng(w, p, &mut rng::root(seed))
}

/// Partition of the first `blocks * block_len` core positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub block_len: usize,
    pub blocks: usize,
}

impl BlockLayout {
    /// `floor(n / block_len)` blocks; trailing positions are dropped.
    pub fn new(n: usize, block_len: usize) -> Result<Self> {
        if block_len == 0 || n / block_len == 0 {
            return Err(Error::InvalidInput(format!(
                "block length {block_len} leaves no complete block in {n} observations"
            )));
        }
        Ok(Self {
            block_len,
            blocks: n / block_len,
        })
    }

    pub fn covered(&self) -> usize {
        self.blocks * self.block_len
    }

    #[inline]
    pub fn block_of(&self, k: usize) -> usize {
        k / self.block_len
    }
}

fn draw_multipliers(m: usize, law: MultiplierLaw, rng: &mut StreamRng) -> Vec<f64> {
    match law {
        MultiplierLaw::StandardNormal => (0..m).map(|_| rng.sample(StandardNormal)).collect(),
        MultiplierLaw::Rademacher => (0..m)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
        MultiplierLaw::PointMass(c) => vec![c; m],
    }
}

/// `m` iid multipliers from `law`.
pub fn multiplier_weights(m: usize, law: MultiplierLaw, seed: u64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one block".into()));
    }
    Ok(draw_multipliers(m, law, &mut rng::root(seed)))
}

/// Multiplier-bootstrap statistics for one threshold.
struct MultiplierFrame<'a> {
    exc: Exceedances<'a>,
    layout: BlockLayout,
}

impl<'a> MultiplierFrame<'a> {
    fn new(w: &'a SeriesWindow, u: f64, layout: BlockLayout) -> Result<Self> {
        if layout.covered() > w.len() {
            return Err(Error::InvalidInput(format!(
                "{} blocks of length {} exceed the core length {}",
                layout.blocks,
                layout.block_len,
                w.len()
            )));
        }
        Ok(Self {
            exc: Exceedances::over_prefix(w, u, layout.covered())?,
            layout,
        })
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.layout.blocks {
            return Err(Error::InvalidInput(format!(
                "expected {} multipliers, got {}",
                self.layout.blocks,
                xi.len()
            )));
        }
        Ok(())
    }

    fn forward(&self, lag: i64, x: f64, conditioning: Conditioning, xi: &[f64]) -> Result<f64> {
        let layout = self.layout;
        let sums = self
            .exc
            .forward_sums(lag, x, conditioning, |k| 1.0 + xi[layout.block_of(k)]);
        ratio(sums).map(|(n, d)| n / d)
    }

    fn hill(&self, xi: &[f64]) -> Result<f64> {
        let layout = self.layout;
        let sums = self.exc.hill_sums(|k| 1.0 + xi[layout.block_of(k)]);
        // both the weighted count and the weighted log-excess must be positive
        if !(sums.num > 0.0 && sums.den > 0.0) {
            return Err(Error::ZeroDenominator);
        }
        let alpha = sums.num / sums.den;
        if alpha.is_finite() {
            Ok(alpha)
        } else {
            Err(Error::ZeroDenominator)
        }
    }

    fn backward(
        &self,
        lag: i64,
        x: f64,
        conditioning: Conditioning,
        xi: &[f64],
        alpha: f64,
    ) -> Result<f64> {
        let layout = self.layout;
        let sums = self
            .exc
            .backward_sums(lag, x, alpha, conditioning, |k| 1.0 + xi[layout.block_of(k)]);
        ratio(sums)?;
        Ok(backward_value(sums, x))
    }

    fn functional(
        &self,
        kind: EstimatorKind,
        lag: i64,
        functional: TailFunctional,
        conditioning: Conditioning,
        xi: &[f64],
        alpha_override: Option<f64>,
    ) -> Result<f64> {
        match kind {
            EstimatorKind::Forward => {
                functional.evaluate(|x| self.forward(lag, x, conditioning, xi))
            }
            EstimatorKind::Backward => {
                let alpha = match alpha_override {
                    Some(a) => a,
                    None => self.hill(xi)?,
                };
                functional.evaluate(|x| self.backward(lag, x, conditioning, xi, alpha))
            }
        }
    }
}

fn ratio(sums: RatioSums) -> Result<(f64, f64)> {
    if sums.den > 0.0 && sums.den.is_finite() {
        Ok((sums.num, sums.den))
    } else {
        Err(Error::ZeroDenominator)
    }
}

/// Multiplier-bootstrap forward estimate of `P(Theta_t <= x)`.
pub fn multiplier_forward(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    x: f64,
    conditioning: Conditioning,
    layout: BlockLayout,
    xi: &[f64],
) -> Result<f64> {
    w.check_lag(lag)?;
    let frame = MultiplierFrame::new(w, u, layout)?;
    frame.check_xi(xi)?;
    frame.forward(lag, x, conditioning, xi)
}

/// Multiplier-bootstrap Hill estimate.
pub fn multiplier_hill(w: &SeriesWindow, u: f64, layout: BlockLayout, xi: &[f64]) -> Result<f64> {
    let frame = MultiplierFrame::new(w, u, layout)?;
    frame.check_xi(xi)?;
    frame.hill(xi)
}

/// Multiplier-bootstrap backward estimate of `P(Theta_t <= x)`.
///
/// The tail index is re-estimated with the same multipliers unless
/// `alpha_override` is given.
#[allow(clippy::too_many_arguments)]
pub fn multiplier_backward(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    x: f64,
    conditioning: Conditioning,
    layout: BlockLayout,
    xi: &[f64],
    alpha_override: Option<f64>,
) -> Result<f64> {
    w.check_lag(lag)?;
    if let Some(a) = alpha_override {
        check_alpha(a)?;
    }
    let frame = MultiplierFrame::new(w, u, layout)?;
    frame.check_xi(xi)?;
    let alpha = match alpha_override {
        Some(a) => a,
        None => frame.hill(xi)?,
    };
    frame.backward(lag, x, conditioning, xi, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CiMethod {
    /// `[2 theta - b, 2 theta - a]`
    Reflected,
    /// Quantiles taken at a lower threshold and scaled by `sqrt(ratio)`.
    Rescaled {
        low_threshold: f64,
        low_estimate: f64,
        ratio: f64,
    },
}

/// A bootstrap confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: CiMethod,
    pub point_estimate: f64,
    /// Replicate quantiles at `(1 - level) / 2` and `(1 + level) / 2`.
    pub quantiles: (f64, f64),
    pub scheme: Option<BootstrapScheme>,
    pub replicates_used: usize,
    pub discarded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<Vec<f64>>,
}

impl BootstrapCI {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("level must lie in (0, 1), got {level}")))
    }
}

fn replicate_quantiles(replicates: &[f64], level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if replicates.len() < 2 {
        return Err(Error::TooFewReplicates(replicates.len()));
    }
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((
        empirical_quantile(&sorted, (1.0 - level) / 2.0),
        empirical_quantile(&sorted, (1.0 + level) / 2.0),
    ))
}

/// Reflected interval `[2 theta - b, 2 theta - a]` from replicate quantiles.
pub fn ci_reflected(replicates: &[f64], point_estimate: f64, level: f64) -> Result<BootstrapCI> {
    let (a, b) = replicate_quantiles(replicates, level)?;
    Ok(BootstrapCI {
        level,
        lower: 2.0 * point_estimate - b,
        upper: 2.0 * point_estimate - a,
        method: CiMethod::Reflected,
        point_estimate,
        quantiles: (a, b),
        scheme: None,
        replicates_used: replicates.len(),
        discarded: 0,
        draws: None,
    })
}

/// Interval for the high-threshold quantity built from the bootstrap
/// quantiles `(a, b)` at a lower threshold:
/// `[sqrt(r) (low - b) + high, sqrt(r) (low - a) + high]`, where `r` is
/// the ratio of exceedance counts (low over high).
pub fn ci_rescaled(
    high_estimate: f64,
    low_estimate: f64,
    low_quantiles: (f64, f64),
    ratio: f64,
    level: f64,
) -> Result<BootstrapCI> {
    check_level(level)?;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidRatio(ratio));
    }
    let (a, b) = low_quantiles;
    if !(a <= b) {
        return Err(Error::InvalidInput(format!("quantiles out of order: {a} > {b}")));
    }
    let scale = ratio.sqrt();
    Ok(BootstrapCI {
        level,
        lower: scale * (low_estimate - b) + high_estimate,
        upper: scale * (low_estimate - a) + high_estimate,
        method: CiMethod::Rescaled {
            low_threshold: f64::NAN,
            low_estimate,
            ratio,
        },
        point_estimate: high_estimate,
        quantiles: (a, b),
        scheme: None,
        replicates_used: 0,
        discarded: 0,
        draws: None,
    })
}

/// What to bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiRequest {
    pub threshold: ThresholdSpec,
    pub lag: i64,
    pub functional: TailFunctional,
    pub estimator: EstimatorKind,
    pub conditioning: Conditioning,
    pub scheme: BootstrapScheme,
    pub level: f64,
    /// Lower threshold for the rescaled interval.
    pub rescale_from: Option<ThresholdSpec>,
    pub keep_draws: bool,
}

/// Point estimate of a functional at threshold `u` (Hill tail index for the
/// backward estimator).
pub fn point_estimate(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    functional: TailFunctional,
    estimator: EstimatorKind,
    conditioning: Conditioning,
) -> Result<f64> {
    let exc = Exceedances::new(w, u)?;
    let alpha = match estimator {
        EstimatorKind::Forward => None,
        EstimatorKind::Backward => Some(exc.hill()?.alpha),
    };
    exc.functional(estimator, lag, functional, conditioning, alpha)
}

/// Bootstrap replicates of a functional with the threshold held at `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateDraws {
    pub values: Vec<f64>,
    pub discarded: usize,
}

fn is_degenerate(e: &Error) -> bool {
    matches!(
        e,
        Error::ZeroDenominator | Error::NoExceedances { .. } | Error::DegenerateLogs
    )
}

/// Runs the replicates of `scheme` and collects the functional values.
pub fn replicate_draws(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    functional: TailFunctional,
    estimator: EstimatorKind,
    conditioning: Conditioning,
    scheme: &BootstrapScheme,
) -> Result<ReplicateDraws> {
    scheme.validate()?;
    w.check_lag(lag)?;
    let outcomes: Vec<Result<Option<f64>>> = match scheme.kind {
        SchemeKind::Multiplier { block, law } => {
            let layout = BlockLayout::new(w.len(), block)?;
            let frame = MultiplierFrame::new(w, u, layout)?;
            (0..scheme.replicates)
                .into_par_iter()
                .map(|b| {
                    let mut rng = rng::stream(scheme.seed, b as u64);
                    for _ in 0..MAX_REDRAWS {
                        let xi = draw_multipliers(layout.blocks, law, &mut rng);
                        match frame.functional(estimator, lag, functional, conditioning, &xi, None) {
                            Ok(v) => return Ok(Some(v)),
                            Err(e) if is_degenerate(&e) => continue,
                            Err(e) => return Err(e),
                        }
                    }
                    Ok(None)
                })
                .collect()
        }
        SchemeKind::Stationary { p } => (0..scheme.replicates)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng::stream(scheme.seed, b as u64);
                for _ in 0..MAX_REDRAWS {
                    let ws = stationary_resample_rng(w, p, &mut rng)?;
                    match point_estimate(&ws, u, lag, functional, estimator, conditioning) {
                        Ok(v) => return Ok(Some(v)),
                        Err(e) if is_degenerate(&e) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Ok(None)
            })
            .collect(),
    };
    let mut values = Vec::with_capacity(scheme.replicates);
    let mut discarded = 0;
    for outcome in outcomes {
        match outcome? {
            Some(v) => values.push(v),
            None => discarded += 1,
        }
    }
    if discarded as f64 > MAX_DISCARDED_SHARE * scheme.replicates as f64 {
        return Err(Error::TooManyDiscarded {
            discarded,
            total: scheme.replicates,
        });
    }
    Ok(ReplicateDraws { values, discarded })
}

/// Point estimate and bootstrap interval for one functional.
pub fn bootstrap_ci(w: &SeriesWindow, req: &CiRequest) -> Result<BootstrapCI> {
    check_level(req.level)?;
    let u = resolve_threshold(w, req.threshold)?;
    let theta = point_estimate(w, u, req.lag, req.functional, req.estimator, req.conditioning)?;
    let boot_u = match req.rescale_from {
        Some(spec) => resolve_threshold(w, spec)?,
        None => u,
    };
    let draws = replicate_draws(
        w,
        boot_u,
        req.lag,
        req.functional,
        req.estimator,
        req.conditioning,
        &req.scheme,
    )?;
    let mut ci = match req.rescale_from {
        None => ci_reflected(&draws.values, theta, req.level)?,
        Some(_) => {
            let low = point_estimate(w, boot_u, req.lag, req.functional, req.estimator, req.conditioning)?;
            let k_high = Exceedances::new(w, u)?.count(req.conditioning);
            let k_low = Exceedances::new(w, boot_u)?.count(req.conditioning);
            let quantiles = replicate_quantiles(&draws.values, req.level)?;
            let mut ci = ci_rescaled(theta, low, quantiles, k_low as f64 / k_high as f64, req.level)?;
            if let CiMethod::Rescaled { low_threshold, .. } = &mut ci.method {
                *low_threshold = boot_u;
            }
            ci
        }
    };
    ci.scheme = Some(req.scheme);
    ci.replicates_used = draws.values.len();
    ci.discarded = draws.discarded;
    if req.keep_draws {
        ci.draws = Some(draws.values);
    }
    Ok(ci)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{backward_cdf, forward_cdf, hill_alpha};

    fn fixture() -> SeriesWindow {
        SeriesWindow::new(vec![0.5, 2.0, 10.0, -4.0, 1.0, 6.0, -12.0, 3.0, 7.0], 1).unwrap()
    }

    #[test]
    fn wrap_rule_continues_from_the_start() {
        let v = wrap_blocks(&[1.0, 2.0, 3.0], [(1, 5)], 5);
        assert_eq!(v, vec![2.0, 3.0, 1.0, 2.0, 3.0]);
        let v = wrap_blocks(&[1.0, 2.0, 3.0], [(2, 2), (0, 9)], 4);
        assert_eq!(v, vec![3.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn stationary_resample_is_seeded_and_framed() {
        let w = fixture();
        let a = stationary_resample(&w, 0.3, 17).unwrap();
        let b = stationary_resample(&w, 0.3, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), w.len());
        assert_eq!(a.max_lag(), 1);
        assert!(a.values().iter().all(|v| w.core().contains(v)));
        assert!(stationary_resample(&w, 0.0, 1).is_err());
    }

    #[test]
    fn multiplier_weights_edge_cases() {
        assert_eq!(multiplier_weights(4, MultiplierLaw::PointMass(0.0), 1).unwrap(), vec![0.0; 4]);
        assert!(multiplier_weights(0, MultiplierLaw::StandardNormal, 1).is_err());
        let xi = multiplier_weights(10_000, MultiplierLaw::StandardNormal, 2).unwrap();
        let mean = xi.iter().sum::<f64>() / 1e4;
        let var = xi.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9999.0;
        assert!(mean.abs() < 0.04 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    }

    #[test]
    fn multiplier_statistics_reduce_to_plain_ones() {
        let w = fixture();
        let layout = BlockLayout::new(7, 7).unwrap();
        let f = multiplier_forward(&w, 5.0, 1, 0.0, Conditioning::Absolute, layout, &[0.0]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        let h = multiplier_hill(&w, 5.0, layout, &[0.0]).unwrap();
        assert_eq!(h, hill_alpha(&w, 5.0).unwrap().alpha);
        let b = multiplier_backward(&w, 5.0, 1, 1.0, Conditioning::Absolute, layout, &[0.0], Some(1.0)).unwrap();
        assert!((b - 0.877_777_777_777_777_8).abs() < 1e-12);
        // one block: any multiplier above -1 cancels
        let h2 = multiplier_hill(&w, 5.0, layout, &[0.5]).unwrap();
        assert!((h2 - h).abs() < 1e-12);
        let f2 = multiplier_forward(&w, 5.0, 1, 0.0, Conditioning::Absolute, layout, &[0.5]).unwrap();
        assert!((f2 - 2.0 / 3.0).abs() < 1e-12);
        let b2 = multiplier_backward(&w, 5.0, 1, f64::INFINITY, Conditioning::Absolute, layout, &[0.3], None).unwrap();
        assert_eq!(b2, 1.0);
    }

    #[test]
    fn multiplier_drops_trailing_positions() {
        // blocks of 3 cover positions 0..6; position 6 (value 3) is dropped
        let w = fixture();
        let layout = BlockLayout::new(7, 3).unwrap();
        assert_eq!(layout.covered(), 6);
        let prefix = SeriesWindow::new(w.values()[..8].to_vec(), 1).unwrap();
        let f = multiplier_forward(&w, 5.0, 1, 0.0, Conditioning::Absolute, layout, &[0.0, 0.0]).unwrap();
        assert_eq!(f, forward_cdf(&prefix, 5.0, 1, 0.0, Conditioning::Absolute).unwrap().value);
        let h = hill_alpha(&prefix, 5.0).unwrap().alpha;
        let b = multiplier_backward(&w, 5.0, 1, 0.5, Conditioning::Absolute, layout, &[0.0, 0.0], None).unwrap();
        assert_eq!(b, backward_cdf(&prefix, 5.0, 1, 0.5, h, Conditioning::Absolute).unwrap().value);
    }

    #[test]
    fn negative_total_weight_is_degenerate() {
        let w = fixture();
        let layout = BlockLayout::new(7, 7).unwrap();
        assert!(matches!(
            multiplier_hill(&w, 5.0, layout, &[-1.5]),
            Err(Error::ZeroDenominator)
        ));
        assert!(matches!(
            multiplier_forward(&w, 5.0, 1, 0.0, Conditioning::Absolute, layout, &[-1.0]),
            Err(Error::ZeroDenominator)
        ));
        assert!(multiplier_hill(&w, 5.0, layout, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn reflected_interval_arithmetic() {
        let reps = [0.2, 0.2, 0.2, 0.3, 0.4, 0.4, 0.4];
        let ci = ci_reflected(&reps, 0.25, 0.5).unwrap();
        assert!((ci.lower - 0.10).abs() < 1e-12 && (ci.upper - 0.30).abs() < 1e-12);
        let ci = ci_reflected(&[0.7; 5], 0.7, 0.95).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.7, 0.7));
        assert!(matches!(ci_reflected(&[0.1], 0.1, 0.9), Err(Error::TooFewReplicates(1))));
        assert!(ci_reflected(&[0.1, 0.2], 0.1, 1.0).is_err());
    }

    #[test]
    fn reflected_interval_of_normal_draws() {
        use rand_distr::Normal;
        let mut rng = rng::root(4);
        let normal = Normal::new(0.4, 0.05).unwrap();
        let reps: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
        let ci = ci_reflected(&reps, 0.4, 0.95).unwrap();
        assert!(ci.contains(0.4));
        let width = 2.0 * 1.96 * 0.05;
        assert!((ci.width() - width).abs() < 0.15 * width, "{}", ci.width());
    }

    #[test]
    fn rescaled_interval_arithmetic() {
        let ci = ci_rescaled(0.3, 0.35, (0.30, 0.40), 4.0, 0.95).unwrap();
        assert!((ci.lower - 0.20).abs() < 1e-12 && (ci.upper - 0.40).abs() < 1e-12);
        let ci = ci_rescaled(0.3, 0.3, (0.25, 0.32), 1.0, 0.95).unwrap();
        assert!((ci.lower - (0.3 - 0.02)).abs() < 1e-12);
        assert!((ci.upper - (0.3 + 0.05)).abs() < 1e-12);
        assert!(matches!(ci_rescaled(0.3, 0.3, (0.2, 0.4), 0.0, 0.9), Err(Error::InvalidRatio(_))));
    }

    fn garch_window(seed: u64) -> SeriesWindow {
        use crate::simulators::{simulate, ModelSpec, SimulationPlan};
        let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 2010, seed)).unwrap();
        SeriesWindow::new(x, 5).unwrap()
    }

    fn request(scheme: BootstrapScheme, estimator: EstimatorKind) -> CiRequest {
        CiRequest {
            threshold: ThresholdSpec::Quantile(0.95),
            lag: 1,
            functional: TailFunctional::AbsExceeds(1.0),
            estimator,
            conditioning: Conditioning::Absolute,
            scheme,
            level: 0.95,
            rescale_from: None,
            keep_draws: true,
        }
    }

    #[test]
    fn zero_multipliers_give_a_degenerate_interval() {
        let w = garch_window(1);
        let scheme = BootstrapScheme {
            kind: SchemeKind::Multiplier { block: 100, law: MultiplierLaw::PointMass(0.0) },
            replicates: 20,
            seed: 0,
        };
        for est in [EstimatorKind::Forward, EstimatorKind::Backward] {
            let ci = bootstrap_ci(&w, &request(scheme, est)).unwrap();
            assert!(ci.draws.as_ref().unwrap().iter().all(|&d| d == ci.point_estimate));
            assert!((ci.lower - ci.point_estimate).abs() < 1e-15);
            assert!((ci.upper - ci.point_estimate).abs() < 1e-15);
        }
    }

    #[test]
    fn bootstrap_ci_is_seed_deterministic_and_brackets() {
        let w = garch_window(2);
        for scheme in [BootstrapScheme::multiplier(100, 200, 9), BootstrapScheme::stationary(100.0, 200, 9)] {
            let req = request(scheme, EstimatorKind::Backward);
            let a = bootstrap_ci(&w, &req).unwrap();
            let b = bootstrap_ci(&w, &req).unwrap();
            assert_eq!(a, b);
            assert!(a.lower <= a.upper);
            let mut d = a.draws.clone().unwrap();
            d.sort_by(f64::total_cmp);
            let median = empirical_quantile(&d, 0.5);
            let reflected = 2.0 * a.point_estimate - median;
            assert!(a.lower <= reflected && reflected <= a.upper);
        }
    }

    #[test]
    fn rescaled_bootstrap_uses_lower_threshold() {
        let w = garch_window(3);
        let mut req = request(BootstrapScheme::multiplier(100, 100, 5), EstimatorKind::Backward);
        req.threshold = ThresholdSpec::Quantile(0.98);
        req.rescale_from = Some(ThresholdSpec::Quantile(0.95));
        let ci = bootstrap_ci(&w, &req).unwrap();
        match ci.method {
            CiMethod::Rescaled { ratio, low_threshold, .. } => {
                assert!(ratio > 2.0 && ratio < 3.0, "{ratio}");
                assert!(low_threshold < resolve_threshold(&w, ThresholdSpec::Quantile(0.98)).unwrap());
            }
            _ => panic!("expected rescaled interval"),
        }
    }

    #[test]
    fn too_high_threshold_fails_loudly() {
        // two exceedances in a single block; most multiplier draws leave a
        // non-positive weighted count
        let mut v = vec![0.1; 400];
        v[150] = 10.0;
        v[151] = -9.0;
        let w = SeriesWindow::new(v, 1).unwrap();
        let scheme = BootstrapScheme {
            kind: SchemeKind::Multiplier { block: 100, law: MultiplierLaw::PointMass(-1.0) },
            replicates: 10,
            seed: 0,
        };
        let mut req = request(scheme, EstimatorKind::Forward);
        req.threshold = ThresholdSpec::Level(5.0);
        assert!(matches!(bootstrap_ci(&w, &req), Err(Error::TooManyDiscarded { .. })));
    }

    proptest::proptest! {
        #[test]
        fn reflected_interval_brackets_the_reflected_median(
            reps in proptest::collection::vec(-5.0f64..5.0, 2..60),
            theta in -5.0f64..5.0,
            level in 0.5f64..0.99,
        ) {
            let ci = ci_reflected(&reps, theta, level).unwrap();
            let mut sorted = reps.clone();
            sorted.sort_by(f64::total_cmp);
            let median = crate::window::empirical_quantile(&sorted, 0.5);
            let centre = 2.0 * theta - median;
            proptest::prop_assert!(ci.lower <= centre + 1e-12 && centre <= ci.upper + 1e-12);
        }
    }
}
