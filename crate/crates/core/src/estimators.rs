//! Point estimators of the spectral tail process.
//!
//! All estimators are ratios of sums over exceedance positions. The sums are
//! computed by [`Exceedances`] with a per-position weight so that the plain
//! estimators (weight 1) and the multiplier block bootstrap (weight
//! `1 + xi_j` on block `j`) share a single implementation.
//!
//! The backward estimator evaluates the cdf of `Theta_t` through the
//! time-change identity: for `x >= 0`
//!
//! ```text
//! F(x) = 1 - sum_i |X_{i-t}/X_i|^alpha 1(X_i/|X_{i-t}| > x, |X_i| > u) / sum_i 1(|X_i| > u)
//! ```
//!
//! and for `x < 0` the same weighted sum with `<= x` and without the `1 -`.
//! The sign-conditioned variants follow the same pattern; note that their
//! weighted numerator always runs over `X_i > u` when `x >= 0` and over
//! `X_i < -u` when `x < 0`, whatever the conditioning sign, while the
//! denominator counts the conditioning exceedances. This is the exact
//! empirical counterpart of the time-change identity and is not symmetrized.
//!
//! Backward values are never clamped: for `x < 1` they can leave `[0, 1]` in
//! finite samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::{Conditioning, EstimatorKind, SeriesWindow, TailEstimate, TailFunctional};

/// Hill estimate of the tail index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub exceedance_count: usize,
    pub threshold: f64,
}

/// Weighted numerator and denominator of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct RatioSums {
    pub num: f64,
    pub den: f64,
}

/// Absolute exceedances of a threshold over (a prefix of) the core.
#[derive(Debug, Clone)]
pub struct Exceedances<'a> {
    window: &'a SeriesWindow,
    threshold: f64,
    positions: Vec<usize>,
}

impl<'a> Exceedances<'a> {
    pub fn new(window: &'a SeriesWindow, threshold: f64) -> Result<Self> {
        Self::over_prefix(window, threshold, window.len())
    }

    /// Exceedances among the first `limit` core positions.
    pub fn over_prefix(window: &'a SeriesWindow, threshold: f64, limit: usize) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "threshold must be positive and finite, got {threshold}"
            )));
        }
        let positions = window.core()[..limit.min(window.len())]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > threshold)
            .map(|(k, _)| k)
            .collect();
        Ok(Self {
            window,
            threshold,
            positions,
        })
    }

    pub fn window(&self) -> &'a SeriesWindow {
        self.window
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Positions `i` with `|X_i| > u`.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Number of exceedances under `conditioning`.
    pub fn count(&self, conditioning: Conditioning) -> usize {
        self.positions
            .iter()
            .filter(|&&k| conditioning.admits(self.window.at(k), self.threshold))
            .count()
    }

    pub(crate) fn hill_sums<W: Fn(usize) -> f64>(&self, weight: W) -> RatioSums {
        let mut sums = RatioSums::default();
        for &k in &self.positions {
            let wt = weight(k);
            sums.num += wt;
            sums.den += wt * (self.window.at(k).abs() / self.threshold).ln();
        }
        sums
    }

    pub(crate) fn forward_sums<W: Fn(usize) -> f64>(
        &self,
        lag: i64,
        x: f64,
        conditioning: Conditioning,
        weight: W,
    ) -> RatioSums {
        let mut sums = RatioSums::default();
        for &k in &self.positions {
            let current = self.window.at(k);
            if !conditioning.admits(current, self.threshold) {
                continue;
            }
            let wt = weight(k);
            sums.den += wt;
            if self.window.lagged(k, lag) / conditioning.normalizer(current) <= x {
                sums.num += wt;
            }
        }
        sums
    }

    pub(crate) fn backward_sums<W: Fn(usize) -> f64>(
        &self,
        lag: i64,
        x: f64,
        alpha: f64,
        conditioning: Conditioning,
        weight: W,
    ) -> RatioSums {
        let u = self.threshold;
        let mut sums = RatioSums::default();
        for &k in &self.positions {
            let current = self.window.at(k);
            let wt = weight(k);
            if conditioning.admits(current, u) {
                sums.den += wt;
            }
            let earlier = self.window.lagged(k, -lag);
            if earlier == 0.0 {
                continue;
            }
            let base = match conditioning {
                Conditioning::Absolute => {
                    let ratio = current / earlier.abs();
                    let hit = if x >= 0.0 { ratio > x } else { ratio <= x };
                    if !hit {
                        continue;
                    }
                    (earlier / current).abs()
                }
                Conditioning::Positive | Conditioning::Negative => {
                    let sign = if conditioning == Conditioning::Positive {
                        1.0
                    } else {
                        -1.0
                    };
                    let ratio = sign * current / earlier;
                    let hit = if x >= 0.0 {
                        current > u && ratio > x
                    } else {
                        current < -u && ratio <= x
                    };
                    if !hit {
                        continue;
                    }
                    let base_sign = if x >= 0.0 { sign } else { -sign };
                    base_sign * earlier / current
                }
            };
            debug_assert!(base > 0.0, "weight base must be positive, got {base}");
            sums.num += wt * base.powf(alpha);
        }
        sums
    }

    /// Hill estimate from these exceedances.
    pub fn hill(&self) -> Result<AlphaEstimate> {
        if self.positions.is_empty() {
            return Err(Error::NoExceedances {
                threshold: self.threshold,
            });
        }
        let sums = self.hill_sums(|_| 1.0);
        if !(sums.den > 0.0) {
            return Err(Error::DegenerateLogs);
        }
        Ok(AlphaEstimate {
            alpha: sums.num / sums.den,
            exceedance_count: self.positions.len(),
            threshold: self.threshold,
        })
    }

    /// Forward estimate of `P(Theta_t <= x)`.
    pub fn forward_cdf(&self, lag: i64, x: f64, conditioning: Conditioning) -> Result<TailEstimate> {
        self.window.check_lag(lag)?;
        let sums = self.forward_sums(lag, x, conditioning, |_| 1.0);
        if sums.den == 0.0 {
            return Err(Error::NoExceedances {
                threshold: self.threshold,
            });
        }
        Ok(TailEstimate {
            estimator: EstimatorKind::Forward,
            conditioning,
            lag,
            x,
            value: sums.num / sums.den,
            exceedance_count: sums.den as usize,
            alpha_used: None,
        })
    }

    /// Backward estimate of `P(Theta_t <= x)` with tail index `alpha`.
    pub fn backward_cdf(
        &self,
        lag: i64,
        x: f64,
        alpha: f64,
        conditioning: Conditioning,
    ) -> Result<TailEstimate> {
        self.window.check_lag(lag)?;
        check_alpha(alpha)?;
        let sums = self.backward_sums(lag, x, alpha, conditioning, |_| 1.0);
        if sums.den == 0.0 {
            return Err(Error::NoExceedances {
                threshold: self.threshold,
            });
        }
        Ok(TailEstimate {
            estimator: EstimatorKind::Backward,
            conditioning,
            lag,
            x,
            value: backward_value(sums, x),
            exceedance_count: sums.den as usize,
            alpha_used: Some(alpha),
        })
    }

    /// Estimate of a cdf functional. `alpha` is required for the backward
    /// estimator and ignored by the forward one.
    pub fn functional(
        &self,
        kind: EstimatorKind,
        lag: i64,
        functional: TailFunctional,
        conditioning: Conditioning,
        alpha: Option<f64>,
    ) -> Result<f64> {
        match kind {
            EstimatorKind::Forward => {
                functional.evaluate(|x| Ok(self.forward_cdf(lag, x, conditioning)?.value))
            }
            EstimatorKind::Backward => {
                let alpha = alpha.ok_or_else(|| {
                    Error::InvalidInput("backward estimator needs a tail index".into())
                })?;
                functional.evaluate(|x| Ok(self.backward_cdf(lag, x, alpha, conditioning)?.value))
            }
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

pub(crate) fn backward_value(sums: RatioSums, x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - sums.num / sums.den
    } else {
        sums.num / sums.den
    }
}

/// Hill estimator over the core exceedances of `u`.
pub fn hill_alpha(w: &SeriesWindow, u: f64) -> Result<AlphaEstimate> {
    Exceedances::new(w, u)?.hill()
}

/// Share of positive exceedances among all exceedances of `u`.
pub fn p_hat(w: &SeriesWindow, u: f64) -> Result<f64> {
    let exc = Exceedances::new(w, u)?;
    let total = exc.positions().len();
    if total == 0 {
        return Err(Error::NoExceedances { threshold: u });
    }
    Ok(exc.count(Conditioning::Positive) as f64 / total as f64)
}

/// Forward estimator of `P(Theta_t <= x)`.
pub fn forward_cdf(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    x: f64,
    conditioning: Conditioning,
) -> Result<TailEstimate> {
    Exceedances::new(w, u)?.forward_cdf(lag, x, conditioning)
}

/// `1 - forward_cdf`, i.e. the frequency of `X_{i+t} / |X_i| > x` (strict).
pub fn forward_survival(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    x: f64,
    conditioning: Conditioning,
) -> Result<f64> {
    Ok(1.0 - forward_cdf(w, u, lag, x, conditioning)?.value)
}

/// Backward estimator of `P(Theta_t <= x)` with an explicit tail index.
pub fn backward_cdf(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    x: f64,
    alpha: f64,
    conditioning: Conditioning,
) -> Result<TailEstimate> {
    check_alpha(alpha)?;
    Exceedances::new(w, u)?.backward_cdf(lag, x, alpha, conditioning)
}

/// Where the backward estimator gets its tail index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaPolicy {
    /// Hill estimate at the same threshold.
    Hill,
    Fixed(f64),
}

/// Estimates over a grid of arguments and a set of lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCurve {
    pub estimator: EstimatorKind,
    pub conditioning: Conditioning,
    pub threshold: f64,
    pub alpha: Option<f64>,
    pub grid: Vec<f64>,
    pub lags: Vec<i64>,
    /// Lag-major: all grid points for `lags[0]`, then `lags[1]`, ...
    pub cells: Vec<TailEstimate>,
}

impl EstimateCurve {
    pub fn cell(&self, lag: i64, x: f64) -> Option<&TailEstimate> {
        self.cells.iter().find(|c| c.lag == lag && c.x == x)
    }
}

/// Evaluates one estimator at every `(lag, x)` cell.
pub fn sweep(
    w: &SeriesWindow,
    u: f64,
    estimator: EstimatorKind,
    conditioning: Conditioning,
    lags: &[i64],
    grid: &[f64],
    alpha_policy: AlphaPolicy,
) -> Result<EstimateCurve> {
    if grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    for &lag in lags {
        w.check_lag(lag)?;
    }
    let exc = Exceedances::new(w, u)?;
    let alpha = match (estimator, alpha_policy) {
        (EstimatorKind::Forward, _) => None,
        (EstimatorKind::Backward, AlphaPolicy::Hill) => Some(exc.hill()?.alpha),
        (EstimatorKind::Backward, AlphaPolicy::Fixed(a)) => {
            check_alpha(a)?;
            Some(a)
        }
    };
    let cells: Vec<(i64, f64)> = lags
        .iter()
        .flat_map(|&lag| grid.iter().map(move |&x| (lag, x)))
        .collect();
    let cells = cells
        .par_iter()
        .map(|&(lag, x)| match alpha {
            None => exc.forward_cdf(lag, x, conditioning),
            Some(a) => exc.backward_cdf(lag, x, a, conditioning),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateCurve {
        estimator,
        conditioning,
        threshold: u,
        alpha,
        grid: grid.to_vec(),
        lags: lags.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Core `[2, 10, -4, 1, 6, -12, 3]` with one buffer value on each side.
    fn fixture() -> SeriesWindow {
        SeriesWindow::new(vec![0.5, 2.0, 10.0, -4.0, 1.0, 6.0, -12.0, 3.0, 7.0], 1).unwrap()
    }

    #[test]
    fn hill_on_fixture() {
        let est = hill_alpha(&fixture(), 5.0).unwrap();
        let expected = 3.0 / (2f64.ln() + 1.2f64.ln() + 2.4f64.ln());
        assert!((est.alpha - expected).abs() < 1e-12);
        assert!((est.alpha - 1.71337).abs() < 1e-4);
        assert_eq!(est.exceedance_count, 3);
    }

    #[test]
    fn hill_is_one_when_every_log_excess_is_one() {
        let e = std::f64::consts::E;
        let w = SeriesWindow::new(vec![2.0 * e, -2.0 * e, 1.0, 2.0 * e], 0).unwrap();
        let est = hill_alpha(&w, 2.0).unwrap();
        assert!((est.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hill_without_exceedances_fails() {
        let err = hill_alpha(&fixture(), 50.0).unwrap_err();
        assert!(matches!(err, Error::NoExceedances { .. }));
    }

    #[test]
    fn p_hat_on_fixture() {
        assert!((p_hat(&fixture(), 5.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let w = SeriesWindow::new(vec![6.0, 1.0, 9.0], 0).unwrap();
        assert_eq!(p_hat(&w, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn forward_on_fixture() {
        let w = fixture();
        let f = forward_cdf(&w, 5.0, 1, 0.0, Conditioning::Absolute).unwrap();
        assert!((f.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.exceedance_count, 3);
        let f = forward_cdf(&w, 5.0, 1, 0.25, Conditioning::Absolute).unwrap();
        assert_eq!(f.value, 1.0);
        let f = forward_cdf(&w, 5.0, 1, 0.0, Conditioning::Positive).unwrap();
        assert_eq!(f.value, 1.0);
        let f = forward_cdf(&w, 5.0, 1, f64::INFINITY, Conditioning::Negative).unwrap();
        assert_eq!(f.value, 1.0);
    }

    #[test]
    fn forward_requires_exceedances_of_the_chosen_sign() {
        let w = SeriesWindow::new(vec![0.0, 6.0, 1.0, 0.0], 1).unwrap();
        assert!(matches!(
            forward_cdf(&w, 5.0, 1, 0.0, Conditioning::Negative),
            Err(Error::NoExceedances { .. })
        ));
    }

    #[test]
    fn backward_on_fixture() {
        let w = fixture();
        let b = backward_cdf(&w, 5.0, 1, 1.0, 1.0, Conditioning::Absolute).unwrap();
        let expected = 1.0 - (0.2 + 1.0 / 6.0) / 3.0;
        assert!((b.value - expected).abs() < 1e-12);
        assert!((b.value - 0.87778).abs() < 1e-5);
        assert_eq!(b.alpha_used, Some(1.0));
    }

    #[test]
    fn backward_limits() {
        let w = fixture();
        for cond in [Conditioning::Absolute, Conditioning::Positive, Conditioning::Negative] {
            let hi = backward_cdf(&w, 5.0, 1, f64::INFINITY, 2.0, cond).unwrap();
            assert_eq!(hi.value, 1.0);
            let lo = backward_cdf(&w, 5.0, 1, f64::NEG_INFINITY, 2.0, cond).unwrap();
            assert_eq!(lo.value, 0.0);
        }
    }

    #[test]
    fn backward_rejects_bad_alpha() {
        assert!(matches!(
            backward_cdf(&fixture(), 5.0, 1, 1.0, 0.0, Conditioning::Absolute),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn backward_sign_conditioned_by_hand() {
        // lag 1: positions 1 (X=10, prev 2), 4 (X=6, prev 1), 5 (X=-12, prev 6)
        let w = fixture();
        // positive, x >= 0: sum over X_i > u of (X_{i-1}/X_i)^a 1(X_i/X_{i-1} > x)
        let b = backward_cdf(&w, 5.0, 1, 1.0, 1.0, Conditioning::Positive).unwrap();
        assert!((b.value - (1.0 - (0.2 + 1.0 / 6.0) / 2.0)).abs() < 1e-12);
        // negative, x >= 0: (-X_{i-1}/X_i) with -X_i/X_{i-1} > x over X_i > u;
        // both candidates have positive predecessors, so nothing is admitted.
        let b = backward_cdf(&w, 5.0, 1, 0.5, 1.0, Conditioning::Negative).unwrap();
        assert_eq!(b.value, 1.0);
        // positive, x < 0: X_i < -u with X_i/X_{i-1} <= x, weight -X_{i-1}/X_i.
        // position 5: -12/6 = -2 <= -1, weight 6/12 = 0.5; denominator 2.
        let b = backward_cdf(&w, 5.0, 1, -1.0, 1.0, Conditioning::Positive).unwrap();
        assert!((b.value - 0.25).abs() < 1e-12);
        // negative, x < 0: -X_i/X_{i-1} = 2 is not <= -1.
        let b = backward_cdf(&w, 5.0, 1, -1.0, 1.0, Conditioning::Negative).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn backward_skips_zero_predecessors() {
        let w = SeriesWindow::new(vec![0.0, 0.0, 9.0, 0.0, -9.0, 0.0], 1).unwrap();
        for x in [-1.0, 0.0, 2.0] {
            let b = backward_cdf(&w, 5.0, 1, x, 2.0, Conditioning::Absolute).unwrap();
            assert_eq!(b.value, if x >= 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn larger_alpha_raises_backward_when_bases_are_small() {
        let w = fixture();
        let a1 = backward_cdf(&w, 5.0, 1, 1.0, 1.0, Conditioning::Absolute).unwrap();
        let a2 = backward_cdf(&w, 5.0, 1, 1.0, 2.0, Conditioning::Absolute).unwrap();
        assert!(a2.value >= a1.value);
    }

    #[test]
    fn sweep_cells() {
        let w = fixture();
        let c = sweep(&w, 5.0, EstimatorKind::Forward, Conditioning::Absolute, &[1], &[0.0], AlphaPolicy::Hill)
            .unwrap();
        assert_eq!(c.cells.len(), 1);
        assert!((c.cells[0].value - 2.0 / 3.0).abs() < 1e-15);

        let c = sweep(&w, 5.0, EstimatorKind::Backward, Conditioning::Absolute, &[], &[0.0, 1.0], AlphaPolicy::Hill)
            .unwrap();
        assert!(c.cells.is_empty());

        let c = sweep(&w, 5.0, EstimatorKind::Forward, Conditioning::Absolute, &[1, -1], &[-1.0, 0.0, 1.0], AlphaPolicy::Hill)
            .unwrap();
        assert_eq!(c.cells.len(), 6);
        for lag in [1, -1] {
            let vals: Vec<f64> = c.cells.iter().filter(|e| e.lag == lag).map(|e| e.value).collect();
            assert!(vals.windows(2).all(|p| p[0] <= p[1]));
        }

        let c = sweep(&w, 5.0, EstimatorKind::Backward, Conditioning::Absolute, &[1], &[1.0], AlphaPolicy::Fixed(1.0))
            .unwrap();
        assert!((c.cells[0].value - 0.877_777_777_777_777_8).abs() < 1e-12);

        assert!(sweep(&w, 5.0, EstimatorKind::Forward, Conditioning::Absolute, &[1], &[1.0, 0.0], AlphaPolicy::Hill)
            .is_err());
        assert!(sweep(&w, 5.0, EstimatorKind::Forward, Conditioning::Absolute, &[2], &[0.0], AlphaPolicy::Hill)
            .is_err());
    }

    #[test]
    fn abs_exceeds_combines_both_tails() {
        let w = fixture();
        let exc = Exceedances::new(&w, 5.0).unwrap();
        let v = exc
            .functional(EstimatorKind::Forward, 1, TailFunctional::AbsExceeds(1.0), Conditioning::Absolute, None)
            .unwrap();
        // X_{i+1}/|X_i| = -0.4, -2, 0.25; only -2 has modulus above 1
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![-30.0f64..-0.1, 0.1f64..30.0, Just(0.0)],
            8..80,
        )
    }

    proptest! {
        #[test]
        fn forward_is_a_cdf_in_x(data in series(), u in 0.5f64..10.0, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0) {
            let w = SeriesWindow::new(data, 2).unwrap();
            let exc = Exceedances::new(&w, u).unwrap();
            prop_assume!(!exc.positions().is_empty());
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            for lag in [-2i64, -1, 1, 2] {
                let a = exc.forward_cdf(lag, lo, Conditioning::Absolute).unwrap().value;
                let b = exc.forward_cdf(lag, hi, Conditioning::Absolute).unwrap().value;
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!(a <= b);
                // exceedance-count identity
                let f = exc.forward_cdf(lag, lo, Conditioning::Absolute).unwrap();
                prop_assert_eq!(f.exceedance_count, exc.positions().len());
            }
        }

        #[test]
        fn backward_is_monotone_on_each_half_line(
            data in series(), u in 0.5f64..10.0, alpha in 0.3f64..4.0,
            x1 in 0.0f64..5.0, x2 in 0.0f64..5.0,
        ) {
            let w = SeriesWindow::new(data, 1).unwrap();
            let exc = Exceedances::new(&w, u).unwrap();
            prop_assume!(!exc.positions().is_empty());
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            for cond in [Conditioning::Absolute] {
                let a = exc.backward_cdf(1, lo, alpha, cond).unwrap().value;
                let b = exc.backward_cdf(1, hi, alpha, cond).unwrap().value;
                prop_assert!(a <= b + 1e-12);
                let na = exc.backward_cdf(1, -hi, alpha, cond).unwrap().value;
                let nb = exc.backward_cdf(1, -lo - 1e-9, alpha, cond).unwrap().value;
                prop_assert!(na <= nb + 1e-12);
                if hi >= 1.0 {
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&b));
                }
            }
        }

        #[test]
        fn estimators_are_scale_equivariant(data in series(), u in 0.5f64..10.0, c in 0.01f64..100.0, x in -3.0f64..3.0) {
            let w = SeriesWindow::new(data, 1).unwrap();
            let exc = Exceedances::new(&w, u).unwrap();
            prop_assume!(!exc.positions().is_empty());
            let ws = w.scaled(c);
            let excs = Exceedances::new(&ws, u * c).unwrap();
            // roundoff in c * X can move a value across c * u
            prop_assume!(excs.positions() == exc.positions());
            let f = exc.forward_cdf(1, x, Conditioning::Absolute).unwrap().value;
            let fs = excs.forward_cdf(1, x, Conditioning::Absolute).unwrap().value;
            let h = exc.hill().map(|a| a.alpha);
            let hs = excs.hill().map(|a| a.alpha);
            if let (Ok(h), Ok(hs)) = (h, hs) {
                prop_assert!((h - hs).abs() <= 1e-9 * h.abs().max(1.0));
                let b = exc.backward_cdf(1, x, h, Conditioning::Absolute).unwrap().value;
                let bs = excs.backward_cdf(1, x, h, Conditioning::Absolute).unwrap().value;
                prop_assert!((b - bs).abs() < 1e-9);
            }
            prop_assert!((f - fs).abs() < 1e-12);
        }
    }
}
