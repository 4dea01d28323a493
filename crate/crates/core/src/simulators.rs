//! Seeded generators for conditionally heteroskedastic series.
//!
//! Every model has the form `X_t = sigma_t Z_t`. Volatility starts at its
//! unconditional level (or the `omega`-only fallback when that level does not
//! exist) and the first `burn_in` draws are discarded.
//!
//! Student-t innovations are drawn as `N / sqrt(V / nu)` with `N` standard
//! normal and `V` chi-square with `nu` degrees of freedom, both from the
//! stream's `ChaCha8Rng`. Other implementations can match this
//! distributionally but not bitwise.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

pub const DEFAULT_BURN_IN: usize = 2000;

/// Innovation law of `Z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum Innovation {
    /// Student-t scaled by `sqrt((nu - 2) / nu)` to unit variance.
    StandardizedT { dof: f64 },
    /// Raw Student-t.
    StudentT { dof: f64 },
    Normal,
}

impl Innovation {
    fn validate(self) -> Result<()> {
        match self {
            Innovation::StandardizedT { dof } if !(dof > 2.0 && dof.is_finite()) => Err(
                Error::InvalidParams(format!("standardized t needs dof > 2, got {dof}")),
            ),
            Innovation::StudentT { dof } if !(dof > 0.0 && dof.is_finite()) => Err(
                Error::InvalidParams(format!("t needs dof > 0, got {dof}")),
            ),
            _ => Ok(()),
        }
    }

    fn sampler(self) -> Result<InnovationSampler> {
        self.validate()?;
        Ok(match self {
            Innovation::Normal => InnovationSampler::Normal,
            Innovation::StudentT { dof } => InnovationSampler::T {
                chi2: ChiSquared::new(dof).map_err(|e| Error::InvalidParams(e.to_string()))?,
                dof,
                scale: 1.0,
            },
            Innovation::StandardizedT { dof } => InnovationSampler::T {
                chi2: ChiSquared::new(dof).map_err(|e| Error::InvalidParams(e.to_string()))?,
                dof,
                scale: ((dof - 2.0) / dof).sqrt(),
            },
        })
    }
}

enum InnovationSampler {
    Normal,
    T {
        chi2: ChiSquared<f64>,
        dof: f64,
        scale: f64,
    },
}

impl InnovationSampler {
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InnovationSampler::Normal => rng.sample(StandardNormal),
            InnovationSampler::T { chi2, dof, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                let v = chi2.sample(rng);
                scale * z / (v / dof).sqrt()
            }
        }
    }
}

/// Parameters of a data-generating process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `sigma_t^2 = omega + alpha1 X_{t-1}^2 + beta1 sigma_{t-1}^2`
    Garch11 {
        omega: f64,
        alpha1: f64,
        beta1: f64,
        innovation: Innovation,
    },
    /// `sigma_t^delta = omega + alpha1 (|X_{t-1}| - gamma1 X_{t-1})^delta + beta1 sigma_{t-1}^delta`
    Aparch11 {
        omega: f64,
        alpha1: f64,
        beta1: f64,
        delta: f64,
        gamma1: f64,
        innovation: Innovation,
    },
    /// `log sigma_t = phi log sigma_{t-1} + vol_sd eps_t` with standard normal `eps_t`
    Sv {
        phi: f64,
        vol_sd: f64,
        innovation: Innovation,
    },
    Iid { innovation: Innovation },
}

impl ModelSpec {
    /// GARCH(1,1) with `(0.1, 0.14, 0.84)` and standardized t4 innovations.
    pub fn garch_t4() -> Self {
        ModelSpec::Garch11 {
            omega: 0.1,
            alpha1: 0.14,
            beta1: 0.84,
            innovation: Innovation::StandardizedT { dof: 4.0 },
        }
    }

    /// Stochastic volatility with `phi = 0.9` and t(2.6) returns.
    pub fn sv_t26() -> Self {
        ModelSpec::Sv {
            phi: 0.9,
            vol_sd: 1.0,
            innovation: Innovation::StudentT { dof: 2.6 },
        }
    }

    /// GARCH(1,1) fitted to S&P500 daily log-returns 1990-2010.
    pub fn sp500_garch() -> Self {
        ModelSpec::Garch11 {
            omega: 7e-7,
            alpha1: 0.062,
            beta1: 0.932,
            innovation: Innovation::Normal,
        }
    }

    /// APARCH(1,1) fitted to S&P500 daily log-returns 1990-2010.
    pub fn sp500_aparch() -> Self {
        ModelSpec::Aparch11 {
            omega: 5e-5,
            alpha1: 0.056,
            beta1: 0.937,
            delta: 1.227,
            gamma1: 0.874,
            innovation: Innovation::Normal,
        }
    }

    /// GARCH(1,1) fitted to P&G daily log-returns 1990-2010.
    pub fn pg_garch() -> Self {
        ModelSpec::Garch11 {
            omega: 9e-7,
            alpha1: 0.04,
            beta1: 0.957,
            innovation: Innovation::Normal,
        }
    }

    /// APARCH(1,1) fitted to P&G daily log-returns 1990-2010.
    pub fn pg_aparch() -> Self {
        ModelSpec::Aparch11 {
            omega: 17e-5,
            alpha1: 0.056,
            beta1: 0.951,
            delta: 0.938,
            gamma1: 0.608,
            innovation: Innovation::Normal,
        }
    }

    pub fn iid(innovation: Innovation) -> Self {
        ModelSpec::Iid { innovation }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "garch-t4" => Self::garch_t4(),
            "sv-t2.6" | "sv" => Self::sv_t26(),
            "sp500-garch" => Self::sp500_garch(),
            "sp500-aparch" => Self::sp500_aparch(),
            "pg-garch" => Self::pg_garch(),
            "pg-aparch" => Self::pg_aparch(),
            "iid-t4" => Self::iid(Innovation::StandardizedT { dof: 4.0 }),
            "iid-t3" => Self::iid(Innovation::StudentT { dof: 3.0 }),
            "iid-normal" => Self::iid(Innovation::Normal),
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown model preset `{other}` (known: garch-t4, sv-t2.6, sp500-garch, \
                     sp500-aparch, pg-garch, pg-aparch, iid-t4, iid-t3, iid-normal)"
                )))
            }
        })
    }

    pub fn innovation(&self) -> Innovation {
        match *self {
            ModelSpec::Garch11 { innovation, .. }
            | ModelSpec::Aparch11 { innovation, .. }
            | ModelSpec::Sv { innovation, .. }
            | ModelSpec::Iid { innovation } => innovation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation().validate()?;
        let finite_nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")))
            }
        };
        match *self {
            ModelSpec::Garch11 {
                omega,
                alpha1,
                beta1,
                ..
            } => {
                check_omega(omega)?;
                finite_nonneg("alpha1", alpha1)?;
                finite_nonneg("beta1", beta1)
            }
            ModelSpec::Aparch11 {
                omega,
                alpha1,
                beta1,
                delta,
                gamma1,
                ..
            } => {
                check_omega(omega)?;
                finite_nonneg("alpha1", alpha1)?;
                finite_nonneg("beta1", beta1)?;
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::InvalidParams(format!("delta must be > 0, got {delta}")));
                }
                if !(gamma1 > -1.0 && gamma1 < 1.0) {
                    return Err(Error::InvalidParams(format!(
                        "gamma1 must lie in (-1, 1), got {gamma1}"
                    )));
                }
                Ok(())
            }
            ModelSpec::Sv { phi, vol_sd, .. } => {
                if !(phi > -1.0 && phi < 1.0) {
                    return Err(Error::InvalidParams(format!("|phi| must be < 1, got {phi}")));
                }
                finite_nonneg("vol_sd", vol_sd)
            }
            ModelSpec::Iid { .. } => Ok(()),
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("omega must be > 0, got {omega}")))
    }
}

/// What to simulate and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub model: ModelSpec,
    pub length: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    pub seed: u64,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl SimulationPlan {
    pub fn new(model: ModelSpec, length: usize, seed: u64) -> Self {
        Self {
            model,
            length,
            burn_in: DEFAULT_BURN_IN,
            seed,
        }
    }
}

/// A simulated path with its latent components.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub values: Vec<f64>,
    pub volatility: Vec<f64>,
    pub innovations: Vec<f64>,
}

/// Simulates `plan.length` observations after discarding `plan.burn_in`.
pub fn simulate(plan: &SimulationPlan) -> Result<Vec<f64>> {
    let mut rng = rng::root(plan.seed);
    simulate_with(&plan.model, plan.length, plan.burn_in, &mut rng)
}

/// As [`simulate`], also returning `sigma_t` and `Z_t`.
pub fn simulate_detailed(plan: &SimulationPlan) -> Result<SimulatedPath> {
    let mut rng = rng::root(plan.seed);
    let mut path = SimulatedPath {
        values: Vec::with_capacity(plan.length),
        volatility: Vec::with_capacity(plan.length),
        innovations: Vec::with_capacity(plan.length),
    };
    run(&plan.model, plan.length, plan.burn_in, &mut rng, |x, s, z| {
        path.values.push(x);
        path.volatility.push(s);
        path.innovations.push(z);
    })?;
    Ok(path)
}

/// Simulates from a caller-provided stream.
pub fn simulate_with(
    model: &ModelSpec,
    length: usize,
    burn_in: usize,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(length);
    run(model, length, burn_in, rng, |x, _, _| values.push(x))?;
    Ok(values)
}

fn run<F>(model: &ModelSpec, length: usize, burn_in: usize, rng: &mut StreamRng, mut emit: F) -> Result<()>
where
    F: FnMut(f64, f64, f64),
{
    if length == 0 {
        return Err(Error::InvalidInput("simulation length must be >= 1".into()));
    }
    model.validate()?;
    let innov = model.innovation().sampler()?;
    let total = burn_in + length;
    let mut step = |t: usize, sigma: f64, rng: &mut StreamRng| -> Result<f64> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "volatility left (0, inf) at step {t}: {sigma}"
            )));
        }
        let z = innov.draw(rng);
        let x = sigma * z;
        if t >= burn_in {
            emit(x, sigma, z);
        }
        Ok(x)
    };
    match *model {
        ModelSpec::Garch11 {
            omega,
            alpha1,
            beta1,
            ..
        } => {
            let mut var = garch_initial_variance(omega, alpha1, beta1);
            for t in 0..total {
                let x = step(t, var.sqrt(), rng)?;
                var = omega + alpha1 * x * x + beta1 * var;
            }
        }
        ModelSpec::Aparch11 {
            omega,
            alpha1,
            beta1,
            delta,
            gamma1,
            ..
        } => {
            let mut power = aparch_initial_power(omega, beta1);
            for t in 0..total {
                let x = step(t, power.powf(1.0 / delta), rng)?;
                power = omega + alpha1 * (x.abs() - gamma1 * x).powf(delta) + beta1 * power;
            }
        }
        ModelSpec::Sv { phi, vol_sd, .. } => {
            let stationary_sd = vol_sd / (1.0 - phi * phi).sqrt();
            let mut log_sigma = stationary_sd * rng.sample::<f64, _>(StandardNormal);
            for t in 0..total {
                step(t, log_sigma.exp(), rng)?;
                log_sigma = phi * log_sigma + vol_sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        ModelSpec::Iid { .. } => {
            for t in 0..total {
                step(t, 1.0, rng)?;
            }
        }
    }
    Ok(())
}

fn garch_initial_variance(omega: f64, alpha1: f64, beta1: f64) -> f64 {
    if alpha1 + beta1 < 1.0 {
        omega / (1.0 - alpha1 - beta1)
    } else {
        omega
    }
}

fn aparch_initial_power(omega: f64, beta1: f64) -> f64 {
    if beta1 < 1.0 {
        omega / (1.0 - beta1)
    } else {
        omega
    }
}

/// Filters `x` through the model's volatility recursion and returns
/// `Z_t = X_t / sigma_t`. Only GARCH(1,1) and APARCH(1,1) are supported.
pub fn residuals(x: &[f64], model: &ModelSpec) -> Result<Vec<f64>> {
    model.validate()?;
    let mut out = Vec::with_capacity(x.len());
    match *model {
        ModelSpec::Garch11 {
            omega,
            alpha1,
            beta1,
            ..
        } => {
            let mut var = garch_initial_variance(omega, alpha1, beta1);
            for &xt in x {
                out.push(xt / var.sqrt());
                var = omega + alpha1 * xt * xt + beta1 * var;
            }
        }
        ModelSpec::Aparch11 {
            omega,
            alpha1,
            beta1,
            delta,
            gamma1,
            ..
        } => {
            let mut power = aparch_initial_power(omega, beta1);
            for &xt in x {
                out.push(xt / power.powf(1.0 / delta));
                power = omega + alpha1 * (xt.abs() - gamma1 * xt).powf(delta) + beta1 * power;
            }
        }
        _ => {
            return Err(Error::InvalidParams(
                "residuals need a GARCH(1,1) or APARCH(1,1) model".into(),
            ))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn garch_matches_unconditional_variance() {
        let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 200_000, 11)).unwrap();
        let v = variance(&x);
        assert!((v - 5.0).abs() < 0.5, "variance {v}");
    }

    #[test]
    fn standardized_t_has_unit_variance() {
        let model = ModelSpec::iid(Innovation::StandardizedT { dof: 4.0 });
        let x = simulate(&SimulationPlan::new(model, 200_000, 5)).unwrap();
        let v = variance(&x);
        assert!((v - 1.0).abs() < 0.05, "variance {v}");
    }

    #[test]
    fn sv_log_volatility_is_stationary_ar1() {
        let plan = SimulationPlan::new(ModelSpec::sv_t26(), 200_000, 3);
        let path = simulate_detailed(&plan).unwrap();
        let logs: Vec<f64> = path.volatility.iter().map(|s| s.ln()).collect();
        let v = variance(&logs);
        let target = 1.0 / (1.0 - 0.81);
        assert!((v - target).abs() < 0.1 * target, "variance {v}");
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = [
            ModelSpec::Garch11 { omega: 0.0, alpha1: 0.1, beta1: 0.8, innovation: Innovation::Normal },
            ModelSpec::iid(Innovation::StandardizedT { dof: 2.0 }),
            ModelSpec::Sv { phi: 1.0, vol_sd: 1.0, innovation: Innovation::Normal },
            ModelSpec::Aparch11 { omega: 1.0, alpha1: 0.1, beta1: 0.8, delta: 1.0, gamma1: 1.0, innovation: Innovation::Normal },
        ];
        for model in bad {
            let err = simulate(&SimulationPlan::new(model, 10, 0)).unwrap_err();
            assert!(matches!(err, Error::InvalidParams(_)), "{model:?}: {err}");
        }
        let err = residuals(&[1.0], &ModelSpec::Garch11 {
            omega: -1.0, alpha1: 0.0, beta1: 0.0, innovation: Innovation::Normal,
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
        assert!(residuals(&[1.0], &ModelSpec::sv_t26()).is_err());
    }

    #[test]
    fn same_plan_same_output() {
        let plan = SimulationPlan::new(ModelSpec::sp500_aparch(), 1000, 99);
        assert_eq!(simulate(&plan).unwrap(), simulate(&plan).unwrap());
        let other = SimulationPlan { seed: 100, ..plan };
        assert_ne!(simulate(&plan).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn aparch_reduces_to_garch() {
        let garch = ModelSpec::Garch11 { omega: 0.1, alpha1: 0.14, beta1: 0.84, innovation: Innovation::StandardizedT { dof: 4.0 } };
        let aparch = ModelSpec::Aparch11 {
            omega: 0.1, alpha1: 0.14, beta1: 0.84, delta: 2.0, gamma1: 0.0,
            innovation: Innovation::StandardizedT { dof: 4.0 },
        };
        let g = simulate(&SimulationPlan::new(garch, 5000, 8)).unwrap();
        let a = simulate(&SimulationPlan::new(aparch, 5000, 8)).unwrap();
        for (x, y) in g.iter().zip(&a) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-3), "{x} vs {y}");
        }
    }

    #[test]
    fn residuals_recover_innovations() {
        let model = ModelSpec::garch_t4();
        let plan = SimulationPlan::new(model, 10_000, 21);
        let path = simulate_detailed(&plan).unwrap();
        let z = residuals(&path.values, &model).unwrap();
        assert_eq!(z.len(), path.values.len());
        let skip = 1000;
        let (a, b) = (&z[skip..], &path.innovations[skip..]);
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        let corr = cov / (va * vb).sqrt();
        assert!(corr > 0.999, "correlation {corr}");

        let exact = simulate_detailed(&SimulationPlan { burn_in: 0, ..plan }).unwrap();
        let z = residuals(&exact.values, &model).unwrap();
        for (r, e) in z.iter().zip(&exact.innovations) {
            assert!((r - e).abs() < 1e-9 * e.abs().max(1.0));
        }
    }

    #[test]
    fn constant_volatility_residuals_are_rescaled_data() {
        let model = ModelSpec::Garch11 { omega: 4.0, alpha1: 0.0, beta1: 0.0, innovation: Innovation::Normal };
        let x = [1.0, -3.0, 0.5, 8.0];
        let z = residuals(&x, &model).unwrap();
        for (r, v) in z.iter().zip(x) {
            assert_eq!(*r, v / 2.0);
        }
    }

    #[test]
    fn garch_tail_index_is_plausible() {
        let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 200_000, 11)).unwrap();
        let w = crate::window::SeriesWindow::new(x, 0).unwrap();
        let u = crate::window::resolve_threshold(&w, crate::window::ThresholdSpec::Quantile(0.99)).unwrap();
        let a = crate::estimators::hill_alpha(&w, u).unwrap().alpha;
        assert!((2.0..=3.2).contains(&a), "alpha {a}");
    }
}
