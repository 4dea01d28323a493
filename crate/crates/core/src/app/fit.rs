//! Gaussian quasi-maximum-likelihood fit of GARCH(1,1).

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::simplex::{minimize, SimplexOptions};
use crate::error::{Error, Result};
use crate::simulators::{Innovation, ModelSpec};

/// Minimum sample size accepted by [`fit_garch11`].
pub const MIN_FIT_LENGTH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
    /// Standard errors of `(omega, alpha1, beta1)` from the inverse
    /// numerical Hessian; absent when it is not positive definite.
    pub std_errors: Option<[f64; 3]>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec::Garch11 {
            omega: self.omega,
            alpha1: self.alpha1,
            beta1: self.beta1,
            innovation: Innovation::Normal,
        }
    }
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

// z = (ln omega, logit(alpha1 + beta1), logit(alpha1 / (alpha1 + beta1)))
fn unpack(z: &[f64]) -> [f64; 3] {
    let persistence = logistic(z[1]);
    let a = persistence * logistic(z[2]);
    [z[0].exp(), a, persistence - a]
}

/// Gaussian quasi-log-likelihood up to its constant:
/// `-1/2 sum(ln s2_t + r_t^2 / s2_t)` with `s2_1 = var0`.
fn quasi_loglik(r: &[f64], var0: f64, p: [f64; 3]) -> f64 {
    let [omega, alpha, beta] = p;
    let mut s2 = var0;
    let mut ll = 0.0;
    for (t, &x) in r.iter().enumerate() {
        if t > 0 {
            s2 = omega + alpha * r[t - 1] * r[t - 1] + beta * s2;
        }
        if !(s2 > 0.0) {
            return f64::NEG_INFINITY;
        }
        ll -= 0.5 * (s2.ln() + x * x / s2);
    }
    ll
}

fn hessian(f: impl Fn([f64; 3]) -> f64, p: [f64; 3]) -> Matrix3<f64> {
    let h: [f64; 3] = std::array::from_fn(|i| 1e-4 * p[i].abs().max(1e-6));
    let shifted = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut q = p;
        q[di] += si * h[di];
        q[dj] += sj * h[dj];
        f(q)
    };
    let f0 = f(p);
    Matrix3::from_fn(|i, j| {
        if i == j {
            let mut up = p;
            let mut dn = p;
            up[i] += h[i];
            dn[i] -= h[i];
            (f(up) - 2.0 * f0 + f(dn)) / (h[i] * h[i])
        } else {
            (shifted(i, 1.0, j, 1.0) - shifted(i, 1.0, j, -1.0) - shifted(i, -1.0, j, 1.0)
                + shifted(i, -1.0, j, -1.0))
                / (4.0 * h[i] * h[j])
        }
    })
}

/// Fits `sigma_t^2 = omega + alpha1 r_{t-1}^2 + beta1 sigma_{t-1}^2` by
/// maximizing the Gaussian quasi-likelihood with a simplex search.
pub fn fit_garch11(returns: &[f64]) -> Result<FitResult> {
    fit_garch11_with(returns, SimplexOptions::default())
}

pub fn fit_garch11_with(returns: &[f64], opts: SimplexOptions) -> Result<FitResult> {
    if returns.len() < MIN_FIT_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_FIT_LENGTH,
            got: returns.len(),
        });
    }
    if returns.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("returns must be finite".into()));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var0 = returns.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    // a constant series leaves only rounding residue in var0
    if !(var0 > f64::EPSILON * mean * mean) {
        return Err(Error::DegenerateData);
    }
    let objective = |z: &[f64]| -quasi_loglik(returns, var0, unpack(z));
    let z0 = [(0.05 * var0).ln(), logit(0.95), logit(0.05 / 0.95)];
    let mut best = minimize(objective, &z0, opts);
    let mut iterations = best.iterations;
    // restart from the optimum to escape a collapsed simplex
    for _ in 0..3 {
        if !best.converged {
            break;
        }
        let again = minimize(objective, &best.x, opts);
        iterations += again.iterations;
        let improved = again.f < best.f - opts.f_tol * (1.0 + best.f.abs());
        best = again;
        if !improved {
            break;
        }
    }
    if !best.converged {
        return Err(Error::NoConvergence { iterations });
    }
    let p = unpack(&best.x);
    let ll = quasi_loglik(returns, var0, p);
    let hess = hessian(|q| -quasi_loglik(returns, var0, q), p);
    let std_errors = hess.try_inverse().and_then(|inv| {
        let d = [inv[(0, 0)], inv[(1, 1)], inv[(2, 2)]];
        d.iter().all(|v| *v > 0.0 && v.is_finite()).then(|| d.map(f64::sqrt))
    });
    Ok(FitResult {
        model: "garch11".into(),
        omega: p[0],
        alpha1: p[1],
        beta1: p[2],
        std_errors,
        log_likelihood: ll - 0.5 * n * (2.0 * std::f64::consts::PI).ln(),
        converged: true,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulators::{simulate, SimulationPlan};

    #[test]
    fn recovers_garch_parameters() {
        let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 10_000, 2024)).unwrap();
        let fit = fit_garch11(&x).unwrap();
        assert!((fit.alpha1 - 0.14).abs() < 0.05, "{fit:?}");
        assert!((fit.beta1 - 0.84).abs() < 0.05, "{fit:?}");
        assert!(fit.alpha1 + fit.beta1 < 1.0);
        let se = fit.std_errors.expect("hessian should be positive definite");
        assert!(se.iter().all(|s| *s > 0.0 && *s < 0.1), "{se:?}");
    }

    #[test]
    fn iid_normal_has_no_arch_effect() {
        let x = simulate(&SimulationPlan::new(ModelSpec::iid(Innovation::Normal), 5000, 7)).unwrap();
        let fit = fit_garch11(&x).unwrap();
        assert!(fit.alpha1 <= 0.03, "{fit:?}");
    }

    #[test]
    fn degenerate_and_short_inputs() {
        assert!(matches!(fit_garch11(&[0.01; 500]), Err(Error::DegenerateData)));
        assert!(matches!(fit_garch11(&[0.01; 50]), Err(Error::TooShort { .. })));
        let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 500, 1)).unwrap();
        let capped = SimplexOptions { max_iter: 5, ..Default::default() };
        assert!(matches!(fit_garch11_with(&x, capped), Err(Error::NoConvergence { .. })));
    }
}
