//! Estimation of the spectral tail process of heavy-tailed time series.
//!
//! The crate provides
//!
//! - [`window`]: series framing with lag buffers, thresholds, exceedances;
//! - [`estimators`]: Hill tail index, tail balance, forward and backward
//!   estimators of `P(Theta_t <= x)` with sign conditioning;
//! - [`bootstrap`]: stationary and multiplier block bootstrap with reflected
//!   and threshold-rescaled confidence intervals;
//! - [`simulators`]: seeded GARCH(1,1), APARCH(1,1), stochastic volatility
//!   and iid generators, plus volatility-filter residuals;
//! - [`study`]: Monte Carlo harnesses for pre-asymptotic truths, bias/RMSE
//!   and coverage studies, and independence references;
//! - [`app`]: CSV ingestion, Gaussian QMLE for GARCH(1,1), config, output
//!   and the command-line driver.

pub mod app;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod rng;
pub mod simulators;
pub mod study;
pub mod window;

pub use error::{Error, Result};
pub use estimators::{
    backward_cdf, forward_cdf, hill_alpha, p_hat, sweep, AlphaEstimate, AlphaPolicy, EstimateCurve,
    Exceedances,
};
pub use window::{
    exceedance_indices, resolve_threshold, Conditioning, EstimatorKind, SeriesWindow,
    TailEstimate, TailFunctional, ThresholdSpec,
};
