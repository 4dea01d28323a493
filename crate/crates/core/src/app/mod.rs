//! Command-line application: ingestion, model fitting, configuration and
//! the analysis pipeline.

pub mod apply;
pub mod cli;
pub mod config;
pub mod fit;
pub mod ingest;
pub mod simplex;

pub use fit::{fit_garch11, FitResult};
pub use ingest::{ingest_prices, read_series, ColumnSpec, InputKind, ReturnSeries};
