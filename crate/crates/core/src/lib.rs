//! Daily text-sentiment index construction and sentiment-augmented
//! Fama-French five-factor estimation: panel ingestion, OLS with
//! Newey-West HAC inference, VIF and 2SLS diagnostics, rolling coefficient
//! paths, event studies with the BMP cross-sectional test, and a synthetic
//! data generator with brute-force reference estimators for testing.

pub mod date;
pub mod error;
pub mod event;
pub mod panel;
pub mod regression;
pub mod report;
pub mod rolling;
pub mod sentiment;
pub mod synthetic;

pub use error::{Error, Result};
