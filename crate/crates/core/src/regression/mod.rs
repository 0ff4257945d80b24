//! Estimation engine: design-matrix construction for the three model
//! specifications, OLS, Newey-West HAC covariance, fit statistics, VIF,
//! and two-stage least squares.

mod hac;
mod ols;
mod tsls;
mod vif;

pub use hac::{fit_with_newey_west, newey_west_cov};
pub use ols::{apply_covariance, ols_fit};
pub use tsls::{two_stage_least_squares, TslsDiagnostics};
pub use vif::{vif, VifEntry, VifReport, VifValue, VIF_WARN_MODERATE, VIF_WARN_SEVERE};

use ndarray::{Array1, Array2};

use crate::date::TradingDate;
use crate::error::{Error, Result};
use crate::panel::{MergedPanel, PanelRow};

/// Relative rank tolerance for the design matrix.
pub const RANK_TOL: f64 = 1e-10;
/// Default HAC lag length.
pub const DEFAULT_NW_LAGS: usize = 5;

/// A regressor that may enter a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regressor {
    MktRf,
    Smb,
    Hml,
    Rmw,
    Cma,
    Sentiment,
    SentimentVol,
    SentimentInteraction,
    Dgs10Diff,
}

impl Regressor {
    pub fn label(&self) -> &'static str {
        match self {
            Regressor::MktRf => "mkt_rf",
            Regressor::Smb => "smb",
            Regressor::Hml => "hml",
            Regressor::Rmw => "rmw",
            Regressor::Cma => "cma",
            Regressor::Sentiment => "s_t",
            Regressor::SentimentVol => "hv_t",
            Regressor::SentimentInteraction => "s_t_x_hv_t",
            Regressor::Dgs10Diff => "dgs10_diff",
        }
    }

    pub fn parse(s: &str) -> Option<Regressor> {
        match s {
            "mkt_rf" => Some(Regressor::MktRf),
            "smb" => Some(Regressor::Smb),
            "hml" => Some(Regressor::Hml),
            "rmw" => Some(Regressor::Rmw),
            "cma" => Some(Regressor::Cma),
            "s_t" => Some(Regressor::Sentiment),
            "hv_t" => Some(Regressor::SentimentVol),
            "s_t_x_hv_t" | "s_t*hv_t" => Some(Regressor::SentimentInteraction),
            "dgs10_diff" => Some(Regressor::Dgs10Diff),
            _ => None,
        }
    }

    fn value(&self, row: &PanelRow) -> Option<f64> {
        match self {
            Regressor::MktRf => Some(row.mkt_rf),
            Regressor::Smb => Some(row.smb),
            Regressor::Hml => Some(row.hml),
            Regressor::Rmw => Some(row.rmw),
            Regressor::Cma => Some(row.cma),
            Regressor::Sentiment => Some(row.s_t),
            Regressor::SentimentVol => row.hv_t,
            // Raw elementwise product, no centering.
            Regressor::SentimentInteraction => row.hv_t.map(|hv| row.s_t * hv),
            Regressor::Dgs10Diff => Some(row.dgs10_diff),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecName {
    Baseline,
    Augmented,
    Interaction,
    Custom,
}

impl SpecName {
    pub fn label(&self) -> &'static str {
        match self {
            SpecName::Baseline => "baseline",
            SpecName::Augmented => "augmented",
            SpecName::Interaction => "interaction",
            SpecName::Custom => "custom",
        }
    }
}

/// Declarative description of which regressors enter a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionSpec {
    pub name: SpecName,
    pub regressors: Vec<Regressor>,
    pub intercept: bool,
}

impl RegressionSpec {
    /// Five factors plus the yield change.
    pub fn baseline() -> RegressionSpec {
        RegressionSpec {
            name: SpecName::Baseline,
            regressors: vec![
                Regressor::MktRf,
                Regressor::Smb,
                Regressor::Hml,
                Regressor::Rmw,
                Regressor::Cma,
                Regressor::Dgs10Diff,
            ],
            intercept: true,
        }
    }

    /// Baseline plus the sentiment index.
    pub fn augmented() -> RegressionSpec {
        RegressionSpec {
            name: SpecName::Augmented,
            regressors: vec![
                Regressor::MktRf,
                Regressor::Smb,
                Regressor::Hml,
                Regressor::Rmw,
                Regressor::Cma,
                Regressor::Sentiment,
                Regressor::Dgs10Diff,
            ],
            intercept: true,
        }
    }

    /// Augmented plus sentiment volatility and its raw interaction.
    pub fn interaction() -> RegressionSpec {
        RegressionSpec {
            name: SpecName::Interaction,
            regressors: vec![
                Regressor::MktRf,
                Regressor::Smb,
                Regressor::Hml,
                Regressor::Rmw,
                Regressor::Cma,
                Regressor::Sentiment,
                Regressor::SentimentVol,
                Regressor::SentimentInteraction,
                Regressor::Dgs10Diff,
            ],
            intercept: true,
        }
    }

    pub fn custom(regressors: Vec<Regressor>, intercept: bool) -> Result<RegressionSpec> {
        if regressors.contains(&Regressor::SentimentInteraction)
            && !(regressors.contains(&Regressor::Sentiment)
                && regressors.contains(&Regressor::SentimentVol))
        {
            return Err(Error::Precondition(
                "interaction term requires both s_t and hv_t in the spec".to_string(),
            ));
        }
        let mut seen = Vec::new();
        for r in &regressors {
            if seen.contains(r) {
                return Err(Error::Precondition(format!(
                    "duplicate regressor `{}`",
                    r.label()
                )));
            }
            seen.push(*r);
        }
        Ok(RegressionSpec {
            name: SpecName::Custom,
            regressors,
            intercept,
        })
    }

    /// Column count including the intercept.
    pub fn k(&self) -> usize {
        self.regressors.len() + usize::from(self.intercept)
    }

    pub fn column_index(&self, r: Regressor) -> Option<usize> {
        self.regressors
            .iter()
            .position(|&x| x == r)
            .map(|i| i + usize::from(self.intercept))
    }

    pub fn needs_hv(&self) -> bool {
        self.regressors.contains(&Regressor::SentimentVol)
            || self.regressors.contains(&Regressor::SentimentInteraction)
    }

    /// One design row (intercept included) for a single panel row, or None
    /// if any required regressor is undefined on that day.
    pub fn row_values(&self, row: &PanelRow) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.k());
        if self.intercept {
            out.push(1.0);
        }
        for r in &self.regressors {
            out.push(r.value(row)?);
        }
        Some(out)
    }
}

/// A ready-to-estimate design: regressors, labels, dates, response.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub dates: Vec<TradingDate>,
    pub x: Array2<f64>,
    pub labels: Vec<String>,
    pub y: Array1<f64>,
    pub has_intercept: bool,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn from_parts(
        x: Array2<f64>,
        y: Array1<f64>,
        labels: Vec<String>,
        has_intercept: bool,
    ) -> Result<DesignMatrix> {
        if x.nrows() != y.len() || x.ncols() != labels.len() {
            return Err(Error::Precondition("design dimensions disagree".to_string()));
        }
        if x.nrows() <= x.ncols() {
            return Err(Error::InsufficientRows {
                n: x.nrows(),
                k: x.ncols(),
            });
        }
        Ok(DesignMatrix {
            dates: Vec::new(),
            x,
            labels,
            y,
            has_intercept,
        })
    }
}

/// Assemble the design for `spec` over `rows`, with the selected asset's
/// excess return as the response.
pub fn build_design_rows(
    rows: &[PanelRow],
    asset_index: usize,
    spec: &RegressionSpec,
) -> Result<DesignMatrix> {
    let n = rows.len();
    let k = spec.k();
    if n <= k {
        return Err(Error::InsufficientRows { n, k });
    }
    let mut x = Array2::<f64>::zeros((n, k));
    let mut y = Array1::<f64>::zeros(n);
    let mut labels = Vec::with_capacity(k);
    if spec.intercept {
        labels.push("const".to_string());
    }
    labels.extend(spec.regressors.iter().map(|r| r.label().to_string()));

    for (i, row) in rows.iter().enumerate() {
        let mut j = 0;
        if spec.intercept {
            x[[i, 0]] = 1.0;
            j = 1;
        }
        for r in &spec.regressors {
            x[[i, j]] = r
                .value(row)
                .ok_or_else(|| Error::MissingRegressor(r.label().to_string()))?;
            j += 1;
        }
        y[i] = *row
            .excess
            .get(asset_index)
            .ok_or_else(|| Error::UnknownAsset(format!("index {asset_index}")))?;
    }
    Ok(DesignMatrix {
        dates: rows.iter().map(|r| r.date).collect(),
        x,
        labels,
        y,
        has_intercept: spec.intercept,
    })
}

/// Assemble the design from a whole panel.
pub fn build_design(
    panel: &MergedPanel,
    spec: &RegressionSpec,
    asset: &str,
) -> Result<DesignMatrix> {
    let idx = panel.asset_index(asset)?;
    build_design_rows(&panel.rows, idx, spec)
}

/// Which covariance estimator labels a fit's standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovEstimator {
    OlsClassical,
    NeweyWest { lags: usize },
}

impl std::fmt::Display for CovEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CovEstimator::OlsClassical => write!(f, "OLS-classical"),
            CovEstimator::NeweyWest { lags } => write!(f, "NW({lags})"),
        }
    }
}

/// Coefficients, covariance, residuals, and fit statistics for one estimation.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub labels: Vec<String>,
    pub coefficients: Array1<f64>,
    pub residuals: Array1<f64>,
    pub fitted: Array1<f64>,
    pub covariance: Array2<f64>,
    pub cov_estimator: CovEstimator,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub f_pvalue: f64,
    pub n: usize,
    pub k: usize,
    pub has_intercept: bool,
    /// (X'X)^-1 from the estimation design; reused by forecast-variance
    /// corrections downstream.
    pub xtx_inv: Array2<f64>,
    /// Residual variance e'e/(n-k).
    pub sigma2: f64,
    /// Set when a zero standard error coincides with a nonzero coefficient.
    pub degenerate_inference: bool,
}

impl FitResult {
    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.coefficients[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Prediction for one regressor vector (same column order as `labels`).
    pub fn predict_row(&self, x_row: &[f64]) -> f64 {
        x_row
            .iter()
            .zip(self.coefficients.iter())
            .map(|(x, b)| x * b)
            .sum()
    }
}
