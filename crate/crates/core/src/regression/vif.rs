//! Variance inflation factors for multicollinearity diagnostics.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::ols::qr_least_squares;
use super::DesignMatrix;

/// VIF values above this are reported as infinite.
const VIF_INFINITE: f64 = 1e6;
pub const VIF_WARN_MODERATE: f64 = 5.0;
pub const VIF_WARN_SEVERE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VifValue {
    Finite(f64),
    Infinite,
}

impl std::fmt::Display for VifValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VifValue::Finite(v) => write!(f, "{v:.4}"),
            VifValue::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VifEntry {
    pub label: String,
    pub value: VifValue,
}

impl VifEntry {
    pub fn exceeds(&self, threshold: f64) -> bool {
        match self.value {
            VifValue::Finite(v) => v > threshold,
            VifValue::Infinite => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VifReport {
    pub entries: Vec<VifEntry>,
}

impl VifReport {
    pub fn get(&self, label: &str) -> Option<&VifEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// VIF_j = 1/(1 - R2_j), with R2_j from regressing column j on all other
/// non-intercept columns plus an intercept. The design's intercept column
/// is excluded from the report.
pub fn vif(design: &DesignMatrix) -> Result<VifReport> {
    let start = usize::from(design.has_intercept);
    let cols: Vec<usize> = (start..design.k()).collect();
    if cols.len() < 2 {
        return Err(Error::Precondition(
            "VIF requires at least 2 non-intercept regressors".to_string(),
        ));
    }
    let n = design.n();
    let mut entries = Vec::with_capacity(cols.len());
    for &j in &cols {
        let others: Vec<usize> = cols.iter().copied().filter(|&c| c != j).collect();
        let mut x = Array2::<f64>::zeros((n, others.len() + 1));
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            x[[i, 0]] = 1.0;
            for (c, &col) in others.iter().enumerate() {
                x[[i, c + 1]] = design.x[[i, col]];
            }
            y[i] = design.x[[i, j]];
        }
        let labels: Vec<String> = std::iter::once("const".to_string())
            .chain(others.iter().map(|&c| design.labels[c].clone()))
            .collect();
        let value = match qr_least_squares(&x, &y, &labels) {
            Err(Error::RankDeficient { .. }) => VifValue::Infinite,
            Err(e) => return Err(e),
            Ok(solve) => {
                let fitted = x.dot(&solve.beta);
                let ssr: f64 = y
                    .iter()
                    .zip(fitted.iter())
                    .map(|(yi, fi)| (yi - fi).powi(2))
                    .sum();
                let ybar = y.mean().unwrap_or(0.0);
                let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
                if sst <= f64::MIN_POSITIVE {
                    // Constant column against the aux intercept.
                    VifValue::Infinite
                } else {
                    let r2 = (1.0 - ssr / sst).clamp(0.0, 1.0);
                    if r2 >= 1.0 - 1.0 / VIF_INFINITE {
                        VifValue::Infinite
                    } else {
                        VifValue::Finite((1.0 / (1.0 - r2)).max(1.0))
                    }
                }
            }
        };
        entries.push(VifEntry {
            label: design.labels[j].clone(),
            value,
        });
    }
    Ok(VifReport { entries })
}
