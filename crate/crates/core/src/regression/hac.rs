//! Newey-West HAC coefficient covariance with Bartlett weights.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::ols::{ols_fit, qr_least_squares};
use super::{apply_covariance, CovEstimator, DesignMatrix, FitResult};

/// cov = n (X'X)^-1 S (X'X)^-1 with
/// S = (1/n)[G_0 + sum_{l=1..L} w_l (G_l + G_l')],
/// G_l = (1/n) sum_{t=l+1..n} (x_t e_t)(x_{t-l} e_{t-l})',
/// w_l = 1 - l/(L+1). No small-sample degrees-of-freedom correction.
/// L = 0 reduces to the White (HC0) covariance.
pub fn newey_west_cov(x: &Array2<f64>, residuals: &Array1<f64>, lags: usize) -> Result<Array2<f64>> {
    let n = x.nrows();
    let k = x.ncols();
    if residuals.len() != n {
        return Err(Error::Precondition(
            "residual length must match design rows".to_string(),
        ));
    }
    if n <= k {
        return Err(Error::InsufficientRows { n, k });
    }
    if lags >= n {
        return Err(Error::Precondition(format!(
            "lags = {lags} must be < n = {n}"
        )));
    }

    // Scores g_t = x_t e_t.
    let mut g = Array2::<f64>::zeros((n, k));
    for t in 0..n {
        for j in 0..k {
            g[[t, j]] = x[[t, j]] * residuals[t];
        }
    }

    let nf = n as f64;
    let mut s = Array2::<f64>::zeros((k, k));
    // Gamma_0
    for t in 0..n {
        for a in 0..k {
            for b in 0..k {
                s[[a, b]] += g[[t, a]] * g[[t, b]];
            }
        }
    }
    // Bartlett-weighted lag terms, symmetrized.
    for lag in 1..=lags {
        let w = 1.0 - lag as f64 / (lags as f64 + 1.0);
        let mut gamma = Array2::<f64>::zeros((k, k));
        for t in lag..n {
            for a in 0..k {
                for b in 0..k {
                    gamma[[a, b]] += g[[t, a]] * g[[t - lag, b]];
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                s[[a, b]] += w * (gamma[[a, b]] + gamma[[b, a]]);
            }
        }
    }
    // One factor of 1/n overall; it cancels against the leading n in the
    // sandwich so that L = 0 reproduces HC0 exactly.
    s.mapv_inplace(|v| v / nf);

    let ident_labels: Vec<String> = (0..k).map(|j| format!("col{j}")).collect();
    let qr = qr_least_squares(x, residuals, &ident_labels)?;
    let bread = qr.xtx_inv;
    let cov = bread.dot(&s).dot(&bread).mapv(|v| v * nf);
    Ok(cov)
}

/// Convenience: OLS point estimates with Newey-West inference.
pub fn fit_with_newey_west(design: &DesignMatrix, lags: usize) -> Result<FitResult> {
    let mut fit = ols_fit(design)?;
    let cov = newey_west_cov(&design.x, &fit.residuals, lags)?;
    apply_covariance(&mut fit, cov, CovEstimator::NeweyWest { lags });
    Ok(fit)
}
