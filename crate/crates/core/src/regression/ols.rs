//! OLS via Householder QR, classical covariance, and t/F inference.

use ndarray::{Array1, Array2};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

use super::{CovEstimator, DesignMatrix, FitResult, RANK_TOL};

/// Thin QR output: the solution, the k x k upper-triangular factor, and
/// (X'X)^-1 = R^-1 R^-T.
pub(crate) struct QrSolve {
    pub beta: Array1<f64>,
    pub xtx_inv: Array2<f64>,
}

/// Householder QR least squares. Rank deficiency is detected from the R
/// diagonal and reported with the offending column label.
pub(crate) fn qr_least_squares(
    x: &Array2<f64>,
    y: &Array1<f64>,
    labels: &[String],
) -> Result<QrSolve> {
    let n = x.nrows();
    let k = x.ncols();
    debug_assert!(n >= k && k > 0);

    let mut a = x.clone();
    let mut b = y.clone();

    // Householder reduction of A to upper-triangular form, applied to b.
    for j in 0..k {
        let mut norm = 0.0f64;
        for i in j..n {
            norm += a[[i, j]] * a[[i, j]];
        }
        let norm = norm.sqrt();
        if norm > 0.0 {
            let alpha = if a[[j, j]] >= 0.0 { -norm } else { norm };
            // v = a_j - alpha e_j, stored in place below the diagonal.
            let v0 = a[[j, j]] - alpha;
            let vtv = v0 * v0
                + (j + 1..n).map(|i| a[[i, j]] * a[[i, j]]).sum::<f64>();
            if vtv > 0.0 {
                // Apply H = I - 2 v v' / (v'v) to remaining columns and b.
                for col in j + 1..k {
                    let mut dot = v0 * a[[j, col]];
                    for i in j + 1..n {
                        dot += a[[i, j]] * a[[i, col]];
                    }
                    let scale = 2.0 * dot / vtv;
                    a[[j, col]] -= scale * v0;
                    for i in j + 1..n {
                        a[[i, col]] -= scale * a[[i, j]];
                    }
                }
                let mut dot = v0 * b[j];
                for i in j + 1..n {
                    dot += a[[i, j]] * b[i];
                }
                let scale = 2.0 * dot / vtv;
                b[j] -= scale * v0;
                for i in j + 1..n {
                    b[i] -= scale * a[[i, j]];
                }
            }
            a[[j, j]] = alpha;
            for i in j + 1..n {
                // Zeroed by the reflection; clear the stored v for clean R.
                a[[i, j]] = 0.0;
            }
        }
    }

    // Rank check on the R diagonal.
    let max_diag = (0..k).map(|j| a[[j, j]].abs()).fold(0.0f64, f64::max);
    for j in 0..k {
        if a[[j, j]].abs() <= RANK_TOL * max_diag {
            return Err(Error::RankDeficient {
                column: labels
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| format!("column {j}")),
            });
        }
    }

    // Back substitution: R beta = Q'y (first k rows of b).
    let mut beta = Array1::<f64>::zeros(k);
    for j in (0..k).rev() {
        let mut s = b[j];
        for l in j + 1..k {
            s -= a[[j, l]] * beta[l];
        }
        beta[j] = s / a[[j, j]];
    }

    // R^-1 by back substitution with identity columns.
    let mut rinv = Array2::<f64>::zeros((k, k));
    for col in 0..k {
        for j in (0..=col).rev() {
            let mut s = if j == col { 1.0 } else { 0.0 };
            for l in j + 1..=col {
                s -= a[[j, l]] * rinv[[l, col]];
            }
            rinv[[j, col]] = s / a[[j, j]];
        }
    }
    let xtx_inv = rinv.dot(&rinv.t());

    Ok(QrSolve { beta, xtx_inv })
}

fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Recompute standard errors, t-statistics, and p-values from a coefficient
/// covariance matrix. The F-statistic keeps its classical form.
pub fn apply_covariance(fit: &mut FitResult, covariance: Array2<f64>, estimator: CovEstimator) {
    let df = (fit.n - fit.k) as f64;
    let k = fit.k;
    let mut std_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    let mut degenerate = false;
    for j in 0..k {
        let var = covariance[[j, j]].max(0.0);
        let se = var.sqrt();
        let beta = fit.coefficients[j];
        let (t, p) = if se > 0.0 {
            let t = beta / se;
            (t, t_two_sided_p(t, df))
        } else if beta == 0.0 {
            (0.0, 1.0)
        } else {
            degenerate = true;
            (f64::INFINITY, 0.0)
        };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(p);
    }
    fit.covariance = covariance;
    fit.cov_estimator = estimator;
    fit.std_errors = std_errors;
    fit.t_stats = t_stats;
    fit.p_values = p_values;
    fit.degenerate_inference = degenerate;
}

/// Ordinary least squares with classical covariance s^2 (X'X)^-1 and
/// intercept-convention fit statistics.
pub fn ols_fit(design: &DesignMatrix) -> Result<FitResult> {
    let n = design.n();
    let k = design.k();
    if n <= k {
        return Err(Error::InsufficientRows { n, k });
    }
    let solve = qr_least_squares(&design.x, &design.y, &design.labels)?;
    let fitted = design.x.dot(&solve.beta);
    let residuals = &design.y - &fitted;

    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sst: f64 = if design.has_intercept {
        let ybar = design.y.mean().unwrap_or(0.0);
        design.y.iter().map(|v| (v - ybar).powi(2)).sum()
    } else {
        design.y.iter().map(|v| v * v).sum()
    };

    // Constant response has no variance to explain.
    let r_squared = if sst <= f64::MIN_POSITIVE {
        0.0
    } else {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    };
    let nf = n as f64;
    let kf = k as f64;
    let adj_r_squared = if design.has_intercept {
        1.0 - (1.0 - r_squared) * (nf - 1.0) / (nf - kf)
    } else {
        1.0 - (1.0 - r_squared) * nf / (nf - kf)
    };

    let n_slopes = k - usize::from(design.has_intercept);
    let (f_stat, f_pvalue) = if n_slopes == 0 || sst <= f64::MIN_POSITIVE {
        (0.0, 1.0)
    } else if (1.0 - r_squared) <= 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let q = n_slopes as f64;
        let f = (r_squared / q) / ((1.0 - r_squared) / (nf - kf));
        let p = FisherSnedecor::new(q, nf - kf)
            .map(|d| 1.0 - d.cdf(f))
            .unwrap_or(f64::NAN);
        (f, p)
    };

    let sigma2 = ssr / (nf - kf);
    let covariance = solve.xtx_inv.mapv(|v| v * sigma2);

    let mut fit = FitResult {
        labels: design.labels.clone(),
        coefficients: solve.beta,
        residuals,
        fitted,
        covariance: Array2::zeros((k, k)),
        cov_estimator: CovEstimator::OlsClassical,
        std_errors: Vec::new(),
        t_stats: Vec::new(),
        p_values: Vec::new(),
        r_squared,
        adj_r_squared,
        f_stat,
        f_pvalue,
        n,
        k,
        has_intercept: design.has_intercept,
        xtx_inv: solve.xtx_inv,
        sigma2,
        degenerate_inference: false,
    };
    apply_covariance(&mut fit, covariance, CovEstimator::OlsClassical);
    Ok(fit)
}
