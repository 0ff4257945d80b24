//! Two-stage least squares for an endogenous regressor.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::ols::qr_least_squares;
use super::{apply_covariance, CovEstimator, DesignMatrix, FitResult};

const WEAK_INSTRUMENT_F: f64 = 10.0;

/// First-stage diagnostics attached to a 2SLS fit.
#[derive(Debug, Clone, Copy)]
pub struct TslsDiagnostics {
    /// Partial F-statistic for the excluded instruments in the first stage.
    pub first_stage_f: f64,
    /// Set when first_stage_f < 10.
    pub weak_instruments: bool,
}

/// Replace `endogenous` with its first-stage fitted values (regressed on the
/// exogenous columns plus `instruments`), then re-estimate. The reported
/// covariance uses stage-2 residuals recomputed against the original
/// regressors.
pub fn two_stage_least_squares(
    design: &DesignMatrix,
    endogenous: &str,
    instruments: &[(String, Vec<f64>)],
) -> Result<(FitResult, TslsDiagnostics)> {
    if instruments.is_empty() {
        return Err(Error::Precondition(
            "2SLS requires at least one instrument".to_string(),
        ));
    }
    if instruments.iter().any(|(name, _)| name == endogenous) {
        return Err(Error::Precondition(format!(
            "instrument set must not contain the endogenous column `{endogenous}`"
        )));
    }
    let n = design.n();
    let k = design.k();
    for (name, col) in instruments {
        if col.len() != n {
            return Err(Error::Precondition(format!(
                "instrument `{name}` has {} rows, design has {n}",
                col.len()
            )));
        }
    }
    let endo_idx = design
        .labels
        .iter()
        .position(|l| l == endogenous)
        .ok_or_else(|| Error::MissingRegressor(endogenous.to_string()))?;
    if design.has_intercept && endo_idx == 0 {
        return Err(Error::Precondition(
            "the intercept cannot be endogenous".to_string(),
        ));
    }

    // Stage 1: endogenous ~ exogenous columns + instruments.
    let exo: Vec<usize> = (0..k).filter(|&j| j != endo_idx).collect();
    let q = instruments.len();
    let k1 = exo.len() + q;
    let mut x1 = Array2::<f64>::zeros((n, k1));
    let mut y1 = Array1::<f64>::zeros(n);
    let mut labels1 = Vec::with_capacity(k1);
    for (c, &j) in exo.iter().enumerate() {
        for i in 0..n {
            x1[[i, c]] = design.x[[i, j]];
        }
        labels1.push(design.labels[j].clone());
    }
    for (c, (name, col)) in instruments.iter().enumerate() {
        for i in 0..n {
            x1[[i, exo.len() + c]] = col[i];
        }
        labels1.push(name.clone());
    }
    for i in 0..n {
        y1[i] = design.x[[i, endo_idx]];
    }
    if n <= k1 {
        return Err(Error::InsufficientRows { n, k: k1 });
    }
    let stage1 = qr_least_squares(&x1, &y1, &labels1)?;
    let fitted_endo = x1.dot(&stage1.beta);
    let ssr_u: f64 = y1
        .iter()
        .zip(fitted_endo.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum();

    // Restricted first stage (exogenous columns only) for the partial F.
    let first_stage_f = {
        let mut xr = Array2::<f64>::zeros((n, exo.len()));
        for (c, &j) in exo.iter().enumerate() {
            for i in 0..n {
                xr[[i, c]] = design.x[[i, j]];
            }
        }
        let labels_r: Vec<String> = exo.iter().map(|&j| design.labels[j].clone()).collect();
        let restricted = qr_least_squares(&xr, &y1, &labels_r)?;
        let fitted_r = xr.dot(&restricted.beta);
        let ssr_r: f64 = y1
            .iter()
            .zip(fitted_r.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let df = (n - k1) as f64;
        if ssr_u <= f64::MIN_POSITIVE {
            f64::INFINITY
        } else {
            ((ssr_r - ssr_u).max(0.0) / q as f64) / (ssr_u / df)
        }
    };

    // Stage 2: swap the endogenous column for fitted values.
    let mut x2 = design.x.clone();
    for i in 0..n {
        x2[[i, endo_idx]] = fitted_endo[i];
    }
    let stage2 = qr_least_squares(&x2, &design.y, &design.labels)?;
    let beta = stage2.beta;

    // Residuals against the ORIGINAL regressors.
    let fitted = design.x.dot(&beta);
    let residuals = &design.y - &fitted;
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let nf = n as f64;
    let kf = k as f64;
    let sigma2 = ssr / (nf - kf);
    let covariance = stage2.xtx_inv.mapv(|v| v * sigma2);

    let sst: f64 = if design.has_intercept {
        let ybar = design.y.mean().unwrap_or(0.0);
        design.y.iter().map(|v| (v - ybar).powi(2)).sum()
    } else {
        design.y.iter().map(|v| v * v).sum()
    };
    // 2SLS R2 has no [0,1] guarantee; report it raw.
    let r_squared = if sst <= f64::MIN_POSITIVE { 0.0 } else { 1.0 - ssr / sst };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (nf - 1.0) / (nf - kf);

    let mut fit = FitResult {
        labels: design.labels.clone(),
        coefficients: beta,
        residuals,
        fitted,
        covariance: Array2::zeros((k, k)),
        cov_estimator: CovEstimator::OlsClassical,
        std_errors: Vec::new(),
        t_stats: Vec::new(),
        p_values: Vec::new(),
        r_squared,
        adj_r_squared,
        f_stat: f64::NAN,
        f_pvalue: f64::NAN,
        n,
        k,
        has_intercept: design.has_intercept,
        xtx_inv: stage2.xtx_inv,
        sigma2,
        degenerate_inference: false,
    };
    apply_covariance(&mut fit, covariance, CovEstimator::OlsClassical);

    Ok((
        fit,
        TslsDiagnostics {
            first_stage_f,
            weak_instruments: first_stage_f < WEAK_INSTRUMENT_F,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::ols_fit;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn make_design(x: Array2<f64>, y: Array1<f64>, labels: Vec<&str>) -> DesignMatrix {
        DesignMatrix {
            dates: Vec::new(),
            x,
            labels: labels.into_iter().map(str::to_string).collect(),
            y,
            has_intercept: true,
        }
    }

    #[test]
    fn identity_instrument_reproduces_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 80;
        let mut x = Array2::<f64>::zeros((n, 3));
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            x[[i, 0]] = 1.0;
            x[[i, 1]] = rng.gen::<f64>() - 0.5;
            x[[i, 2]] = rng.gen::<f64>() - 0.5;
            y[i] = 0.2 + 1.1 * x[[i, 1]] - 0.6 * x[[i, 2]] + 0.05 * (rng.gen::<f64>() - 0.5);
        }
        let endo_col: Vec<f64> = (0..n).map(|i| x[[i, 2]]).collect();
        let design = make_design(x, y, vec!["const", "x1", "endo"]);
        let ols = ols_fit(&design).unwrap();
        let (tsls, _) =
            two_stage_least_squares(&design, "endo", &[("z".to_string(), endo_col)]).unwrap();
        for (a, b) in ols.coefficients.iter().zip(tsls.coefficients.iter()) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn empty_instruments_rejected() {
        let design = make_design(
            Array2::ones((5, 2)),
            Array1::zeros(5),
            vec!["const", "endo"],
        );
        assert!(two_stage_least_squares(&design, "endo", &[]).is_err());
    }

    #[test]
    fn endogenous_column_cannot_instrument_itself_by_name() {
        let design = make_design(
            Array2::ones((5, 2)),
            Array1::zeros(5),
            vec!["const", "endo"],
        );
        let z = ("endo".to_string(), vec![0.0; 5]);
        assert!(two_stage_least_squares(&design, "endo", &[z]).is_err());
    }

    #[test]
    fn corrects_simulated_endogeneity() {
        // x_endo = z + u, y = gamma*x_endo + eps where eps correlated with u.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let gamma_true = 0.8;
        let n = 2000;
        let reps = 40;
        let mut ols_estimates = Vec::new();
        let mut tsls_estimates = Vec::new();
        for _ in 0..reps {
            let mut x = Array2::<f64>::zeros((n, 2));
            let mut y = Array1::<f64>::zeros(n);
            let mut z = Vec::with_capacity(n);
            for i in 0..n {
                let zi: f64 = rng.gen::<f64>() - 0.5;
                let ui: f64 = rng.gen::<f64>() - 0.5;
                let endo = zi + ui;
                let eps = 0.8 * ui + 0.2 * (rng.gen::<f64>() - 0.5);
                x[[i, 0]] = 1.0;
                x[[i, 1]] = endo;
                y[i] = gamma_true * endo + eps;
                z.push(zi);
            }
            let design = make_design(x, y, vec!["const", "endo"]);
            let ols = ols_fit(&design).unwrap();
            let (tsls, diag) =
                two_stage_least_squares(&design, "endo", &[("z".to_string(), z)]).unwrap();
            assert!(!diag.weak_instruments, "F = {}", diag.first_stage_f);
            ols_estimates.push(ols.coefficient("endo").unwrap());
            tsls_estimates.push(tsls.coefficient("endo").unwrap());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let sd = |v: &[f64]| {
            let m = mean(v);
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
        };
        let mc_se = sd(&tsls_estimates) / (reps as f64).sqrt();
        let tsls_mean = mean(&tsls_estimates);
        let ols_mean = mean(&ols_estimates);
        assert!(
            (tsls_mean - gamma_true).abs() <= 2.0 * mc_se + 1e-3,
            "2SLS mean {tsls_mean} vs truth {gamma_true} (MC SE {mc_se})"
        );
        // OLS is biased upward by construction (cov(endo, eps) > 0).
        assert!(
            ols_mean - gamma_true > 0.2,
            "expected visible OLS bias, got mean {ols_mean}"
        );
    }
}
