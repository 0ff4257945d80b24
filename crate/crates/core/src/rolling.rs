//! Sliding-window re-estimation producing time-varying coefficient paths.

use crate::date::TradingDate;
use crate::error::{Error, Result};
use crate::panel::MergedPanel;
use crate::regression::{build_design_rows, fit_with_newey_west, RegressionSpec, Regressor};

/// One tracked coefficient's window estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientStats {
    pub value: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

/// One window's result, keyed by its end date.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub end_date: TradingDate,
    /// Parallel to `CoefficientPath::targets`; None with a reason when the
    /// window could not be estimated.
    pub estimates: Option<Vec<CoefficientStats>>,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CoefficientPath {
    pub window: usize,
    pub step: usize,
    pub targets: Vec<Regressor>,
    pub points: Vec<PathPoint>,
}

impl CoefficientPath {
    pub fn target_index(&self, r: Regressor) -> Option<usize> {
        self.targets.iter().position(|&t| t == r)
    }
}

/// Estimate `spec` on every window of `window` consecutive panel rows,
/// advancing by `step`, with Newey-West inference. Windows are indexed by
/// end date. Rank-deficient windows are recorded as missing and the run
/// continues.
pub fn rolling_fit(
    panel: &MergedPanel,
    spec: &RegressionSpec,
    asset: &str,
    window: usize,
    step: usize,
    nw_lags: usize,
    targets: &[Regressor],
) -> Result<CoefficientPath> {
    let n = panel.rows.len();
    let k = spec.k();
    if window <= k {
        return Err(Error::Precondition(format!(
            "window W = {window} must exceed spec column count k = {k}"
        )));
    }
    if step < 1 {
        return Err(Error::Precondition("step must be >= 1".to_string()));
    }
    if n < window {
        return Err(Error::Precondition(format!(
            "panel has {n} rows, need at least W = {window}"
        )));
    }
    for t in targets {
        if spec.column_index(*t).is_none() {
            return Err(Error::MissingRegressor(t.label().to_string()));
        }
    }
    let asset_idx = panel.asset_index(asset)?;

    let mut points = Vec::with_capacity((n - window) / step + 1);
    let mut start = 0usize;
    while start + window <= n {
        let rows = &panel.rows[start..start + window];
        let end_date = rows[window - 1].date;
        let point = match build_design_rows(rows, asset_idx, spec)
            .and_then(|design| fit_with_newey_west(&design, nw_lags))
        {
            Ok(fit) => {
                let estimates = targets
                    .iter()
                    .map(|t| {
                        let j = fit.index_of(t.label()).expect("target validated above");
                        CoefficientStats {
                            value: fit.coefficients[j],
                            se: fit.std_errors[j],
                            t: fit.t_stats[j],
                            p: fit.p_values[j],
                        }
                    })
                    .collect();
                PathPoint {
                    end_date,
                    estimates: Some(estimates),
                    skip_reason: None,
                }
            }
            Err(Error::RankDeficient { column }) => PathPoint {
                end_date,
                estimates: None,
                skip_reason: Some(format!("rank deficient: {column}")),
            },
            Err(e) => return Err(e),
        };
        points.push(point);
        start += step;
    }
    Ok(CoefficientPath {
        window,
        step,
        targets: targets.to_vec(),
        points,
    })
}

/// Fraction of non-missing windows whose first-target p-value is below
/// `level`, optionally restricted to end dates in `[from, to]`.
pub fn significance_share(
    path: &CoefficientPath,
    level: f64,
    range: Option<(TradingDate, TradingDate)>,
) -> Result<f64> {
    if path.points.is_empty() {
        return Err(Error::Precondition("empty coefficient path".to_string()));
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::Precondition(format!(
            "significance level {level} outside (0,1)"
        )));
    }
    let mut total = 0usize;
    let mut rejected = 0usize;
    for point in &path.points {
        if let Some((from, to)) = range {
            if point.end_date < from || point.end_date > to {
                continue;
            }
        }
        if let Some(est) = &point.estimates {
            total += 1;
            if est[0].p < level {
                rejected += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Precondition(
            "no estimable windows in the requested range".to_string(),
        ));
    }
    Ok(rejected as f64 / total as f64)
}

/// Delimited export: `window_end,coef,se,t,p[,<target>,<target>_se,...]`.
pub fn path_to_csv(path: &CoefficientPath) -> String {
    let mut out = String::new();
    out.push_str("window_end");
    for (i, target) in path.targets.iter().enumerate() {
        if i == 0 {
            out.push_str(",coef,se,t,p");
        } else {
            let l = target.label();
            out.push_str(&format!(",{l},{l}_se,{l}_t,{l}_p"));
        }
    }
    out.push_str(",status\n");
    for point in &path.points {
        out.push_str(&point.end_date.to_string());
        match &point.estimates {
            Some(est) => {
                for s in est {
                    out.push_str(&format!(",{},{},{},{}", s.value, s.se, s.t, s.p));
                }
                out.push_str(",ok\n");
            }
            None => {
                for _ in &path.targets {
                    out.push_str(",,,,");
                }
                out.push_str(&format!(
                    ",skipped: {}\n",
                    point.skip_reason.as_deref().unwrap_or("unknown")
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_panel, SimulationConfig};

    #[test]
    fn window_count_formula() {
        let mut cfg = SimulationConfig::default();
        cfg.n_days = 200;
        cfg.seed = 5;
        let (panel, _) = generate_panel(&cfg).unwrap();
        let spec = RegressionSpec::augmented();
        let path = rolling_fit(&panel, &spec, "A01", 60, 1, 5, &[Regressor::Sentiment]).unwrap();
        assert_eq!(path.points.len(), 200 - 60 + 1);
    }

    #[test]
    fn step_two_halves_window_count() {
        let mut cfg = SimulationConfig::default();
        cfg.n_days = 101;
        cfg.seed = 6;
        let (panel, _) = generate_panel(&cfg).unwrap();
        let spec = RegressionSpec::augmented();
        let path = rolling_fit(&panel, &spec, "A01", 60, 2, 5, &[Regressor::Sentiment]).unwrap();
        assert_eq!(path.points.len(), 21);
    }

    #[test]
    fn significance_share_extremes() {
        let mk = |p: f64| PathPoint {
            end_date: TradingDate::new(2020, 1, 2).unwrap(),
            estimates: Some(vec![CoefficientStats {
                value: 0.1,
                se: 0.1,
                t: 1.0,
                p,
            }]),
            skip_reason: None,
        };
        let path = CoefficientPath {
            window: 60,
            step: 1,
            targets: vec![Regressor::Sentiment],
            points: vec![mk(0.5), mk(0.5), mk(0.5)],
        };
        assert_eq!(significance_share(&path, 0.10, None).unwrap(), 0.0);
        let path_all = CoefficientPath {
            points: vec![mk(0.001), mk(0.001)],
            ..path.clone()
        };
        assert_eq!(significance_share(&path_all, 0.10, None).unwrap(), 1.0);
        let empty = CoefficientPath {
            points: vec![],
            ..path
        };
        assert!(significance_share(&empty, 0.10, None).is_err());
    }

    #[test]
    fn guards() {
        let mut cfg = SimulationConfig::default();
        cfg.n_days = 80;
        let (panel, _) = generate_panel(&cfg).unwrap();
        let spec = RegressionSpec::augmented();
        assert!(rolling_fit(&panel, &spec, "A01", 8, 1, 5, &[Regressor::Sentiment]).is_err());
        assert!(rolling_fit(&panel, &spec, "A01", 60, 0, 5, &[Regressor::Sentiment]).is_err());
        assert!(rolling_fit(&panel, &spec, "A01", 100, 1, 5, &[Regressor::Sentiment]).is_err());
        assert!(
            rolling_fit(&panel, &spec, "A01", 60, 1, 5, &[Regressor::SentimentVol]).is_err(),
            "target not in spec"
        );
    }
}
