//! Event studies: abnormal returns around an event date under normal-return
//! models fitted on a pre-event estimation window, cross-sectional BMP
//! significance tests, model comparison, and placebo date sampling.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::date::TradingDate;
use crate::error::{Error, Result};
use crate::panel::MergedPanel;
use crate::regression::{build_design_rows, ols_fit, FitResult, RegressionSpec};

/// Default estimation-window length in trading days.
pub const DEFAULT_ESTIMATION_LENGTH: usize = 120;
/// Default event window in event time.
pub const DEFAULT_EVENT_WINDOW: (i64, i64) = (-10, 10);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventWindowConfig {
    /// Nominal event date; t=0 is the next trading day on the panel
    /// calendar if this falls on a non-trading day.
    pub event_date: TradingDate,
    /// Estimation-window length T_e, ending the trading day before the
    /// event window opens so the two windows never overlap.
    pub estimation_length: usize,
    pub t1: i64,
    pub t2: i64,
}

impl EventWindowConfig {
    pub fn new(event_date: TradingDate) -> EventWindowConfig {
        EventWindowConfig {
            event_date,
            estimation_length: DEFAULT_ESTIMATION_LENGTH,
            t1: DEFAULT_EVENT_WINDOW.0,
            t2: DEFAULT_EVENT_WINDOW.1,
        }
    }

    pub fn window_len(&self) -> usize {
        (self.t2 - self.t1 + 1) as usize
    }

    pub fn validate(&self, max_k: usize) -> Result<()> {
        if self.t1 > 0 || self.t2 < 0 {
            return Err(Error::Precondition(format!(
                "event window [{}, {}] must contain t = 0",
                self.t1, self.t2
            )));
        }
        if self.estimation_length <= max_k {
            return Err(Error::Precondition(format!(
                "estimation length {} must exceed the richest spec's column count {max_k}",
                self.estimation_length
            )));
        }
        Ok(())
    }

    /// Resolve (estimation start, event index t0) as panel row indices.
    /// The estimation window covers [start, start + T_e) and ends the day
    /// before the event window opens at t0 + t1.
    pub fn resolve(&self, panel: &MergedPanel) -> Result<(usize, usize)> {
        let calendar = panel.calendar();
        let t0 = crate::date::next_on_calendar(&calendar, self.event_date).ok_or_else(|| {
            Error::Precondition(format!(
                "event date {} is after the last panel date",
                self.event_date
            ))
        })?;
        let window_start = t0 as i64 + self.t1;
        let est_start = window_start - self.estimation_length as i64;
        if est_start < 0 {
            return Err(Error::InsufficientEstimationRows {
                available: window_start.max(0) as usize,
                needed: self.estimation_length,
            });
        }
        if t0 as i64 + self.t2 >= panel.rows.len() as i64 {
            return Err(Error::Precondition(format!(
                "event window extends past the panel end (t0 = {}, t2 = {}, rows = {})",
                t0,
                self.t2,
                panel.rows.len()
            )));
        }
        Ok((est_start as usize, t0))
    }
}

/// Fit the normal-return model on the `T_e` rows ending the day before the
/// event window opens.
pub fn estimate_normal_model(
    panel: &MergedPanel,
    asset: &str,
    config: &EventWindowConfig,
    spec: &RegressionSpec,
) -> Result<FitResult> {
    config.validate(spec.k())?;
    let (est_start, _) = config.resolve(panel)?;
    let asset_idx = panel.asset_index(asset)?;
    let rows = &panel.rows[est_start..est_start + config.estimation_length];
    let design = build_design_rows(rows, asset_idx, spec)?;
    ols_fit(&design)
}

/// One asset's abnormal returns over the event window, with the
/// out-of-sample forecast variance per day for standardization.
#[derive(Debug, Clone)]
pub struct ArSeries {
    pub asset: String,
    pub t1: i64,
    /// AR per event day; None where a regressor was undefined.
    pub values: Vec<Option<f64>>,
    /// sigma^2_{i,t} = s_i^2 (1 + x_t' (X'X)^{-1} x_t).
    pub forecast_variance: Vec<Option<f64>>,
}

impl ArSeries {
    pub fn at(&self, t: i64) -> Option<f64> {
        let i = t - self.t1;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied().flatten()
    }
}

/// AR_t = realized excess return minus the estimation-window model's
/// prediction at the realized event-day regressors.
pub fn abnormal_returns(
    fit: &FitResult,
    panel: &MergedPanel,
    asset: &str,
    config: &EventWindowConfig,
    spec: &RegressionSpec,
) -> Result<ArSeries> {
    let (_, t0) = config.resolve(panel)?;
    let asset_idx = panel.asset_index(asset)?;
    let mut values = Vec::with_capacity(config.window_len());
    let mut forecast_variance = Vec::with_capacity(config.window_len());
    for t in config.t1..=config.t2 {
        let row = &panel.rows[(t0 as i64 + t) as usize];
        match spec.row_values(row) {
            Some(x) => {
                let predicted = fit.predict_row(&x);
                let realized = row.excess[asset_idx];
                values.push(Some(realized - predicted));
                // Leverage term: x' (X'X)^{-1} x.
                let k = x.len();
                let mut quad = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        quad += x[a] * fit.xtx_inv[[a, b]] * x[b];
                    }
                }
                forecast_variance.push(Some(fit.sigma2 * (1.0 + quad)));
            }
            None => {
                values.push(None);
                forecast_variance.push(None);
            }
        }
    }
    Ok(ArSeries {
        asset: asset.to_string(),
        t1: config.t1,
        values,
        forecast_variance,
    })
}

/// A CAR path over [t1, t2]; once an AR day is missing every later CAR
/// value is missing too.
#[derive(Debug, Clone)]
pub struct CarPath {
    pub t1: i64,
    pub values: Vec<Option<f64>>,
    /// First event time from which CAR is undefined, if any.
    pub missing_from: Option<i64>,
}

impl CarPath {
    pub fn at(&self, t: i64) -> Option<f64> {
        let i = t - self.t1;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied().flatten()
    }
}

/// Running sum of AR over the requested sub-range of the computed window.
pub fn cumulative_ar(ar: &ArSeries, t1: i64, t2: i64) -> Result<CarPath> {
    if t1 > t2 {
        return Err(Error::Precondition(format!("empty CAR range [{t1}, {t2}]")));
    }
    let last = ar.t1 + ar.values.len() as i64 - 1;
    if t1 < ar.t1 || t2 > last {
        return Err(Error::Precondition(format!(
            "requested CAR range [{t1}, {t2}] outside computed AR range [{}, {last}]",
            ar.t1
        )));
    }
    let mut values = Vec::with_capacity((t2 - t1 + 1) as usize);
    let mut missing_from = None;
    let mut sum = 0.0;
    for t in t1..=t2 {
        if missing_from.is_none() {
            match ar.at(t) {
                Some(v) => {
                    sum += v;
                    values.push(Some(sum));
                }
                None => {
                    missing_from = Some(t);
                    values.push(None);
                }
            }
        } else {
            values.push(None);
        }
    }
    Ok(CarPath {
        t1,
        values,
        missing_from,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BmpStat {
    pub z: f64,
    pub p: f64,
    pub n_assets: usize,
}

/// Boehmer-Musumeci-Poulsen cross-sectional test of the CAR through
/// `horizon`: each asset's CAR is standardized by the square root of its
/// summed forecast variances, then z = mean(SCAR) sqrt(N) / sd(SCAR).
pub fn bmp_test(series: &[ArSeries], horizon: i64) -> Result<BmpStat> {
    let mut scars = Vec::with_capacity(series.len());
    for s in series {
        let span = (horizon - s.t1 + 1) as usize;
        if horizon < s.t1 || span > s.values.len() {
            continue;
        }
        let mut car = 0.0;
        let mut var_sum = 0.0;
        let mut complete = true;
        for i in 0..span {
            match (s.values[i], s.forecast_variance[i]) {
                (Some(a), Some(v)) => {
                    car += a;
                    var_sum += v;
                }
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if complete && var_sum > 0.0 {
            scars.push(car / var_sum.sqrt());
        }
    }
    let n = scars.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "BMP test needs >= 2 assets with complete windows, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = scars.iter().sum::<f64>() / nf;
    let var = scars.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    // Relative floor: identical SCARs leave only rounding noise behind.
    if var <= f64::MIN_POSITIVE.max(1e-24 * mean * mean) {
        return Err(Error::ZeroCrossSectionalVariance);
    }
    let z = mean * nf.sqrt() / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = 2.0 * (1.0 - normal.cdf(z.abs()));
    Ok(BmpStat { z, p, n_assets: n })
}

/// One model's event-study output across assets.
#[derive(Debug, Clone)]
pub struct ModelEventResult {
    pub spec: RegressionSpec,
    pub ar: Vec<ArSeries>,
    pub car: Vec<CarPath>,
    /// Equal-weight cross-sectional mean CAR per horizon (None if any asset
    /// is missing there).
    pub mean_car: Vec<Option<f64>>,
    /// BMP per horizon; None when the test's preconditions fail (e.g. a
    /// single asset).
    pub bmp: Vec<Option<BmpStat>>,
}

/// Fit, predict, and aggregate one spec across the asset list.
pub fn run_model(
    panel: &MergedPanel,
    assets: &[String],
    config: &EventWindowConfig,
    spec: &RegressionSpec,
) -> Result<ModelEventResult> {
    if assets.is_empty() {
        return Err(Error::Precondition("no assets selected".to_string()));
    }
    let mut ar = Vec::with_capacity(assets.len());
    let mut car = Vec::with_capacity(assets.len());
    for asset in assets {
        let fit = estimate_normal_model(panel, asset, config, spec)?;
        let series = abnormal_returns(&fit, panel, asset, config, spec)?;
        car.push(cumulative_ar(&series, config.t1, config.t2)?);
        ar.push(series);
    }
    let len = config.window_len();
    let mut mean_car = Vec::with_capacity(len);
    let mut bmp = Vec::with_capacity(len);
    for i in 0..len {
        let t = config.t1 + i as i64;
        let vals: Vec<f64> = car.iter().filter_map(|c| c.values[i]).collect();
        mean_car.push(if vals.len() == assets.len() {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        } else {
            None
        });
        bmp.push(bmp_test(&ar, t).ok());
    }
    Ok(ModelEventResult {
        spec: spec.clone(),
        ar,
        car,
        mean_car,
        bmp,
    })
}

#[derive(Debug, Clone)]
pub struct HorizonComparison {
    pub t: i64,
    pub mean_abs_car_baseline: Option<f64>,
    pub mean_abs_car_augmented: Option<f64>,
    /// baseline minus augmented; positive favors the augmented model.
    pub difference: Option<f64>,
    /// Paired t-test on per-asset |CAR| differences (None below 2 assets).
    pub paired_t: Option<f64>,
    pub paired_p: Option<f64>,
    pub augmented_lower: bool,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub horizons: Vec<HorizonComparison>,
}

/// Per horizon: mean |CAR| under each model and a paired cross-sectional
/// test of whether the augmented model's |CAR| is smaller.
pub fn compare_models(
    baseline: &ModelEventResult,
    augmented: &ModelEventResult,
) -> Result<ComparisonReport> {
    let base_assets: Vec<&str> = baseline.ar.iter().map(|s| s.asset.as_str()).collect();
    let aug_assets: Vec<&str> = augmented.ar.iter().map(|s| s.asset.as_str()).collect();
    if base_assets != aug_assets {
        return Err(Error::Precondition(
            "model comparison requires identical asset sets".to_string(),
        ));
    }
    if baseline.mean_car.len() != augmented.mean_car.len()
        || baseline.car.first().map(|c| c.t1) != augmented.car.first().map(|c| c.t1)
    {
        return Err(Error::Precondition(
            "model comparison requires identical horizons".to_string(),
        ));
    }
    let t1 = baseline.car.first().map(|c| c.t1).unwrap_or(0);
    let mut horizons = Vec::with_capacity(baseline.mean_car.len());
    for i in 0..baseline.mean_car.len() {
        let t = t1 + i as i64;
        // Per-asset |CAR| differences where both models are defined.
        let mut diffs = Vec::new();
        let mut abs_b = Vec::new();
        let mut abs_a = Vec::new();
        for (cb, ca) in baseline.car.iter().zip(augmented.car.iter()) {
            if let (Some(b), Some(a)) = (cb.values[i], ca.values[i]) {
                abs_b.push(b.abs());
                abs_a.push(a.abs());
                diffs.push(b.abs() - a.abs());
            }
        }
        let n = diffs.len();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mb, ma, diff) = if n > 0 {
            (Some(mean(&abs_b)), Some(mean(&abs_a)), Some(mean(&diffs)))
        } else {
            (None, None, None)
        };
        let (paired_t, paired_p) = if n >= 2 {
            let d_mean = mean(&diffs);
            let d_var =
                diffs.iter().map(|d| (d - d_mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            if d_var <= f64::MIN_POSITIVE {
                if d_mean == 0.0 {
                    (Some(0.0), Some(1.0))
                } else {
                    (Some(f64::INFINITY * d_mean.signum()), Some(0.0))
                }
            } else {
                let t_stat = d_mean * (n as f64).sqrt() / d_var.sqrt();
                let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
                    .expect("valid Student t parameters");
                (Some(t_stat), Some(2.0 * (1.0 - dist.cdf(t_stat.abs()))))
            }
        } else {
            (None, None)
        };
        horizons.push(HorizonComparison {
            t,
            mean_abs_car_baseline: mb,
            mean_abs_car_augmented: ma,
            difference: diff,
            paired_t,
            paired_p,
            augmented_lower: matches!(diff, Some(d) if d > 0.0),
        });
    }
    Ok(ComparisonReport { horizons })
}

/// Sample `n_events` placebo dates from `calendar`, uniformly without
/// replacement among dates that share the reference event's weekday, can
/// host a full estimation-plus-event window, and do not fall within the
/// event window of any exclusion date. Deterministic given `seed`.
pub fn placebo_sample(
    calendar: &[TradingDate],
    n_events: usize,
    reference: &EventWindowConfig,
    exclusions: &[TradingDate],
    seed: u64,
) -> Result<Vec<TradingDate>> {
    let weekday = reference.event_date.weekday();
    let n = calendar.len() as i64;
    let mut excluded = vec![false; calendar.len()];
    for &e in exclusions {
        if let Some(idx) = crate::date::next_on_calendar(calendar, e) {
            let lo = (idx as i64 + reference.t1).max(0);
            let hi = (idx as i64 + reference.t2).min(n - 1);
            for i in lo..=hi {
                excluded[i as usize] = true;
            }
        }
    }
    let candidates: Vec<TradingDate> = calendar
        .iter()
        .enumerate()
        .filter(|(i, d)| {
            let i = *i as i64;
            d.weekday() == weekday
                && !excluded[i as usize]
                && i + reference.t1 - reference.estimation_length as i64 >= 0
                && i + reference.t2 < n
        })
        .map(|(_, d)| *d)
        .collect();
    if candidates.len() < n_events {
        return Err(Error::InsufficientCandidates {
            requested: n_events,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<TradingDate> = candidates
        .choose_multiple(&mut rng, n_events)
        .copied()
        .collect();
    picked.sort();
    Ok(picked)
}
