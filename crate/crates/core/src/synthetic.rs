//! Synthetic panel generation with known ground truth, plus brute-force
//! reference estimators. The reference estimators deliberately share no
//! code with the main engine: normal equations solved by Gaussian
//! elimination here versus Householder QR there.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::Normal;

use crate::date::TradingDate;
use crate::error::{Error, Result};
use crate::panel::{
    compute_excess_return, merge_panel, ExcessPanel, FactorRow, MergedPanel, ReturnPanel, VixRow,
    YieldRow,
};
use crate::sentiment::{rolling_volatility, DailySentiment};

/// True coefficients of the return-generating process, Eq.-(3) shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthCoefficients {
    pub alpha: f64,
    pub beta_mkt: f64,
    pub beta_smb: f64,
    pub beta_hml: f64,
    pub beta_rmw: f64,
    pub beta_cma: f64,
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
    pub phi: f64,
}

impl TruthCoefficients {
    /// Magnitudes echoing the empirical full-sample estimates.
    pub fn table_echo() -> TruthCoefficients {
        TruthCoefficients {
            alpha: 0.0002,
            beta_mkt: 0.9442,
            beta_smb: -0.1366,
            beta_hml: -0.1106,
            beta_rmw: -0.0340,
            beta_cma: -0.1292,
            gamma: 0.0062,
            delta: -0.0202,
            theta: 0.2353,
            phi: -0.0001,
        }
    }
}

/// AR(1) process parameters: x_t = mean + ar (x_{t-1} - mean) + innovation,
/// with innovation variance chosen so the stationary standard deviation is
/// `stationary_std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArParams {
    pub mean: f64,
    pub ar: f64,
    pub stationary_std: f64,
}

impl ArParams {
    fn validate(&self, name: &str) -> Result<()> {
        if self.ar.abs() >= 1.0 {
            return Err(Error::Precondition(format!(
                "{name}: |AR(1) coefficient| must be < 1, got {}",
                self.ar
            )));
        }
        if self.stationary_std < 0.0 {
            return Err(Error::Precondition(format!(
                "{name}: volatility must be >= 0"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n_days: usize,
    pub n_assets: usize,
    pub start: TradingDate,
    pub truth: TruthCoefficients,
    pub mkt_rf: ArParams,
    pub smb: ArParams,
    pub hml: ArParams,
    pub rmw: ArParams,
    pub cma: ArParams,
    pub sentiment: ArParams,
    pub hv_window: usize,
    /// Idiosyncratic return noise (mean field unused).
    pub noise: ArParams,
    pub yield_step_std: f64,
    pub vix: ArParams,
    pub rf_daily: f64,
    /// Additive excess-return shocks: (nominal date, magnitude), applied to
    /// every asset on the next trading day on or after the nominal date.
    pub events: Vec<(TradingDate, f64)>,
    pub seed: u64,
}

impl Default for SimulationConfig {
    /// Scales echoing the 2020-2022 descriptive statistics: daily factor
    /// volatilities of 0.6-2.0%, sentiment index std ~0.068, VIX ~25.
    fn default() -> Self {
        SimulationConfig {
            n_days: 724,
            n_assets: 1,
            start: TradingDate::new(2020, 1, 2).expect("valid date"),
            truth: TruthCoefficients::table_echo(),
            mkt_rf: ArParams { mean: 0.000371, ar: 0.10, stationary_std: 0.016677 },
            smb: ArParams { mean: 0.000140, ar: 0.10, stationary_std: 0.008791 },
            hml: ArParams { mean: 0.000382, ar: 0.10, stationary_std: 0.013677 },
            rmw: ArParams { mean: 0.000365, ar: 0.10, stationary_std: 0.007406 },
            cma: ArParams { mean: 0.000398, ar: 0.10, stationary_std: 0.006423 },
            sentiment: ArParams { mean: 0.0458, ar: 0.80, stationary_std: 0.0678 },
            hv_window: 21,
            noise: ArParams { mean: 0.0, ar: 0.30, stationary_std: 0.008 },
            yield_step_std: 0.0609,
            vix: ArParams { mean: 25.17, ar: 0.95, stationary_std: 8.72 },
            rf_daily: 0.00002,
            events: Vec::new(),
            seed: 42,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.n_days < 30 {
            return Err(Error::Precondition(format!(
                "n_days must be >= 30, got {}",
                self.n_days
            )));
        }
        if self.n_assets == 0 {
            return Err(Error::Precondition("n_assets must be >= 1".to_string()));
        }
        if self.hv_window < 2 {
            return Err(Error::Precondition("hv_window must be >= 2".to_string()));
        }
        for (name, p) in [
            ("mkt_rf", &self.mkt_rf),
            ("smb", &self.smb),
            ("hml", &self.hml),
            ("rmw", &self.rmw),
            ("cma", &self.cma),
            ("sentiment", &self.sentiment),
            ("noise", &self.noise),
            ("vix", &self.vix),
        ] {
            p.validate(name)?;
        }
        if self.yield_step_std < 0.0 {
            return Err(Error::Precondition("yield_step_std must be >= 0".to_string()));
        }
        Ok(())
    }

    pub fn asset_name(i: usize) -> String {
        format!("A{:02}", i + 1)
    }
}

/// Everything the generator produced, in the shapes of the input schemas.
#[derive(Debug, Clone)]
pub struct RawSimulation {
    pub calendar: Vec<TradingDate>,
    pub factors: Vec<FactorRow>,
    pub yields: Vec<YieldRow>,
    pub vix: Vec<VixRow>,
    pub daily_sentiment: Vec<DailySentiment>,
    pub assets: Vec<String>,
    /// Raw (not excess) simple returns, per asset.
    pub raw_returns: Vec<BTreeMap<TradingDate, f64>>,
    pub truth: TruthCoefficients,
}

fn simulate_ar1(rng: &mut ChaCha8Rng, normal: &Normal, p: &ArParams, n: usize) -> Vec<f64> {
    let innov_std = p.stationary_std * (1.0 - p.ar * p.ar).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut prev = p.mean + p.stationary_std * rng.sample(normal);
    out.push(prev);
    for _ in 1..n {
        let x = p.mean + p.ar * (prev - p.mean) + innov_std * rng.sample(normal);
        out.push(x);
        prev = x;
    }
    out
}

/// Weekday calendar of `n` dates starting at the first weekday on or after
/// `start`.
pub fn weekday_calendar(start: TradingDate, n: usize) -> Vec<TradingDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = if start.is_weekend() { start.next_weekday() } else { start };
    for _ in 0..n {
        out.push(d);
        d = d.next_weekday();
    }
    out
}

/// Simulate all constituent series. The simulated span has
/// `n_days + hv_window - 1` calendar entries so that, after the HV warmup
/// and the first yield diff are dropped in the merge, exactly `n_days`
/// complete rows remain.
pub fn generate_raw(config: &SimulationConfig) -> Result<RawSimulation> {
    config.validate()?;
    let n_total = config.n_days + config.hv_window - 1;
    let calendar = weekday_calendar(config.start, n_total);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mkt = simulate_ar1(&mut rng, &normal, &config.mkt_rf, n_total);
    let smb = simulate_ar1(&mut rng, &normal, &config.smb, n_total);
    let hml = simulate_ar1(&mut rng, &normal, &config.hml, n_total);
    let rmw = simulate_ar1(&mut rng, &normal, &config.rmw, n_total);
    let cma = simulate_ar1(&mut rng, &normal, &config.cma, n_total);
    let s_raw = simulate_ar1(&mut rng, &normal, &config.sentiment, n_total);
    let s_t: Vec<f64> = s_raw.iter().map(|v| v.clamp(-1.0, 1.0)).collect();

    let mut yield_levels = Vec::with_capacity(n_total);
    let mut level = 1.5f64;
    for _ in 0..n_total {
        yield_levels.push(level);
        level = (level + config.yield_step_std * rng.sample(&normal)).max(0.01);
    }
    let vix_path: Vec<f64> = simulate_ar1(&mut rng, &normal, &config.vix, n_total)
        .into_iter()
        .map(|v| v.max(1.0))
        .collect();

    let factors: Vec<FactorRow> = (0..n_total)
        .map(|i| FactorRow {
            date: calendar[i],
            mkt_rf: mkt[i],
            smb: smb[i],
            hml: hml[i],
            rmw: rmw[i],
            cma: cma[i],
            rf: config.rf_daily,
        })
        .collect();
    let yields: Vec<YieldRow> = (0..n_total)
        .map(|i| YieldRow {
            date: calendar[i],
            dgs10_yield: yield_levels[i],
            dgs10_diff: if i == 0 {
                None
            } else {
                Some(yield_levels[i] - yield_levels[i - 1])
            },
        })
        .collect();
    let vix: Vec<VixRow> = (0..n_total)
        .map(|i| VixRow {
            date: calendar[i],
            vix_close: vix_path[i],
        })
        .collect();
    let daily_sentiment: Vec<DailySentiment> = (0..n_total)
        .map(|i| DailySentiment {
            date: calendar[i],
            s_t: s_t[i],
            n_items: 1,
        })
        .collect();

    // HV and yield diff are undefined over the warmup; those rows are
    // dropped downstream, so any placeholder works for return assembly.
    let hv = rolling_volatility(&daily_sentiment, config.hv_window)?;
    let hv_full: Vec<f64> = (0..n_total)
        .map(|i| {
            if i + 1 >= config.hv_window {
                hv.values[i + 1 - config.hv_window].1
            } else {
                0.0
            }
        })
        .collect();

    // Snap event dates onto the calendar.
    let mut event_shock: BTreeMap<TradingDate, f64> = BTreeMap::new();
    for &(date, magnitude) in &config.events {
        if let Some(idx) = crate::date::next_on_calendar(&calendar, date) {
            *event_shock.entry(calendar[idx]).or_insert(0.0) += magnitude;
        }
    }

    let t = &config.truth;
    let assets: Vec<String> = (0..config.n_assets).map(SimulationConfig::asset_name).collect();
    let mut raw_returns = Vec::with_capacity(config.n_assets);
    for _ in 0..config.n_assets {
        let noise = simulate_ar1(&mut rng, &normal, &config.noise, n_total);
        let mut series = BTreeMap::new();
        for i in 0..n_total {
            let dgs10_diff = if i == 0 {
                0.0
            } else {
                yield_levels[i] - yield_levels[i - 1]
            };
            let mut excess = t.alpha
                + t.beta_mkt * mkt[i]
                + t.beta_smb * smb[i]
                + t.beta_hml * hml[i]
                + t.beta_rmw * rmw[i]
                + t.beta_cma * cma[i]
                + t.gamma * s_t[i]
                + t.delta * hv_full[i]
                + t.theta * s_t[i] * hv_full[i]
                + t.phi * dgs10_diff
                + noise[i];
            if let Some(shock) = event_shock.get(&calendar[i]) {
                excess += shock;
            }
            series.insert(calendar[i], excess + config.rf_daily);
        }
        raw_returns.push(series);
    }

    Ok(RawSimulation {
        calendar,
        factors,
        yields,
        vix,
        daily_sentiment,
        assets,
        raw_returns,
        truth: *t,
    })
}

/// Generate a merged panel of exactly `config.n_days` complete rows through
/// the real ingestion pipeline, together with the ground truth.
pub fn generate_panel(config: &SimulationConfig) -> Result<(MergedPanel, TruthCoefficients)> {
    let raw = generate_raw(config)?;
    let (panel, truth) = merge_raw(&raw, config.hv_window)?;
    debug_assert_eq!(panel.rows.len(), config.n_days);
    Ok((panel, truth))
}

/// Merge an already-generated simulation.
pub fn merge_raw(raw: &RawSimulation, hv_window: usize) -> Result<(MergedPanel, TruthCoefficients)> {
    let returns = ReturnPanel {
        assets: raw.assets.clone(),
        series: raw.raw_returns.clone(),
    };
    let excess: ExcessPanel = compute_excess_return(&returns, &raw.factors)?;
    let hv = rolling_volatility(&raw.daily_sentiment, hv_window)?;
    let panel = merge_panel(
        &raw.factors,
        &raw.yields,
        &raw.daily_sentiment,
        Some(&hv),
        &raw.vix,
        &excess,
    )?;
    Ok((panel, raw.truth))
}

/// Serialize a simulation to the input file schemas:
/// factors.csv / yields.csv / vix.csv / returns.csv (percent units where
/// applicable) and sentiment.csv item probabilities that reproduce S_t with
/// one item per day.
pub fn write_input_files(raw: &RawSimulation, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| Error::Io { path, source })
    };

    let mut factors = String::from("date,mkt_rf,smb,hml,rmw,cma,rf\n");
    for f in &raw.factors {
        factors.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f.date,
            f.mkt_rf * 100.0,
            f.smb * 100.0,
            f.hml * 100.0,
            f.rmw * 100.0,
            f.cma * 100.0,
            f.rf * 100.0
        ));
    }
    write("factors.csv", factors)?;

    let mut yields = String::from("date,dgs10_yield\n");
    for y in &raw.yields {
        yields.push_str(&format!("{},{}\n", y.date, y.dgs10_yield));
    }
    write("yields.csv", yields)?;

    let mut vix = String::from("date,vix_close\n");
    for v in &raw.vix {
        vix.push_str(&format!("{},{}\n", v.date, v.vix_close));
    }
    write("vix.csv", vix)?;

    let mut returns = String::from("date");
    for asset in &raw.assets {
        returns.push(',');
        returns.push_str(asset);
    }
    returns.push('\n');
    for date in &raw.calendar {
        returns.push_str(&date.to_string());
        for series in &raw.raw_returns {
            returns.push_str(&format!(",{}", series[date] * 100.0));
        }
        returns.push('\n');
    }
    write("returns.csv", returns)?;

    let mut sentiment = String::from("date,source,p_pos,p_neu,p_neg\n");
    for (i, d) in raw.daily_sentiment.iter().enumerate() {
        let source = if i % 2 == 0 { "news" } else { "twitter" };
        let p_pos = (1.0 + d.s_t) / 2.0;
        let p_neg = (1.0 - d.s_t) / 2.0;
        sentiment.push_str(&format!("{},{source},{p_pos},0,{p_neg}\n", d.date));
    }
    write("sentiment.csv", sentiment)?;
    Ok(())
}

/// Solve a dense linear system by Gaussian elimination with partial
/// pivoting, one RHS per column of `rhs`.
fn gauss_solve(a: &mut Vec<Vec<f64>>, rhs: &mut Vec<Vec<f64>>) -> Result<()> {
    let k = a.len();
    let m = rhs[0].len();
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= f64::MIN_POSITIVE {
            return Err(Error::Precondition("singular system".to_string()));
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let factor = a[r][col] / a[col][col];
            for c in col..k {
                a[r][c] -= factor * a[col][c];
            }
            for c in 0..m {
                rhs[r][c] -= factor * rhs[col][c];
            }
        }
    }
    // Back substitution in place; rhs becomes the solution.
    for col in (0..k).rev() {
        for c in 0..m {
            let mut s = rhs[col][c];
            for l in col + 1..k {
                s -= a[col][l] * rhs[l][c];
            }
            rhs[col][c] = s / a[col][col];
        }
    }
    Ok(())
}

/// Reference OLS: explicit normal equations, Gaussian elimination.
pub fn brute_force_ols(x: &Array2<f64>, y: &Array1<f64>) -> Result<Array1<f64>> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::Precondition("dimension mismatch".to_string()));
    }
    let mut xtx = vec![vec![0.0f64; k]; k];
    let mut xty = vec![vec![0.0f64; 1]; k];
    for a in 0..k {
        for b in 0..k {
            let mut s = 0.0;
            for t in 0..n {
                s += x[[t, a]] * x[[t, b]];
            }
            xtx[a][b] = s;
        }
        let mut s = 0.0;
        for t in 0..n {
            s += x[[t, a]] * y[t];
        }
        xty[a][0] = s;
    }
    gauss_solve(&mut xtx, &mut xty)?;
    Ok(Array1::from_iter(xty.iter().map(|row| row[0])))
}

/// Reference HAC covariance: the S formula evaluated by explicit nested
/// loops, bread inverted by Gaussian elimination.
pub fn brute_force_hac(x: &Array2<f64>, residuals: &Array1<f64>, lags: usize) -> Result<Array2<f64>> {
    let n = x.nrows();
    let k = x.ncols();
    if residuals.len() != n {
        return Err(Error::Precondition("dimension mismatch".to_string()));
    }
    if n <= k {
        return Err(Error::InsufficientRows { n, k });
    }
    if lags >= n {
        return Err(Error::Precondition(format!("lags = {lags} must be < n = {n}")));
    }
    let nf = n as f64;

    let mut s = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in 0..k {
            // Gamma_0 contribution.
            let mut g0 = 0.0;
            for t in 0..n {
                g0 += x[[t, a]] * residuals[t] * x[[t, b]] * residuals[t];
            }
            let mut total = g0;
            for lag in 1..=lags {
                let w = 1.0 - lag as f64 / (lags as f64 + 1.0);
                let mut gl = 0.0;
                let mut gl_t = 0.0;
                for t in lag..n {
                    gl += x[[t, a]] * residuals[t] * x[[t - lag, b]] * residuals[t - lag];
                    gl_t += x[[t, b]] * residuals[t] * x[[t - lag, a]] * residuals[t - lag];
                }
                total += w * (gl + gl_t);
            }
            // Single 1/n so that lags = 0 reduces to the HC0 sandwich.
            s[a][b] = total / nf;
        }
    }

    // (X'X)^-1 by Gaussian elimination against the identity.
    let mut xtx = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for t in 0..n {
                acc += x[[t, a]] * x[[t, b]];
            }
            xtx[a][b] = acc;
        }
    }
    let mut inv = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        inv[i][i] = 1.0;
    }
    gauss_solve(&mut xtx, &mut inv)?;

    // cov = n * inv * S * inv, explicit loops.
    let mut tmp = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for c in 0..k {
                acc += inv[a][c] * s[c][b];
            }
            tmp[a][b] = acc;
        }
    }
    let mut cov = Array2::<f64>::zeros((k, k));
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for c in 0..k {
                acc += tmp[a][c] * inv[c][b];
            }
            cov[[a, b]] = nf * acc;
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{build_design, ols_fit, RegressionSpec};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn zero_noise_recovers_truth_exactly() {
        let mut cfg = SimulationConfig::default();
        cfg.n_days = 200;
        cfg.noise.stationary_std = 0.0;
        cfg.seed = 1;
        let (panel, truth) = generate_panel(&cfg).unwrap();
        let design = build_design(&panel, &RegressionSpec::interaction(), "A01").unwrap();
        let fit = ols_fit(&design).unwrap();
        assert_abs_diff_eq!(fit.coefficient("const").unwrap(), truth.alpha, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficient("mkt_rf").unwrap(), truth.beta_mkt, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficient("s_t").unwrap(), truth.gamma, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.coefficient("hv_t").unwrap(), truth.delta, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.coefficient("dgs10_diff").unwrap(), truth.phi, epsilon = 1e-10);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let cfg = SimulationConfig {
            n_days: 100,
            seed: 7,
            ..SimulationConfig::default()
        };
        let (p1, _) = generate_panel(&cfg).unwrap();
        let (p2, _) = generate_panel(&cfg).unwrap();
        assert_eq!(p1.rows, p2.rows);
    }

    #[test]
    fn descriptive_scales_echo_targets() {
        let cfg = SimulationConfig::default();
        let (panel, _) = generate_panel(&cfg).unwrap();
        assert_eq!(panel.rows.len(), 724);
        let std = |vals: &[f64]| {
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
        };
        let mkt: Vec<f64> = panel.rows.iter().map(|r| r.mkt_rf).collect();
        let s: Vec<f64> = panel.rows.iter().map(|r| r.s_t).collect();
        let mkt_std = std(&mkt);
        let s_std = std(&s);
        assert!(
            (mkt_std - 0.016677).abs() / 0.016677 < 0.20,
            "mkt_rf std {mkt_std}"
        );
        assert!((s_std - 0.0678).abs() / 0.0678 < 0.20, "s_t std {s_std}");
    }

    #[test]
    fn brute_force_ols_identity_and_diagonal() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let y = array![3.0, 5.0];
        let beta = brute_force_ols(&x, &y).unwrap();
        assert_abs_diff_eq!(beta[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(beta[1], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn brute_force_hac_zero_residuals() {
        let x = array![[1.0, 0.5], [1.0, -0.5], [1.0, 0.25], [1.0, -0.25]];
        let e = Array1::zeros(4);
        let cov = brute_force_hac(&x, &e, 1).unwrap();
        for v in cov.iter() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn brute_force_singular_system_errors() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        let y = array![1.0, 2.0, 3.0];
        assert!(brute_force_ols(&x, &y).is_err());
    }

    #[test]
    fn event_injection_is_visible() {
        let mut cfg = SimulationConfig::default();
        cfg.n_days = 120;
        cfg.noise.stationary_std = 0.0;
        cfg.seed = 3;
        let (clean, _) = generate_panel(&cfg).unwrap();
        let event_date = clean.rows[80].date;
        cfg.events.push((event_date, 0.02));
        let (shocked, _) = generate_panel(&cfg).unwrap();
        let diff = shocked.rows[80].excess[0] - clean.rows[80].excess[0];
        assert_abs_diff_eq!(diff, 0.02, epsilon = 1e-12);
        let diff_other = shocked.rows[79].excess[0] - clean.rows[79].excess[0];
        assert_abs_diff_eq!(diff_other, 0.0, epsilon = 1e-15);
    }
}
