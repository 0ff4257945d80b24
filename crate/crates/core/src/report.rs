//! Table rendering and machine-readable exports: descriptive statistics,
//! side-by-side regression tables with significance stars, event-study
//! summaries, and deterministic output files with a provenance header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::event::{ComparisonReport, EventWindowConfig, ModelEventResult};
use crate::panel::MergedPanel;
use crate::regression::FitResult;

/// Conventional significance stars: *** p<0.01, ** p<0.05, * p<0.10.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Header line prepended to every machine-readable output so reruns are
/// auditable: version, a hash of the resolved configuration, and the seed.
#[derive(Debug, Clone)]
pub struct OutputHeader {
    pub config_hash: String,
    pub seed: u64,
}

impl OutputHeader {
    pub fn new(config_repr: &str, seed: u64) -> OutputHeader {
        let mut hasher = Sha256::new();
        hasher.update(config_repr.as_bytes());
        let digest = hasher.finalize();
        let mut hash = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            write!(hash, "{byte:02x}").expect("write to string");
        }
        OutputHeader {
            config_hash: hash,
            seed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# sentfactor v{} config={} seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.config_hash,
            self.seed
        )
    }
}

/// Write via a temp file in the target directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(io_err)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string())
    ));
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

#[derive(Debug, Clone)]
pub struct DescribeRow {
    pub label: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

fn summarize(label: &str, values: &[f64]) -> DescribeRow {
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    // Population standard deviation, matching the HV_t convention.
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf).sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    DescribeRow {
        label: label.to_string(),
        mean,
        std,
        min,
        max,
        n,
    }
}

/// Descriptive statistics in the conventional row order: the selected
/// asset's excess return, the five factors (all in percent), the sentiment
/// index and its volatility, VIX, and the yield change.
pub fn describe_rows(panel: &MergedPanel, asset: &str) -> Result<Vec<DescribeRow>> {
    if panel.rows.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let asset_idx = panel.asset_index(asset)?;
    let col = |f: &dyn Fn(&crate::panel::PanelRow) -> f64| -> Vec<f64> {
        panel.rows.iter().map(f).collect()
    };
    let pct = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x * 100.0).collect() };
    let mut rows = vec![
        summarize(
            &format!("Excess Return {asset} (%)"),
            &pct(col(&|r| r.excess[asset_idx])),
        ),
        summarize("Market-RF (%)", &pct(col(&|r| r.mkt_rf))),
        summarize("SMB (%)", &pct(col(&|r| r.smb))),
        summarize("HML (%)", &pct(col(&|r| r.hml))),
        summarize("RMW (%)", &pct(col(&|r| r.rmw))),
        summarize("CMA (%)", &pct(col(&|r| r.cma))),
        summarize("Sentiment Index S_t", &col(&|r| r.s_t)),
    ];
    let hv: Vec<f64> = panel.rows.iter().filter_map(|r| r.hv_t).collect();
    if !hv.is_empty() {
        rows.push(summarize("Sentiment Volatility HV_t", &hv));
    }
    rows.push(summarize("VIX Index", &col(&|r| r.vix_close)));
    rows.push(summarize("dDGS10", &col(&|r| r.dgs10_diff)));
    Ok(rows)
}

pub fn render_describe(rows: &[DescribeRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<26} {:>10} {:>10} {:>10} {:>10} {:>13}\n",
        "Variable", "Mean", "Std. Dev.", "Min", "Max", "Observations"
    ));
    out.push_str(&"-".repeat(84));
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:<26} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>13}\n",
            r.label, r.mean, r.std, r.min, r.max, r.n
        ));
    }
    out
}

pub fn describe_csv(rows: &[DescribeRow]) -> String {
    let mut out = String::from("variable,mean,std,min,max,observations\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label, r.mean, r.std, r.min, r.max, r.n
        ));
    }
    out
}

/// Display order and labels for the regression-table rows.
const TERM_ORDER: &[(&str, &str)] = &[
    ("dgs10_diff", "dDGS10"),
    ("mkt_rf", "Market-RF"),
    ("smb", "SMB"),
    ("hml", "HML"),
    ("rmw", "RMW"),
    ("cma", "CMA"),
    ("s_t", "S_t"),
    ("hv_t", "HV_t"),
    ("s_t_x_hv_t", "S_t x HV_t"),
    ("const", "Constant"),
];

/// One column of the comparison table: a fitted model or the reason it
/// could not be estimated.
pub type ModelColumn = (String, std::result::Result<FitResult, String>);

/// Side-by-side model comparison: coefficient with stars, standard error in
/// parentheses, observation count row.
pub fn render_regression_table(columns: &[ModelColumn]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<14}", ""));
    for (name, _) in columns {
        out.push_str(&format!(" {name:>22}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(14 + columns.len() * 23));
    out.push('\n');
    for (term, display) in TERM_ORDER {
        let present = columns.iter().any(|(_, fit)| {
            fit.as_ref()
                .map(|f| f.index_of(term).is_some())
                .unwrap_or(false)
        });
        if !present {
            continue;
        }
        out.push_str(&format!("{display:<14}"));
        for (_, fit) in columns {
            let cell = match fit {
                Ok(f) => match f.index_of(term) {
                    Some(j) => format!(
                        "{:.4}{} ({:.4})",
                        f.coefficients[j],
                        stars(f.p_values[j]),
                        f.std_errors[j]
                    ),
                    None => String::new(),
                },
                Err(_) => String::new(),
            };
            out.push_str(&format!(" {cell:>22}"));
        }
        out.push('\n');
    }
    out.push_str(&"-".repeat(14 + columns.len() * 23));
    out.push('\n');
    out.push_str(&format!("{:<14}", "Observations"));
    for (_, fit) in columns {
        let cell = match fit {
            Ok(f) => f.n.to_string(),
            Err(reason) => format!("omitted: {reason}"),
        };
        out.push_str(&format!(" {cell:>22}"));
    }
    out.push('\n');
    out.push_str("Standard errors in parentheses; *** p<0.01, ** p<0.05, * p<0.10.\n");
    out
}

/// Long-format export: one row per (model, term), full precision.
pub fn regression_csv(columns: &[ModelColumn]) -> String {
    let mut out = String::from("model,term,coefficient,std_error,t_stat,p_value,r_squared,adj_r_squared,n,status\n");
    for (name, fit) in columns {
        match fit {
            Ok(f) => {
                for j in 0..f.labels.len() {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},ok\n",
                        name,
                        f.labels[j],
                        f.coefficients[j],
                        f.std_errors[j],
                        f.t_stats[j],
                        f.p_values[j],
                        f.r_squared,
                        f.adj_r_squared,
                        f.n
                    ));
                }
            }
            Err(reason) => {
                out.push_str(&format!("{name},,,,,,,,,omitted: {reason}\n"));
            }
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-horizon event-study export combining mean CAR paths, BMP tests, and
/// the model comparison.
pub fn event_csv(
    config: &EventWindowConfig,
    baseline: &ModelEventResult,
    augmented: &ModelEventResult,
    comparison: &ComparisonReport,
) -> String {
    let mut out = String::from(
        "event_time,mean_car_baseline,mean_car_augmented,bmp_z_baseline,bmp_p_baseline,\
         bmp_z_augmented,bmp_p_augmented,mean_abs_car_baseline,mean_abs_car_augmented,\
         abs_car_difference,paired_t,paired_p\n",
    );
    for (i, h) in comparison.horizons.iter().enumerate() {
        let _ = config;
        let bmp_b = baseline.bmp[i];
        let bmp_a = augmented.bmp[i];
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            h.t,
            opt(baseline.mean_car[i]),
            opt(augmented.mean_car[i]),
            opt(bmp_b.map(|s| s.z)),
            opt(bmp_b.map(|s| s.p)),
            opt(bmp_a.map(|s| s.z)),
            opt(bmp_a.map(|s| s.p)),
            opt(h.mean_abs_car_baseline),
            opt(h.mean_abs_car_augmented),
            opt(h.difference),
            opt(h.paired_t),
            opt(h.paired_p),
        ));
    }
    out
}

/// Human-readable event-study summary.
pub fn render_event(
    config: &EventWindowConfig,
    baseline: &ModelEventResult,
    augmented: &ModelEventResult,
    comparison: &ComparisonReport,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Event study: t=0 at {}, estimation window {} days, event window [{}, {}]\n\n",
        config.event_date, config.estimation_length, config.t1, config.t2
    ));
    out.push_str(&format!(
        "{:>5} {:>14} {:>14} {:>10} {:>10} {:>12} {:>10}\n",
        "t", "mean CAR base", "mean CAR aug", "BMP z base", "BMP z aug", "|CAR| diff", "paired p"
    ));
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".to_string());
    for (i, h) in comparison.horizons.iter().enumerate() {
        out.push_str(&format!(
            "{:>5} {:>14} {:>14} {:>10} {:>10} {:>12} {:>10}\n",
            h.t,
            fmt(baseline.mean_car[i]),
            fmt(augmented.mean_car[i]),
            fmt(baseline.bmp[i].map(|s| s.z)),
            fmt(augmented.bmp[i].map(|s| s.z)),
            fmt(h.difference),
            fmt(h.paired_p),
        ));
    }
    out
}

/// Per-asset detail export: AR and CAR per event day per model.
pub fn event_detail_csv(baseline: &ModelEventResult, augmented: &ModelEventResult) -> String {
    let mut out = String::from("model,asset,event_time,ar,car\n");
    for (model, res) in [("baseline", baseline), ("augmented", augmented)] {
        for (ar, car) in res.ar.iter().zip(res.car.iter()) {
            for (i, v) in ar.values.iter().enumerate() {
                let t = ar.t1 + i as i64;
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    model,
                    ar.asset,
                    t,
                    opt(*v),
                    opt(car.values[i])
                ));
            }
        }
    }
    out
}
