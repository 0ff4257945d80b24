//! Input parsing, validation, and the merge of all series into one
//! date-indexed panel. The factor table defines the trading calendar; all
//! other series align to it. Missing data is handled by row deletion.

use std::collections::BTreeMap;
use std::path::Path;

use crate::date::TradingDate;
use crate::error::{Error, Result};
use crate::sentiment::{DailySentiment, SentimentVolatilitySeries};

/// Unit of factor and return inputs on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Percent,
    Fraction,
}

impl Unit {
    pub fn parse(s: &str) -> Option<Unit> {
        match s.to_ascii_lowercase().as_str() {
            "percent" => Some(Unit::Percent),
            "fraction" => Some(Unit::Fraction),
            _ => None,
        }
    }

    fn to_fraction(self, v: f64) -> f64 {
        match self {
            Unit::Percent => v / 100.0,
            Unit::Fraction => v,
        }
    }
}

/// One day of Fama-French factors plus the risk-free rate, as decimal
/// fractions per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorRow {
    pub date: TradingDate,
    pub mkt_rf: f64,
    pub smb: f64,
    pub hml: f64,
    pub rmw: f64,
    pub cma: f64,
    pub rf: f64,
}

const FACTOR_SANITY_BOUND: f64 = 0.5;

/// One day of the 10-year Treasury yield. Levels and diffs stay in percent
/// points. The first observation's diff is missing by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldRow {
    pub date: TradingDate,
    pub dgs10_yield: f64,
    pub dgs10_diff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VixRow {
    pub date: TradingDate,
    pub vix_close: f64,
}

/// Per-asset daily simple returns, decimal fraction.
#[derive(Debug, Clone)]
pub struct ReturnPanel {
    pub assets: Vec<String>,
    pub series: Vec<BTreeMap<TradingDate, f64>>,
}

impl ReturnPanel {
    pub fn asset_index(&self, asset: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == asset)
    }
}

/// Per-asset excess returns together with the count of dates dropped for
/// having only one side of the return/rf pair.
#[derive(Debug, Clone)]
pub struct ExcessPanel {
    pub assets: Vec<String>,
    pub series: Vec<BTreeMap<TradingDate, f64>>,
    pub dropped_dates: usize,
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::Other, e.to_string()),
            },
            _ => Error::MalformedRow {
                path: path.to_path_buf(),
                line: 0,
                msg: e.to_string(),
            },
        })
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let headers = reader.headers().map_err(|e| Error::MalformedRow {
        path: path.to_path_buf(),
        line: 1,
        msg: e.to_string(),
    })?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            expected: expected.join(","),
        });
    }
    Ok(())
}

fn parse_field(path: &Path, line: usize, name: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        msg: format!("unparseable {name} `{raw}`"),
    })
}

fn malformed(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Load the factor table (header `date,mkt_rf,smb,hml,rmw,cma,rf`), convert
/// to decimal fractions, sort by date, reject duplicates.
pub fn load_factor_table(path: &Path, unit: Unit) -> Result<Vec<FactorRow>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["date", "mkt_rf", "smb", "hml", "rmw", "cma", "rf"])?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
        if record.len() != 7 {
            return Err(malformed(path, line, format!("expected 7 fields, got {}", record.len())));
        }
        let date = TradingDate::parse(record.get(0).unwrap())
            .map_err(|e| malformed(path, line, e.to_string()))?;
        let mut vals = [0.0f64; 6];
        for (i, name) in ["mkt_rf", "smb", "hml", "rmw", "cma", "rf"].iter().enumerate() {
            let v = unit.to_fraction(parse_field(path, line, name, record.get(i + 1).unwrap())?);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    field: name.to_string(),
                    date: date.to_string(),
                });
            }
            if v.abs() >= FACTOR_SANITY_BOUND {
                return Err(malformed(
                    path,
                    line,
                    format!("{name} = {v} exceeds sanity bound {FACTOR_SANITY_BOUND} (check --unit)"),
                ));
            }
            vals[i] = v;
        }
        rows.push(FactorRow {
            date,
            mkt_rf: vals[0],
            smb: vals[1],
            hml: vals[2],
            rmw: vals[3],
            cma: vals[4],
            rf: vals[5],
        });
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    rows.sort_by_key(|r| r.date);
    for pair in rows.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(Error::DuplicateDate {
                date: pair[0].date.to_string(),
                context: path.display().to_string(),
            });
        }
    }
    Ok(rows)
}

/// Load the yield series (header `date,dgs10_yield`) and compute the daily
/// change across observation gaps. The first observation's diff is missing.
pub fn load_yield_series(path: &Path) -> Result<Vec<YieldRow>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["date", "dgs10_yield"])?;
    let mut raw: Vec<(TradingDate, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
        let date = TradingDate::parse(record.get(0).unwrap_or(""))
            .map_err(|e| malformed(path, line, e.to_string()))?;
        let level = parse_field(path, line, "dgs10_yield", record.get(1).unwrap_or(""))?;
        if !level.is_finite() || level < 0.0 {
            return Err(malformed(path, line, format!("negative or non-finite yield {level}")));
        }
        raw.push((date, level));
    }
    if raw.is_empty() {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    raw.sort_by_key(|(d, _)| *d);
    for pair in raw.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateDate {
                date: pair[0].0.to_string(),
                context: path.display().to_string(),
            });
        }
    }
    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, &(date, level))| YieldRow {
            date,
            dgs10_yield: level,
            dgs10_diff: if i == 0 { None } else { Some(level - raw[i - 1].1) },
        })
        .collect())
}

/// Load the VIX series (header `date,vix_close`).
pub fn load_vix_series(path: &Path) -> Result<Vec<VixRow>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["date", "vix_close"])?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
        let date = TradingDate::parse(record.get(0).unwrap_or(""))
            .map_err(|e| malformed(path, line, e.to_string()))?;
        let vix_close = parse_field(path, line, "vix_close", record.get(1).unwrap_or(""))?;
        if !vix_close.is_finite() {
            return Err(Error::NonFinite {
                field: "vix_close".to_string(),
                date: date.to_string(),
            });
        }
        rows.push(VixRow { date, vix_close });
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    rows.sort_by_key(|r| r.date);
    for pair in rows.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(Error::DuplicateDate {
                date: pair[0].date.to_string(),
                context: path.display().to_string(),
            });
        }
    }
    Ok(rows)
}

/// Load daily returns, long format (`asset,date,return`) or wide format
/// (`date,<TICKER>,...`), auto-detected from the header.
pub fn load_returns(path: &Path, unit: Unit) -> Result<ReturnPanel> {
    let mut reader = csv_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();

    let mut assets: Vec<String> = Vec::new();
    let mut series: Vec<BTreeMap<TradingDate, f64>> = Vec::new();

    let insert = |asset_idx: usize,
                      date: TradingDate,
                      value: f64,
                      line: usize,
                      assets: &[String],
                      series: &mut Vec<BTreeMap<TradingDate, f64>>|
     -> Result<()> {
        if !value.is_finite() || value <= -1.0 {
            return Err(malformed(
                path,
                line,
                format!("return {value} for {} on {date} must be finite and > -1", assets[asset_idx]),
            ));
        }
        if series[asset_idx].insert(date, value).is_some() {
            return Err(Error::DuplicateDate {
                date: date.to_string(),
                context: format!("asset {} in {}", assets[asset_idx], path.display()),
            });
        }
        Ok(())
    };

    if headers == ["asset", "date", "return"] {
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
            let asset = record.get(0).unwrap_or("").to_string();
            if asset.is_empty() {
                return Err(malformed(path, line, "empty asset identifier"));
            }
            let date = TradingDate::parse(record.get(1).unwrap_or(""))
                .map_err(|e| malformed(path, line, e.to_string()))?;
            let ret = unit.to_fraction(parse_field(path, line, "return", record.get(2).unwrap_or(""))?);
            let asset_idx = match assets.iter().position(|a| *a == asset) {
                Some(i) => i,
                None => {
                    assets.push(asset);
                    series.push(BTreeMap::new());
                    assets.len() - 1
                }
            };
            insert(asset_idx, date, ret, line, &assets, &mut series)?;
        }
    } else if headers.first().map(String::as_str) == Some("date") && headers.len() >= 2 {
        assets = headers[1..].to_vec();
        series = vec![BTreeMap::new(); assets.len()];
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| malformed(path, line, e.to_string()))?;
            let date = TradingDate::parse(record.get(0).unwrap_or(""))
                .map_err(|e| malformed(path, line, e.to_string()))?;
            for (j, asset) in assets.iter().enumerate() {
                let raw = record.get(j + 1).unwrap_or("");
                if raw.is_empty() {
                    continue; // missing observation for this asset
                }
                let ret = unit.to_fraction(parse_field(path, line, asset, raw)?);
                insert(j, date, ret, line, &assets, &mut series)?;
            }
        }
    } else {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            expected: "`asset,date,return` or `date,<TICKER>...`".to_string(),
        });
    }

    if assets.is_empty() || series.iter().all(BTreeMap::is_empty) {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    Ok(ReturnPanel { assets, series })
}

/// excess(t) = return(t) - rf(t) on the shared dates; one-sided dates are
/// omitted and counted.
pub fn compute_excess_return(returns: &ReturnPanel, factors: &[FactorRow]) -> Result<ExcessPanel> {
    let rf: BTreeMap<TradingDate, f64> = factors.iter().map(|f| (f.date, f.rf)).collect();
    let mut series = Vec::with_capacity(returns.series.len());
    let mut dropped = 0usize;
    let mut any = false;
    for asset_series in &returns.series {
        let mut excess = BTreeMap::new();
        for (&date, &ret) in asset_series {
            match rf.get(&date) {
                Some(&rf_t) => {
                    excess.insert(date, ret - rf_t);
                }
                None => dropped += 1,
            }
        }
        dropped += rf.keys().filter(|d| !asset_series.contains_key(*d)).count();
        if !excess.is_empty() {
            any = true;
        }
        series.push(excess);
    }
    if !any {
        return Err(Error::EmptyIntersection {
            left: "returns".to_string(),
            right: "risk-free series".to_string(),
        });
    }
    Ok(ExcessPanel {
        assets: returns.assets.clone(),
        series,
        dropped_dates: dropped,
    })
}

/// One merged trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub date: TradingDate,
    pub mkt_rf: f64,
    pub smb: f64,
    pub hml: f64,
    pub rmw: f64,
    pub cma: f64,
    pub rf: f64,
    pub dgs10_diff: f64,
    pub s_t: f64,
    pub hv_t: Option<f64>,
    pub vix_close: f64,
    /// Excess returns, parallel to `MergedPanel::assets`.
    pub excess: Vec<f64>,
}

/// Row accounting for the merge, satisfying
/// rows_in = rows_out + dropped_for_missing + absent_from_other_series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MergeReport {
    pub rows_in_factors: usize,
    pub rows_out: usize,
    pub rows_dropped_for_missing: usize,
    pub rows_absent_from_other_series: usize,
}

#[derive(Debug, Clone)]
pub struct MergedPanel {
    pub assets: Vec<String>,
    pub rows: Vec<PanelRow>,
    pub report: MergeReport,
}

impl MergedPanel {
    pub fn asset_index(&self, asset: &str) -> Result<usize> {
        self.assets
            .iter()
            .position(|a| a == asset)
            .ok_or_else(|| Error::UnknownAsset(asset.to_string()))
    }

    pub fn calendar(&self) -> Vec<TradingDate> {
        self.rows.iter().map(|r| r.date).collect()
    }

    pub fn row_index(&self, date: TradingDate) -> Option<usize> {
        self.rows.binary_search_by_key(&date, |r| r.date).ok()
    }
}

/// Inner join on the factor table's dates. A factor date survives only when
/// every other series has a non-missing value for it.
pub fn merge_panel(
    factors: &[FactorRow],
    yields: &[YieldRow],
    sentiment: &[DailySentiment],
    hv: Option<&SentimentVolatilitySeries>,
    vix: &[VixRow],
    excess: &ExcessPanel,
) -> Result<MergedPanel> {
    let yield_map: BTreeMap<TradingDate, Option<f64>> =
        yields.iter().map(|y| (y.date, y.dgs10_diff)).collect();
    let sent_map: BTreeMap<TradingDate, f64> =
        sentiment.iter().map(|s| (s.date, s.s_t)).collect();
    let vix_map: BTreeMap<TradingDate, f64> = vix.iter().map(|v| (v.date, v.vix_close)).collect();

    let mut rows = Vec::new();
    let mut dropped_missing = 0usize;
    let mut absent = 0usize;

    'factor: for f in factors {
        // Absent from some other series entirely?
        let yld = match yield_map.get(&f.date) {
            Some(v) => *v,
            None => {
                absent += 1;
                continue;
            }
        };
        let s_t = match sent_map.get(&f.date) {
            Some(v) => *v,
            None => {
                absent += 1;
                continue;
            }
        };
        let vix_close = match vix_map.get(&f.date) {
            Some(v) => *v,
            None => {
                absent += 1;
                continue;
            }
        };
        let mut exc = Vec::with_capacity(excess.assets.len());
        for series in &excess.series {
            match series.get(&f.date) {
                Some(v) => exc.push(*v),
                None => {
                    absent += 1;
                    continue 'factor;
                }
            }
        }
        let hv_t = match hv {
            Some(series) => match series.get(f.date) {
                Some(v) => Some(v),
                None => {
                    // HV requested but not yet defined on this date.
                    dropped_missing += 1;
                    continue;
                }
            },
            None => None,
        };
        // Present everywhere; drop only for a missing value (first yield diff).
        let dgs10_diff = match yld {
            Some(v) => v,
            None => {
                dropped_missing += 1;
                continue;
            }
        };
        rows.push(PanelRow {
            date: f.date,
            mkt_rf: f.mkt_rf,
            smb: f.smb,
            hml: f.hml,
            rmw: f.rmw,
            cma: f.cma,
            rf: f.rf,
            dgs10_diff,
            s_t,
            hv_t,
            vix_close,
            excess: exc,
        });
    }

    if rows.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let report = MergeReport {
        rows_in_factors: factors.len(),
        rows_out: rows.len(),
        rows_dropped_for_missing: dropped_missing,
        rows_absent_from_other_series: absent,
    };
    Ok(MergedPanel {
        assets: excess.assets.clone(),
        rows,
        report,
    })
}
