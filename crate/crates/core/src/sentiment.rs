//! Daily sentiment index construction: item-level scoring, daily aggregation,
//! rolling sentiment volatility, source stratification, and a lexicon
//! fallback scorer for items that arrive as raw text.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::date::{next_on_calendar, TradingDate};
use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-6;

/// Coarse origin class used for source stratification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceTag {
    News,
    Social,
    Other,
}

impl SourceTag {
    /// Classify a free-form origin string. Well-known outlets map to their
    /// class; anything unrecognized is `Other`.
    pub fn classify(origin: &str) -> SourceTag {
        match origin.trim().to_ascii_lowercase().as_str() {
            "news" | "reuters" | "bloomberg" | "wsj" => SourceTag::News,
            "social" | "twitter" | "reddit" => SourceTag::Social,
            _ => SourceTag::Other,
        }
    }

    pub fn parse(s: &str) -> Option<SourceTag> {
        match s.trim().to_ascii_lowercase().as_str() {
            "news" => Some(SourceTag::News),
            "social" => Some(SourceTag::Social),
            "other" => Some(SourceTag::Other),
            _ => None,
        }
    }
}

/// One scored text item.
#[derive(Debug, Clone)]
pub struct SentimentItem {
    pub date: TradingDate,
    pub tag: SourceTag,
    pub origin: String,
    pub p_pos: f64,
    pub p_neu: f64,
    pub p_neg: f64,
}

impl SentimentItem {
    pub fn new(date: TradingDate, origin: &str, p_pos: f64, p_neu: f64, p_neg: f64) -> Result<Self> {
        validate_probs(p_pos, p_neu, p_neg)?;
        Ok(SentimentItem {
            date,
            tag: SourceTag::classify(origin),
            origin: origin.to_string(),
            p_pos,
            p_neu,
            p_neg,
        })
    }

    pub fn score(&self) -> f64 {
        self.p_pos - self.p_neg
    }
}

fn validate_probs(p_pos: f64, p_neu: f64, p_neg: f64) -> Result<()> {
    for (name, p) in [("p_pos", p_pos), ("p_neu", p_neu), ("p_neg", p_neg)] {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidValue(format!("{name} = {p} outside [0,1]")));
        }
    }
    let sum = p_pos + p_neu + p_neg;
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidValue(format!(
            "class probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Item-level sentiment score: p_pos - p_neg, in [-1, +1].
pub fn score_item(p_pos: f64, p_neu: f64, p_neg: f64) -> Result<f64> {
    validate_probs(p_pos, p_neu, p_neg)?;
    Ok(p_pos - p_neg)
}

/// One day's aggregated sentiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailySentiment {
    pub date: TradingDate,
    pub s_t: f64,
    pub n_items: usize,
}

/// Arithmetic mean of item-level scores, per date. Dates with no items are
/// absent from the output; they are never zero-filled.
pub fn aggregate_daily(items: &[SentimentItem]) -> Vec<DailySentiment> {
    let mut by_date: Vec<(TradingDate, f64, usize)> = Vec::new();
    let mut sorted: Vec<&SentimentItem> = items.iter().collect();
    sorted.sort_by_key(|i| i.date);
    for item in sorted {
        match by_date.last_mut() {
            Some((d, sum, n)) if *d == item.date => {
                *sum += item.score();
                *n += 1;
            }
            _ => by_date.push((item.date, item.score(), 1)),
        }
    }
    by_date
        .into_iter()
        .map(|(date, sum, n)| DailySentiment {
            date,
            s_t: sum / n as f64,
            n_items: n,
        })
        .collect()
}

/// Policy for items dated on days absent from the trading calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonTradingPolicy {
    /// Assign to the next trading day (default).
    NextDay,
    /// Drop the item.
    Drop,
}

/// Re-date items onto a trading calendar. Items past the calendar end are
/// always dropped. Returns the retained items and the dropped count.
pub fn align_to_calendar(
    items: &[SentimentItem],
    calendar: &[TradingDate],
    policy: NonTradingPolicy,
) -> (Vec<SentimentItem>, usize) {
    let mut out = Vec::with_capacity(items.len());
    let mut dropped = 0usize;
    for item in items {
        if calendar.binary_search(&item.date).is_ok() {
            out.push(item.clone());
            continue;
        }
        match policy {
            NonTradingPolicy::Drop => dropped += 1,
            NonTradingPolicy::NextDay => match next_on_calendar(calendar, item.date) {
                Some(idx) => {
                    let mut moved = item.clone();
                    moved.date = calendar[idx];
                    out.push(moved);
                }
                None => dropped += 1,
            },
        }
    }
    (out, dropped)
}

/// Keep only items whose source tag is in `filter`, order preserved.
pub fn stratify(items: &[SentimentItem], filter: &BTreeSet<SourceTag>) -> Vec<SentimentItem> {
    items
        .iter()
        .filter(|i| filter.contains(&i.tag))
        .cloned()
        .collect()
}

/// Rolling population standard deviation of the daily index.
#[derive(Debug, Clone)]
pub struct SentimentVolatilitySeries {
    pub window: usize,
    pub values: Vec<(TradingDate, f64)>,
}

impl SentimentVolatilitySeries {
    pub fn get(&self, date: TradingDate) -> Option<f64> {
        self.values
            .binary_search_by_key(&date, |(d, _)| *d)
            .ok()
            .map(|i| self.values[i].1)
    }
}

/// hv_t = sqrt( (1/W) sum_{tau=t-W+1..t} (S_tau - mean)^2 ), population
/// denominator 1/W. Defined only once W observations have accrued.
pub fn rolling_volatility(
    series: &[DailySentiment],
    window: usize,
) -> Result<SentimentVolatilitySeries> {
    if window < 2 {
        return Err(Error::Precondition(format!(
            "volatility window must be >= 2, got {window}"
        )));
    }
    if series.len() < window {
        return Err(Error::Precondition(format!(
            "series has {} observations, need at least window = {window}",
            series.len()
        )));
    }
    let w = window as f64;
    let mut values = Vec::with_capacity(series.len() - window + 1);
    for end in (window - 1)..series.len() {
        let slice = &series[end + 1 - window..=end];
        // Work on deviations from the first element: variance is shift
        // invariant, and a constant window yields exactly zero.
        let base = slice[0].s_t;
        let mean = slice.iter().map(|d| d.s_t - base).sum::<f64>() / w;
        let var = slice
            .iter()
            .map(|d| (d.s_t - base - mean).powi(2))
            .sum::<f64>()
            / w;
        values.push((series[end].date, var.sqrt()));
    }
    Ok(SentimentVolatilitySeries { window, values })
}

/// Word lists for the fallback scorer. Entries are lowercase; the two sets
/// are disjoint.
#[derive(Debug, Clone)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl Lexicon {
    pub fn new<I, J>(positive: I, negative: J) -> Result<Self>
    where
        I: IntoIterator<Item = String>,
        J: IntoIterator<Item = String>,
    {
        let positive: BTreeSet<String> = positive.into_iter().map(|w| w.to_lowercase()).collect();
        let negative: BTreeSet<String> = negative.into_iter().map(|w| w.to_lowercase()).collect();
        if let Some(shared) = positive.intersection(&negative).next() {
            return Err(Error::InvalidValue(format!(
                "lexicon term `{shared}` appears in both word lists"
            )));
        }
        Ok(Lexicon { positive, negative })
    }

    /// Load from two plain-text files, one term per line. Blank lines and
    /// `#` comments are skipped.
    pub fn load(positive_path: &Path, negative_path: &Path) -> Result<Self> {
        let read = |path: &Path| -> Result<Vec<String>> {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Ok(text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect())
        };
        Lexicon::new(read(positive_path)?, read(negative_path)?)
    }

    /// A small built-in list so the pipeline runs without external files.
    pub fn builtin() -> Lexicon {
        let pos = [
            "gain", "gains", "rally", "bullish", "strong", "beat", "beats", "upgrade", "surge",
            "optimism", "growth", "profit", "profits", "win", "record", "boom", "recovery",
        ];
        let neg = [
            "loss", "losses", "crash", "bearish", "weak", "miss", "misses", "downgrade", "plunge",
            "fear", "recession", "default", "selloff", "slump", "drop", "decline", "crisis",
        ];
        Lexicon::new(
            pos.iter().map(|s| s.to_string()),
            neg.iter().map(|s| s.to_string()),
        )
        .expect("builtin lexicon is disjoint")
    }
}

/// Tokenize: lowercase, split on non-alphanumerics, keeping `$`-prefixed
/// cashtags as single tokens.
fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in lower.chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if c == '$' && current.is_empty() && !matches!(prev, Some(p) if p.is_alphanumeric())
        {
            current.push('$');
        } else {
            if current.len() > current.matches('$').count() {
                tokens.push(std::mem::take(&mut current));
            } else {
                current.clear();
            }
        }
        prev = Some(c);
    }
    if current.len() > current.matches('$').count() {
        tokens.push(current);
    }
    tokens
}

/// Fallback scorer: with pos/neg lexicon hit counts over n tokens,
/// p_pos = pos/n, p_neg = neg/n, p_neu = 1 - p_pos - p_neg.
pub fn lexicon_score(text: &str, lexicon: &Lexicon) -> Result<(f64, f64, f64)> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::InvalidValue(
            "text has zero tokens after normalization".to_string(),
        ));
    }
    let n = tokens.len() as f64;
    let pos = tokens.iter().filter(|t| lexicon.positive.contains(*t)).count() as f64;
    let neg = tokens.iter().filter(|t| lexicon.negative.contains(*t)).count() as f64;
    let p_pos = pos / n;
    let p_neg = neg / n;
    Ok((p_pos, 1.0 - p_pos - p_neg, p_neg))
}

/// Parse an item file with header `date,source,p_pos,p_neu,p_neg[,text]`.
/// Rows with empty probability fields but non-empty text are scored with the
/// fallback lexicon.
pub fn load_items(path: &Path, lexicon: &Lexicon) -> Result<Vec<SentimentItem>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_or_malformed(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| io_or_malformed(path, e))?
        .clone();
    let expected = ["date", "source", "p_pos", "p_neu", "p_neg"];
    let got: Vec<&str> = headers.iter().collect();
    if got.len() < 5 || got[..5] != expected {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            expected: "date,source,p_pos,p_neu,p_neg[,text]".to_string(),
        });
    }
    let has_text = got.len() >= 6 && got[5] == "text";

    let mut items = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| io_or_malformed(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let date = TradingDate::parse(field(0)).map_err(|e| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            msg: e.to_string(),
        })?;
        let origin = field(1).to_string();
        let probs_empty = field(2).is_empty() && field(3).is_empty() && field(4).is_empty();
        let (p_pos, p_neu, p_neg) = if probs_empty && has_text && !field(5).is_empty() {
            lexicon_score(field(5), lexicon).map_err(|e| Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                msg: e.to_string(),
            })?
        } else {
            let parse = |i: usize, name: &str| -> Result<f64> {
                field(i).parse::<f64>().map_err(|_| Error::MalformedRow {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("unparseable {name} `{}`", field(i)),
                })
            };
            (parse(2, "p_pos")?, parse(3, "p_neu")?, parse(4, "p_neg")?)
        };
        items.push(
            SentimentItem::new(date, &origin, p_pos, p_neu, p_neg).map_err(|e| {
                Error::MalformedRow {
                    path: path.to_path_buf(),
                    line,
                    msg: e.to_string(),
                }
            })?,
        );
    }
    if items.is_empty() {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    Ok(items)
}

fn io_or_malformed(path: &Path, e: csv::Error) -> Error {
    Error::MalformedRow {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    }
}
