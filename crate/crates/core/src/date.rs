use chrono::{Datelike, NaiveDate, Weekday};
use std::fmt;

use crate::error::{Error, Result};

/// A calendar date identifying one trading day. No time component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TradingDate(NaiveDate);

impl TradingDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self> {
        NaiveDate::from_ymd_opt(year, month, day)
            .map(TradingDate)
            .ok_or_else(|| {
                Error::InvalidValue(format!("invalid date {year:04}-{month:02}-{day:02}"))
            })
    }

    pub fn parse(s: &str) -> Result<Self> {
        NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
            .map(TradingDate)
            .map_err(|_| Error::InvalidValue(format!("unparseable date `{s}`")))
    }

    pub fn weekday(&self) -> Weekday {
        self.0.weekday()
    }

    pub fn is_weekend(&self) -> bool {
        matches!(self.0.weekday(), Weekday::Sat | Weekday::Sun)
    }

    pub fn succ(&self) -> TradingDate {
        TradingDate(self.0.succ_opt().expect("date overflow"))
    }

    /// Next weekday (Mon-Fri) strictly after `self`.
    pub fn next_weekday(&self) -> TradingDate {
        let mut d = self.succ();
        while d.is_weekend() {
            d = d.succ();
        }
        d
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }
}

impl fmt::Display for TradingDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

/// Index of the first calendar entry `>= date`, or None when past the end.
/// The calendar must be sorted ascending.
pub fn next_on_calendar(calendar: &[TradingDate], date: TradingDate) -> Option<usize> {
    let idx = calendar.partition_point(|d| *d < date);
    if idx < calendar.len() {
        Some(idx)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let d = TradingDate::parse("2020-01-02").unwrap();
        assert_eq!(d.to_string(), "2020-01-02");
    }

    #[test]
    fn rejects_bad_dates() {
        assert!(TradingDate::parse("2020-13-40").is_err());
        assert!(TradingDate::new(2021, 2, 30).is_err());
    }

    #[test]
    fn weekend_detection() {
        assert!(TradingDate::new(2022, 6, 18).unwrap().is_weekend()); // Saturday
        assert!(!TradingDate::new(2022, 6, 15).unwrap().is_weekend()); // Wednesday
    }

    #[test]
    fn next_on_calendar_snaps_forward() {
        let cal = vec![
            TradingDate::new(2022, 6, 13).unwrap(),
            TradingDate::new(2022, 6, 14).unwrap(),
            TradingDate::new(2022, 6, 17).unwrap(),
        ];
        let sat = TradingDate::new(2022, 6, 15).unwrap();
        assert_eq!(next_on_calendar(&cal, sat), Some(2));
        let past = TradingDate::new(2022, 6, 20).unwrap();
        assert_eq!(next_on_calendar(&cal, past), None);
    }
}
