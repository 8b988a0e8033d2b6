//! Calendar dates and UTC timestamps with one-second granularity.

use alloc::string::String;
use core::fmt;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

/// Calendar date. Issues are named after one.
pub type Date = chrono::NaiveDate;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Parses a strict `YYYY-MM-DD` date.
pub fn parse_date(text: &str) -> Option<Date> {
    let bytes = text.as_bytes();
    if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    Date::parse_from_str(text, "%Y-%m-%d").ok()
}

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }

    /// Parses `YYYY-MM-DDTHH:MM:SSZ`.
    pub fn parse_iso(text: &str) -> Option<Self> {
        if !text.ends_with('Z') {
            return None;
        }
        NaiveDateTime::parse_from_str(text, TIMESTAMP_FORMAT)
            .ok()
            .map(|dt| Timestamp(dt.and_utc().timestamp()))
    }

    pub fn to_iso(self) -> String {
        use alloc::string::ToString;
        self.to_string()
    }

    /// The calendar date (UTC) this instant falls on.
    pub fn date(self) -> Date {
        DateTime::from_timestamp(self.0, 0)
            .map(|dt| dt.date_naive())
            .unwrap_or_default()
    }

    /// Minutes elapsed from `earlier` to `self`; negative if `earlier` is later.
    pub fn minutes_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) as f64 / 60.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match DateTime::from_timestamp(self.0, 0) {
            Some(dt) => write!(f, "{}", dt.format(TIMESTAMP_FORMAT)),
            None => write!(f, "@{}", self.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_round_trip() {
        let ts = Timestamp::parse_iso("2014-11-03T10:14:30Z").unwrap();
        assert_eq!(ts.to_iso(), "2014-11-03T10:14:30Z");
        assert_eq!(ts.date(), parse_date("2014-11-03").unwrap());
    }

    #[test]
    fn rejects_loose_dates() {
        assert!(parse_date("2014-1-03").is_none());
        assert!(parse_date("2014-02-30").is_none());
        assert!(parse_date("20141103").is_none());
        assert!(Timestamp::parse_iso("2014-11-03T10:14:30").is_none());
    }

    #[test]
    fn minutes_between() {
        let a = Timestamp::parse_iso("2014-11-03T10:00:00Z").unwrap();
        let b = Timestamp::parse_iso("2014-11-03T10:14:30Z").unwrap();
        assert_eq!(b.minutes_since(a), 14.5);
    }
}
