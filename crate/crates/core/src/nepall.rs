//! nep-all issues: the date-named list of every new addition since the
//! previous issue.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paper::PaperRecord;
use crate::time::{parse_date, Date, Timestamp};

/// Which newly registered papers the general editor admits into nep-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionPolicy {
    pub exclude_undated: bool,
    /// Papers created before this date are left out.
    pub cutoff: Option<Date>,
}

impl Default for CompositionPolicy {
    fn default() -> Self {
        Self {
            exclude_undated: true,
            cutoff: None,
        }
    }
}

impl CompositionPolicy {
    pub fn admits(&self, paper: &PaperRecord) -> bool {
        match paper.creation_date {
            None => !self.exclude_undated,
            Some(date) => self.cutoff.is_none_or(|cutoff| date >= cutoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NepAllIssue {
    pub issue_date: Date,
    pub paper_handles: Vec<String>,
    pub composed_at: Timestamp,
    /// Number of corpus registrations consumed up to and including this issue.
    /// The next issue starts from the registration following this mark.
    pub registration_mark: u64,
}

impl NepAllIssue {
    /// Number of papers; the denominator of the relative search length.
    pub fn length(&self) -> usize {
        self.paper_handles.len()
    }

    pub fn contains(&self, handle: &str) -> bool {
        self.paper_handles.iter().any(|h| h == handle)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("issue date {as_of} is not later than the previous issue {previous}")]
    NotLater { as_of: Date, previous: Date },
}

/// Composes the next nep-all issue.
///
/// `new_papers` are the papers registered since `previous` was composed, in
/// registration order, and `registration_mark` is the corpus registration
/// count after the last of them.
pub fn compose<'a>(
    previous: Option<&NepAllIssue>,
    new_papers: impl IntoIterator<Item = &'a PaperRecord>,
    registration_mark: u64,
    as_of: Date,
    policy: &CompositionPolicy,
    now: Timestamp,
) -> Result<NepAllIssue, ComposeError> {
    if let Some(prev) = previous {
        if as_of <= prev.issue_date {
            return Err(ComposeError::NotLater {
                as_of,
                previous: prev.issue_date,
            });
        }
    }
    let mut seen = BTreeSet::new();
    let paper_handles = new_papers
        .into_iter()
        .filter(|p| policy.admits(p))
        .filter(|p| seen.insert(p.handle.as_str()))
        .map(|p| p.handle.clone())
        .collect();
    Ok(NepAllIssue {
        issue_date: as_of,
        paper_handles,
        composed_at: now,
        registration_mark,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("nep-all file line {line}: {message}")]
pub struct IssueFileError {
    pub line: usize,
    pub message: String,
}

/// Text form of a persisted nep-all issue.
pub fn encode_issue(issue: &NepAllIssue) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Issue: {}", issue.issue_date.format("%Y-%m-%d"));
    let _ = writeln!(out, "Composed: {}", issue.composed_at);
    let _ = writeln!(out, "Through: {}", issue.registration_mark);
    out.push('\n');
    for handle in &issue.paper_handles {
        out.push_str(handle);
        out.push('\n');
    }
    out
}

pub fn decode_issue(text: &str) -> Result<NepAllIssue, IssueFileError> {
    let err = |line: usize, message: &str| IssueFileError {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<String, IssueFileError> {
        let (i, line) = lines.next().ok_or_else(|| err(0, "truncated header"))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(": "))
            .map(ToString::to_string)
            .ok_or_else(|| err(i + 1, key))
    };
    let issue_date = parse_date(&header("Issue")?).ok_or_else(|| err(1, "bad issue date"))?;
    let composed_at =
        Timestamp::parse_iso(&header("Composed")?).ok_or_else(|| err(2, "bad timestamp"))?;
    let registration_mark = header("Through")?
        .parse()
        .map_err(|_| err(3, "bad registration mark"))?;
    let paper_handles = text
        .lines()
        .skip(4)
        .filter(|l| !l.is_empty())
        .map(ToString::to_string)
        .collect();
    Ok(NepAllIssue {
        issue_date,
        paper_handles,
        composed_at,
        registration_mark,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn paper(handle: &str, date: Option<&str>) -> PaperRecord {
        let mut p = PaperRecord::new(handle, "t");
        p.creation_date = date.and_then(parse_date);
        p
    }

    fn day(s: &str) -> Date {
        parse_date(s).unwrap()
    }

    #[test]
    fn all_dated_papers_in_registration_order() {
        let papers: Vec<_> = ["e", "b", "d", "a", "c"]
            .iter()
            .map(|h| paper(h, Some("2014-01-01")))
            .collect();
        let issue = compose(
            None,
            &papers,
            5,
            day("2014-01-05"),
            &CompositionPolicy::default(),
            Timestamp(0),
        )
        .unwrap();
        assert_eq!(issue.length(), 5);
        assert_eq!(issue.paper_handles, ["e", "b", "d", "a", "c"]);
    }

    #[test]
    fn undated_paper_excluded_by_default() {
        let papers = vec![
            paper("a", Some("2014-01-01")),
            paper("b", None),
            paper("c", Some("2014-01-01")),
            paper("d", Some("2014-01-01")),
            paper("e", Some("2014-01-01")),
        ];
        let policy = CompositionPolicy::default();
        let issue = compose(None, &papers, 5, day("2014-01-05"), &policy, Timestamp(0)).unwrap();
        assert_eq!(issue.length(), 4);
        assert!(!issue.contains("b"));

        let lenient = CompositionPolicy {
            exclude_undated: false,
            cutoff: None,
        };
        let issue = compose(None, &papers, 5, day("2014-01-05"), &lenient, Timestamp(0)).unwrap();
        assert_eq!(issue.length(), 5);
    }

    #[test]
    fn cutoff_drops_old_papers() {
        let papers = vec![
            paper("old", Some("1999-01-01")),
            paper("new", Some("2014-01-01")),
        ];
        let policy = CompositionPolicy {
            exclude_undated: true,
            cutoff: Some(day("2010-01-01")),
        };
        let issue = compose(None, &papers, 2, day("2014-01-05"), &policy, Timestamp(0)).unwrap();
        assert_eq!(issue.paper_handles, ["new"]);
    }

    #[test]
    fn empty_issue_is_allowed() {
        let issue = compose(
            None,
            &[],
            0,
            day("2014-01-05"),
            &CompositionPolicy::default(),
            Timestamp(0),
        )
        .unwrap();
        assert_eq!(issue.length(), 0);
    }

    #[test]
    fn issue_dates_strictly_increase() {
        let prev = compose(
            None,
            &[],
            0,
            day("2014-01-05"),
            &CompositionPolicy::default(),
            Timestamp(0),
        )
        .unwrap();
        for as_of in ["2014-01-05", "2014-01-04"] {
            let err = compose(
                Some(&prev),
                &[],
                0,
                day(as_of),
                &CompositionPolicy::default(),
                Timestamp(0),
            )
            .unwrap_err();
            assert!(matches!(err, ComposeError::NotLater { .. }));
        }
    }

    #[test]
    fn file_round_trip() {
        let issue = NepAllIssue {
            issue_date: day("2014-01-05"),
            paper_handles: vec!["RePEc:a:b:1".into(), "RePEc:a:b:2".into()],
            composed_at: Timestamp(1_400_000_000),
            registration_mark: 17,
        };
        assert_eq!(decode_issue(&encode_issue(&issue)).unwrap(), issue);
        let empty = NepAllIssue {
            paper_handles: vec![],
            ..issue
        };
        assert_eq!(decode_issue(&encode_issue(&empty)).unwrap(), empty);
    }
}
