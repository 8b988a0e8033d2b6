//! Evaluation of editorial effort and presorting quality.
//!
//! Every measure works on sent issues: the pair of the latest source
//! snapshot (what the editor was shown) and the latest sent snapshot (what
//! the editor chose). A sent paper counts as relevant at cutoff `n` when its
//! 1-based position in the source list is at most `n`.
//!
//! * precision at N: relevant sent papers / N, for issues with at least N
//!   sent papers;
//! * relative search length: deepest source position among the sent papers
//!   (`hin`) over the length of the source list;
//! * both are macro-averaged, first per report and then across reports that
//!   used presorting at least `min_presorted` times.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{mean, pearson};
use crate::time::Date;
use crate::workflow::{Mode, StageSnapshot};

pub const DEFAULT_DURATION_THRESHOLD_MINUTES: f64 = 90.0;
pub const DEFAULT_CHUNK_MINUTES: f64 = 3.0;
pub const DEFAULT_MIN_PRESORTED_ISSUES: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("issue was opened unsorted; presorting measures do not apply")]
    NotApplicable,
    #[error("sent snapshot is empty")]
    EmptySent,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("sent paper {0} has no source position")]
    MissingPosition(String),
}

/// Latest source and sent snapshots of one issue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentIssue {
    pub source: StageSnapshot,
    pub sent: StageSnapshot,
}

impl SentIssue {
    pub fn issue_date(&self) -> Date {
        self.sent.issue_date
    }

    pub fn is_presorted(&self) -> bool {
        self.source.mode == Mode::Presorted
    }

    /// Source positions of the sent papers, in sent order.
    pub fn sent_positions(&self) -> Result<Vec<u32>, MetricError> {
        self.sent
            .paper_handles
            .iter()
            .map(|h| {
                self.source
                    .position_of(h)
                    .ok_or_else(|| MetricError::MissingPosition(h.clone()))
            })
            .collect()
    }
}

/// Every sent issue of one report.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReportIssues {
    pub report_code: String,
    pub issues: Vec<SentIssue>,
}

impl ReportIssues {
    pub fn presorted(&self) -> impl Iterator<Item = &SentIssue> {
        self.issues.iter().filter(|i| i.is_presorted())
    }

    pub fn presorted_count(&self) -> usize {
        self.presorted().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionAtN {
    pub n: usize,
    pub relevant_count: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PrecisionOutcome {
    Scored(PrecisionAtN),
    /// Fewer than N papers were sent.
    Excluded,
}

impl PrecisionOutcome {
    pub fn scored(self) -> Option<PrecisionAtN> {
        match self {
            PrecisionOutcome::Scored(p) => Some(p),
            PrecisionOutcome::Excluded => None,
        }
    }
}

/// Precision at `n` from the source positions of the selected papers.
pub fn precision_from_positions(
    positions: &[u32],
    n: usize,
) -> Result<PrecisionOutcome, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidArgument("n must be positive"));
    }
    if positions.len() < n {
        return Ok(PrecisionOutcome::Excluded);
    }
    let relevant_count = positions.iter().filter(|&&p| p as usize <= n).count();
    Ok(PrecisionOutcome::Scored(PrecisionAtN {
        n,
        relevant_count,
        value: relevant_count as f64 / n as f64,
    }))
}

pub fn p_at_n(issue: &SentIssue, n: usize) -> Result<PrecisionOutcome, MetricError> {
    if !issue.is_presorted() {
        return Err(MetricError::NotApplicable);
    }
    precision_from_positions(&issue.sent_positions()?, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RslValue {
    pub report_code: String,
    pub issue_date: Date,
    pub hin: u32,
    pub nep_all_length: usize,
    pub value: f64,
}

/// `(hin, hin / length)` for the given source positions.
pub fn relative_search_length(positions: &[u32], length: usize) -> Result<(u32, f64), MetricError> {
    let hin = positions
        .iter()
        .copied()
        .max()
        .ok_or(MetricError::EmptySent)?;
    if hin == 0 || hin as usize > length {
        return Err(MetricError::InvalidArgument(
            "position outside the source list",
        ));
    }
    Ok((hin, hin as f64 / length as f64))
}

pub fn rsl(issue: &SentIssue) -> Result<RslValue, MetricError> {
    if !issue.is_presorted() {
        return Err(MetricError::NotApplicable);
    }
    let length = issue.source.len();
    let (hin, value) = relative_search_length(&issue.sent_positions()?, length)?;
    Ok(RslValue {
        report_code: issue.sent.report_code.clone(),
        issue_date: issue.issue_date(),
        hin,
        nep_all_length: length,
        value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragePrecisionResult {
    pub n: usize,
    pub per_report: BTreeMap<String, f64>,
    /// Mean of the per-report values; absent when no report qualifies.
    pub overall: Option<f64>,
    pub valid_report_count: usize,
}

/// Reports with at least `min_presorted` presorted sent issues.
pub fn qualifying_reports(
    reports: &[ReportIssues],
    min_presorted: usize,
) -> impl Iterator<Item = &ReportIssues> {
    reports
        .iter()
        .filter(move |r| r.presorted_count() >= min_presorted)
}

/// Two-level mean of precision at `n`: per report over its scored presorted
/// issues, then over reports.
pub fn ap_at_n(
    reports: &[ReportIssues],
    n: usize,
    min_presorted: usize,
) -> Result<AveragePrecisionResult, MetricError> {
    if n == 0 {
        return Err(MetricError::InvalidArgument("n must be positive"));
    }
    let mut per_report = BTreeMap::new();
    for report in qualifying_reports(reports, min_presorted) {
        let mut values = Vec::new();
        for issue in report.presorted() {
            if let Some(p) = p_at_n(issue, n)?.scored() {
                values.push(p.value);
            }
        }
        if let Some(m) = mean(&values) {
            per_report.insert(report.report_code.clone(), m);
        }
    }
    let values: Vec<f64> = per_report.values().copied().collect();
    Ok(AveragePrecisionResult {
        n,
        overall: mean(&values),
        valid_report_count: per_report.len(),
        per_report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRslResult {
    pub per_report: BTreeMap<String, f64>,
    pub overall: Option<f64>,
    pub valid_report_count: usize,
}

/// Per-report mean RSL over presorted issues, and the mean over reports.
pub fn avg_rsl(
    reports: &[ReportIssues],
    min_presorted: usize,
) -> Result<AverageRslResult, MetricError> {
    let mut per_report = BTreeMap::new();
    for report in qualifying_reports(reports, min_presorted) {
        let values = report
            .presorted()
            .map(|i| rsl(i).map(|r| r.value))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(m) = mean(&values) {
            per_report.insert(report.report_code.clone(), m);
        }
    }
    let values: Vec<f64> = per_report.values().copied().collect();
    Ok(AverageRslResult {
        overall: mean(&values),
        valid_report_count: per_report.len(),
        per_report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditingSession {
    pub report_code: String,
    pub issue_date: Date,
    pub duration_minutes: f64,
    pub valid: bool,
}

/// Time from the latest source snapshot to the latest sent snapshot.
/// Sessions at or above `threshold_minutes` count as interrupted.
pub fn editing_session(issue: &SentIssue, threshold_minutes: f64) -> EditingSession {
    let duration_minutes = issue
        .sent
        .created_at
        .minutes_since(issue.source.created_at)
        .max(0.0);
    EditingSession {
        report_code: issue.sent.report_code.clone(),
        issue_date: issue.issue_date(),
        duration_minutes,
        valid: duration_minutes < threshold_minutes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationHistogram {
    pub chunk_minutes: f64,
    /// Bin `i` counts durations in `[i * chunk, (i + 1) * chunk)`.
    pub bins: BTreeMap<u64, u64>,
    pub total: u64,
}

pub fn duration_histogram(
    durations: impl IntoIterator<Item = f64>,
    chunk_minutes: f64,
) -> Result<DurationHistogram, MetricError> {
    if !(chunk_minutes > 0.0 && chunk_minutes.is_finite()) {
        return Err(MetricError::InvalidArgument("chunk must be positive"));
    }
    let mut bins = BTreeMap::new();
    let mut total = 0;
    for d in durations {
        let bin = libm::floor(d.max(0.0) / chunk_minutes) as u64;
        *bins.entry(bin).or_insert(0) += 1;
        total += 1;
    }
    Ok(DurationHistogram {
        chunk_minutes,
        bins,
        total,
    })
}

/// Share of sessions strictly shorter than `threshold_minutes`.
pub fn valid_fraction(durations: &[f64], threshold_minutes: f64) -> Result<f64, MetricError> {
    if durations.is_empty() {
        return Err(MetricError::InvalidArgument("no sessions"));
    }
    let valid = durations.iter().filter(|&&d| d < threshold_minutes).count();
    Ok(valid as f64 / durations.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportStatistics {
    pub report_count: usize,
    pub subscription_total: usize,
    pub avg_subscriptions: Option<f64>,
    pub avg_nep_all_size: Option<f64>,
    pub avg_issue_size: Option<f64>,
    pub presorted_fraction: Option<f64>,
    pub sent_issue_count: usize,
}

/// Service-wide statistics. `subscriptions` holds one count per active
/// report; `nep_all_lengths` one length per nep-all issue.
pub fn report_statistics(
    subscriptions: &[usize],
    nep_all_lengths: &[usize],
    reports: &[ReportIssues],
) -> ReportStatistics {
    let as_f64 = |xs: &[usize]| xs.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let sent_sizes: Vec<f64> = reports
        .iter()
        .flat_map(|r| &r.issues)
        .map(|i| i.sent.len() as f64)
        .collect();
    let presorted = reports
        .iter()
        .map(ReportIssues::presorted_count)
        .sum::<usize>();
    ReportStatistics {
        report_count: subscriptions.len(),
        subscription_total: subscriptions.iter().sum(),
        avg_subscriptions: mean(&as_f64(subscriptions)),
        avg_nep_all_size: mean(&as_f64(nep_all_lengths)),
        avg_issue_size: mean(&sent_sizes),
        presorted_fraction: (!sent_sizes.is_empty())
            .then(|| presorted as f64 / sent_sizes.len() as f64),
        sent_issue_count: sent_sizes.len(),
    }
}

pub const LABEL_SUBSCRIBERS_EDITING_TIME: &str = "subscribers~editing_time";
pub const LABEL_SUBSCRIBERS_ISSUE_SIZE: &str = "subscribers~issue_size";
pub const LABEL_RSL_ISSUE_SIZE: &str = "rsl~issue_size";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub label: String,
    /// Absent when one of the two series is constant across reports.
    pub coefficient: Option<f64>,
    pub sample_size: usize,
}

/// Per-report aggregates over valid editing sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProfile {
    pub report_code: String,
    pub subscribers: usize,
    pub mean_editing_minutes: f64,
    pub mean_issue_size: f64,
    pub mean_rsl: Option<f64>,
}

pub fn report_profile(
    report: &ReportIssues,
    subscribers: usize,
    threshold_minutes: f64,
) -> Result<Option<ReportProfile>, MetricError> {
    let valid: Vec<(&SentIssue, f64)> = report
        .issues
        .iter()
        .map(|i| (i, editing_session(i, threshold_minutes)))
        .filter(|(_, s)| s.valid)
        .map(|(i, s)| (i, s.duration_minutes))
        .collect();
    if valid.is_empty() {
        return Ok(None);
    }
    let minutes: Vec<f64> = valid.iter().map(|(_, d)| *d).collect();
    let sizes: Vec<f64> = valid.iter().map(|(i, _)| i.sent.len() as f64).collect();
    let rsls = valid
        .iter()
        .filter(|(i, _)| i.is_presorted())
        .map(|(i, _)| rsl(i).map(|r| r.value))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(ReportProfile {
        report_code: report.report_code.clone(),
        subscribers,
        mean_editing_minutes: mean(&minutes).unwrap_or_default(),
        mean_issue_size: mean(&sizes).unwrap_or_default(),
        mean_rsl: mean(&rsls),
    }))
}

fn labeled(label: &str, xs: &[f64], ys: &[f64]) -> CorrelationResult {
    CorrelationResult {
        label: label.to_string(),
        coefficient: pearson(xs, ys).ok().map(|c| c.coefficient),
        sample_size: xs.len(),
    }
}

/// Correlations across report profiles: subscribers against editing time,
/// subscribers against issue size, and mean RSL against issue size (the last
/// one only over reports with presorted issues).
pub fn feature_correlations(
    profiles: &[ReportProfile],
) -> Result<Vec<CorrelationResult>, MetricError> {
    if profiles.len() < 2 {
        return Err(MetricError::InvalidArgument("need at least 2 reports"));
    }
    let subs: Vec<f64> = profiles.iter().map(|p| p.subscribers as f64).collect();
    let minutes: Vec<f64> = profiles.iter().map(|p| p.mean_editing_minutes).collect();
    let sizes: Vec<f64> = profiles.iter().map(|p| p.mean_issue_size).collect();
    let (rsl_values, rsl_sizes): (Vec<f64>, Vec<f64>) = profiles
        .iter()
        .filter_map(|p| p.mean_rsl.map(|r| (r, p.mean_issue_size)))
        .unzip();
    Ok(alloc::vec![
        labeled(LABEL_SUBSCRIBERS_EDITING_TIME, &subs, &minutes),
        labeled(LABEL_SUBSCRIBERS_ISSUE_SIZE, &subs, &sizes),
        labeled(LABEL_RSL_ISSUE_SIZE, &rsl_values, &rsl_sizes),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::{parse_date, Timestamp};
    use crate::workflow::Stage;
    use alloc::format;
    use alloc::vec;

    /// A presorted issue whose sent papers sit at `positions` in a source of
    /// `length` papers.
    fn issue(code: &str, positions: &[u32], length: u32, mode: Mode) -> SentIssue {
        let handle = |p: u32| format!("p{p}");
        let snap = |stage, handles: Vec<String>| StageSnapshot {
            report_code: code.into(),
            issue_date: parse_date("2014-01-05").unwrap(),
            stage,
            version: 1,
            created_at: Timestamp(0),
            mode,
            source_positions: handles
                .iter()
                .map(|h| (h.clone(), h[1..].parse().unwrap()))
                .collect(),
            paper_handles: handles,
        };
        SentIssue {
            source: snap(Stage::Source, (1..=length).map(handle).collect()),
            sent: snap(Stage::Sent, positions.iter().map(|&p| handle(p)).collect()),
        }
    }

    #[test]
    fn worked_precision_example() {
        let p = p_at_n(&issue("r", &[4, 1, 7, 3, 9], 20, Mode::Presorted), 5)
            .unwrap()
            .scored()
            .unwrap();
        assert_eq!(p.relevant_count, 3);
        assert_eq!(p.value, 3.0 / 5.0);
    }

    #[test]
    fn short_issue_excluded() {
        let out = p_at_n(&issue("r", &[1, 2, 3], 20, Mode::Presorted), 5).unwrap();
        assert_eq!(out, PrecisionOutcome::Excluded);
    }

    #[test]
    fn perfect_prefix() {
        let p = precision_from_positions(&[5, 3, 1, 2, 4], 5)
            .unwrap()
            .scored()
            .unwrap();
        assert_eq!(p.value, 1.0);
    }

    #[test]
    fn unsorted_is_not_applicable() {
        let i = issue("r", &[1, 2, 3, 4, 5], 20, Mode::Unsorted);
        assert_eq!(p_at_n(&i, 5), Err(MetricError::NotApplicable));
        assert_eq!(rsl(&i), Err(MetricError::NotApplicable));
        assert!(p_at_n(&issue("r", &[1], 2, Mode::Presorted), 0).is_err());
    }

    #[test]
    fn worked_rsl_example() {
        let r = rsl(&issue("r", &[4, 10, 7], 300, Mode::Presorted)).unwrap();
        assert_eq!(r.hin, 10);
        assert_eq!(r.nep_all_length, 300);
        assert!((r.value - 10.0 / 300.0).abs() < 1e-12);
    }

    #[test]
    fn rsl_edges() {
        assert_eq!(relative_search_length(&[1], 40).unwrap(), (1, 1.0 / 40.0));
        let all: Vec<u32> = (1..=7).collect();
        assert_eq!(relative_search_length(&all, 7).unwrap().1, 1.0);
        assert_eq!(relative_search_length(&[], 7), Err(MetricError::EmptySent));
    }

    fn report(code: &str, issues: Vec<SentIssue>) -> ReportIssues {
        ReportIssues {
            report_code: code.into(),
            issues,
        }
    }

    #[test]
    fn two_level_precision_mean() {
        // A: P@5 = 0.6 and 1.0; B: P@5 = 0.4
        let a = report(
            "a",
            vec![
                issue("a", &[1, 2, 3, 8, 9], 20, Mode::Presorted),
                issue("a", &[1, 2, 3, 4, 5], 20, Mode::Presorted),
            ],
        );
        let b = report(
            "b",
            vec![issue("b", &[1, 2, 8, 9, 10], 20, Mode::Presorted)],
        );
        let r = ap_at_n(&[a, b], 5, 1).unwrap();
        assert!((r.per_report["a"] - 0.8).abs() < 1e-15);
        assert!((r.per_report["b"] - 0.4).abs() < 1e-15);
        assert!((r.overall.unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(r.valid_report_count, 2);
    }

    #[test]
    fn single_report_precision_mean() {
        let a = report(
            "a",
            vec![
                issue("a", &[1, 3, 8, 9], 20, Mode::Presorted),
                issue("a", &[2, 4, 5, 6], 20, Mode::Presorted),
            ],
        );
        assert_eq!(ap_at_n(&[a], 4, 1).unwrap().overall, Some(0.5));
    }

    #[test]
    fn no_qualifying_report() {
        let a = report("a", vec![issue("a", &[1, 2, 3, 4, 5], 20, Mode::Presorted)]);
        let r = ap_at_n(&[a], 5, 50).unwrap();
        assert_eq!(r.valid_report_count, 0);
        assert_eq!(r.overall, None);
    }

    #[test]
    fn report_with_only_excluded_issues_drops_out() {
        let a = report("a", vec![issue("a", &[1, 2], 20, Mode::Presorted)]);
        let r = ap_at_n(&[a], 5, 1).unwrap();
        assert!(r.per_report.is_empty());
    }

    #[test]
    fn unsorted_issues_do_not_count_toward_the_filter() {
        let a = report(
            "a",
            vec![
                issue("a", &[1], 20, Mode::Presorted),
                issue("a", &[1], 20, Mode::Unsorted),
            ],
        );
        assert_eq!(
            ap_at_n(core::slice::from_ref(&a), 1, 2)
                .unwrap()
                .valid_report_count,
            0
        );
        assert_eq!(ap_at_n(&[a], 1, 1).unwrap().valid_report_count, 1);
    }

    #[test]
    fn average_rsl() {
        // 0.02 and 0.04 -> 0.03
        let a = report(
            "a",
            vec![
                issue("a", &[1], 50, Mode::Presorted),
                issue("a", &[2], 50, Mode::Presorted),
            ],
        );
        let b = report("b", vec![issue("b", &[3], 10, Mode::Presorted)]);
        let r = avg_rsl(&[a, b], 1).unwrap();
        assert!((r.per_report["a"] - 0.03).abs() < 1e-15);
        assert_eq!(r.per_report["b"], 0.3);
        assert!((r.overall.unwrap() - 0.165).abs() < 1e-15);
    }

    #[test]
    fn overall_rsl_is_mean_of_report_means() {
        let a = report("a", vec![issue("a", &[1], 10, Mode::Presorted)]);
        let b = report("b", vec![issue("b", &[3], 10, Mode::Presorted)]);
        let r = avg_rsl(&[a, b], 1).unwrap();
        assert!((r.overall.unwrap() - 0.2).abs() < 1e-15);
    }

    fn timed(code: &str, start: &str, end: &str) -> SentIssue {
        let mut i = issue(code, &[1], 5, Mode::Presorted);
        i.source.created_at = Timestamp::parse_iso(start).unwrap();
        i.sent.created_at = Timestamp::parse_iso(end).unwrap();
        i
    }

    #[test]
    fn editing_durations() {
        let s = editing_session(
            &timed("a", "2014-01-05T10:00:00Z", "2014-01-05T10:14:30Z"),
            90.0,
        );
        assert_eq!(s.duration_minutes, 14.5);
        assert!(s.valid);
        let s = editing_session(
            &timed("a", "2014-01-05T09:00:00Z", "2014-01-05T11:00:00Z"),
            90.0,
        );
        assert_eq!(s.duration_minutes, 120.0);
        assert!(!s.valid);
        let s = editing_session(
            &timed("a", "2014-01-05T09:00:00Z", "2014-01-05T10:30:00Z"),
            90.0,
        );
        assert!(!s.valid, "threshold is strict");
    }

    #[test]
    fn histogram_bins() {
        let h = duration_histogram([1.0, 4.0, 89.0, 95.0], 3.0).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(0, 1), (1, 1), (29, 1), (31, 1)]));
        assert_eq!(h.total, 4);
        let h = duration_histogram([3.0], 3.0).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(1, 1)]));
        let h = duration_histogram([], 3.0).unwrap();
        assert!(h.bins.is_empty());
        assert_eq!(h.total, 0);
        assert!(duration_histogram([1.0], 0.0).is_err());
        assert!(duration_histogram([1.0], -3.0).is_err());
    }

    #[test]
    fn valid_fractions() {
        assert_eq!(valid_fraction(&[1.0, 4.0, 89.0, 95.0], 90.0).unwrap(), 0.75);
        assert_eq!(valid_fraction(&[1.0, 2.0], 90.0).unwrap(), 1.0);
        assert!(valid_fraction(&[], 90.0).is_err());
    }

    #[test]
    fn statistics_fixture() {
        // sizes {10, 14} and {3}: (10 + 14 + 3) / 3 = 9
        let positions = |n: u32| (1..=n).collect::<Vec<_>>();
        let a = report(
            "a",
            vec![
                issue("a", &positions(10), 30, Mode::Presorted),
                issue("a", &positions(14), 30, Mode::Presorted),
            ],
        );
        let b = report("b", vec![issue("b", &positions(3), 30, Mode::Presorted)]);
        let s = report_statistics(&[4, 6], &[30, 30, 40], &[a, b]);
        assert_eq!(s.avg_issue_size, Some(9.0));
        assert_eq!(s.presorted_fraction, Some(1.0));
        assert_eq!(s.subscription_total, 10);
        assert_eq!(s.avg_subscriptions, Some(5.0));
        assert_eq!(s.report_count, 2);
        assert_eq!(s.sent_issue_count, 3);

        let empty = report_statistics(&[], &[], &[]);
        assert_eq!(empty.report_count, 0);
        assert_eq!(empty.avg_issue_size, None);
        assert_eq!(empty.presorted_fraction, None);
        assert_eq!(empty.avg_nep_all_size, None);
    }

    #[test]
    fn rsl_proportional_to_size() {
        // report k sends k papers at positions 1..k of a 20-paper source:
        // mean RSL = k / 20, mean size = k
        let profiles: Vec<_> = (1..=4u32)
            .map(|k| {
                let positions: Vec<u32> = (1..=k).collect();
                let r = report("r", vec![issue("r", &positions, 20, Mode::Presorted)]);
                report_profile(&r, k as usize * 3, 90.0).unwrap().unwrap()
            })
            .collect();
        let c = feature_correlations(&profiles).unwrap();
        assert_eq!(c[2].label, LABEL_RSL_ISSUE_SIZE);
        assert!((c[2].coefficient.unwrap() - 1.0).abs() < 1e-12);
        // editing time is constant (0) across reports
        assert_eq!(c[0].coefficient, None);
        assert!(feature_correlations(&profiles[..1]).is_err());
    }
}
