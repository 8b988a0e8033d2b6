//! Service-wide metrics over the persisted snapshots, and their tables.

use nepkit_core::metrics::{
    self, AveragePrecisionResult, AverageRslResult, CorrelationResult, DurationHistogram,
    EditingSession, PrecisionOutcome, ReportIssues, ReportStatistics, RslValue,
};
use nepkit_core::Date;
use serde::Serialize;

use crate::engine::Engine;
use crate::error::Result;
use crate::table::{num, opt_num, Table, MISSING};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticsOptions {
    pub threshold_minutes: f64,
    pub chunk_minutes: f64,
    pub min_presorted: usize,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        Self {
            threshold_minutes: metrics::DEFAULT_DURATION_THRESHOLD_MINUTES,
            chunk_minutes: metrics::DEFAULT_CHUNK_MINUTES,
            min_presorted: metrics::DEFAULT_MIN_PRESORTED_ISSUES,
        }
    }
}

/// Precision at N of one presorted sent issue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IssuePrecision {
    pub report_code: String,
    pub issue_date: Date,
    pub sent_size: usize,
    /// `None` when fewer than N papers were sent.
    pub relevant_count: Option<usize>,
    pub value: Option<f64>,
}

pub fn issue_precisions(reports: &[ReportIssues], n: usize) -> Result<Vec<IssuePrecision>> {
    let mut rows = Vec::new();
    for report in reports {
        for issue in report.presorted() {
            let scored = match metrics::p_at_n(issue, n)? {
                PrecisionOutcome::Scored(p) => Some(p),
                PrecisionOutcome::Excluded => None,
            };
            rows.push(IssuePrecision {
                report_code: report.report_code.clone(),
                issue_date: issue.issue_date(),
                sent_size: issue.sent.len(),
                relevant_count: scored.map(|p| p.relevant_count),
                value: scored.map(|p| p.value),
            });
        }
    }
    Ok(rows)
}

pub fn issue_rsls(reports: &[ReportIssues]) -> Result<Vec<RslValue>> {
    let mut rows = Vec::new();
    for report in reports {
        for issue in report.presorted() {
            rows.push(metrics::rsl(issue)?);
        }
    }
    Ok(rows)
}

pub fn editing_sessions(reports: &[ReportIssues], threshold_minutes: f64) -> Vec<EditingSession> {
    reports
        .iter()
        .flat_map(|r| &r.issues)
        .map(|i| metrics::editing_session(i, threshold_minutes))
        .collect()
}

/// Report profiles for every report with at least one valid session, then
/// the correlations across them.
pub fn feature_correlations(
    reports: &[ReportIssues],
    subscribers: impl Fn(&str) -> usize,
    threshold_minutes: f64,
) -> Result<Vec<CorrelationResult>> {
    let mut profiles = Vec::new();
    for report in reports {
        let count = subscribers(&report.report_code);
        if let Some(p) = metrics::report_profile(report, count, threshold_minutes)? {
            profiles.push(p);
        }
    }
    Ok(metrics::feature_correlations(&profiles)?)
}

/// Everything the analytics commands need, loaded once.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub reports: Vec<ReportIssues>,
    pub subscribers: Vec<(String, usize)>,
    pub nep_all_lengths: Vec<usize>,
}

impl Snapshot {
    fn subscriber_count(&self, code: &str) -> usize {
        self.subscribers
            .iter()
            .find(|(c, _)| c == code)
            .map_or(0, |(_, n)| *n)
    }

    pub fn statistics(&self) -> ReportStatistics {
        let subs: Vec<usize> = self.subscribers.iter().map(|(_, n)| *n).collect();
        metrics::report_statistics(&subs, &self.nep_all_lengths, &self.reports)
    }

    pub fn correlations(&self, threshold_minutes: f64) -> Result<Vec<CorrelationResult>> {
        feature_correlations(
            &self.reports,
            |c| self.subscriber_count(c),
            threshold_minutes,
        )
    }
}

impl Engine {
    pub fn analytics_snapshot(&self) -> Result<Snapshot> {
        let reports = self.all_report_issues()?;
        let subscribers = reports
            .iter()
            .map(|r| {
                Ok((
                    r.report_code.clone(),
                    self.subscriber_count(&r.report_code)?,
                ))
            })
            .collect::<Result<_>>()?;
        let nep_all_lengths = {
            let corpus = self.corpus.read().expect("corpus lock poisoned");
            corpus.issues().map(|i| i.length()).collect()
        };
        Ok(Snapshot {
            reports,
            subscribers,
            nep_all_lengths,
        })
    }
}

pub fn pn_table(reports: &[ReportIssues], n: usize) -> Result<Table> {
    let mut table = Table::new(["report", "issue", "sent", "relevant", "p_at_n"]);
    let rows = issue_precisions(reports, n)?;
    for row in &rows {
        table.push([
            row.report_code.clone(),
            row.issue_date.to_string(),
            row.sent_size.to_string(),
            row.relevant_count
                .map_or_else(|| MISSING.to_string(), |c| c.to_string()),
            opt_num(row.value),
        ]);
    }
    let scored: Vec<f64> = rows.iter().filter_map(|r| r.value).collect();
    table.push([
        "TOTAL".to_string(),
        String::new(),
        rows.len().to_string(),
        scored.len().to_string(),
        opt_num(nepkit_core::stats::mean(&scored)),
    ]);
    Ok(table)
}

pub fn ap_table(result: &AveragePrecisionResult) -> Table {
    let mut table = Table::new(["report", "ap_at_n"]);
    for (code, value) in &result.per_report {
        table.push([code.clone(), num(*value)]);
    }
    table.push(["TOTAL".to_string(), opt_num(result.overall)]);
    table
}

pub fn rsl_table(result: &AverageRslResult) -> Table {
    let mut table = Table::new(["report", "avg_rsl"]);
    for (code, value) in &result.per_report {
        table.push([code.clone(), num(*value)]);
    }
    table.push(["TOTAL".to_string(), opt_num(result.overall)]);
    table
}

/// Per-report session counts and mean duration of valid sessions.
pub fn duration_table(sessions: &[EditingSession]) -> Table {
    let mut table = Table::new([
        "report",
        "sessions",
        "valid",
        "valid_fraction",
        "mean_valid_minutes",
    ]);
    let mut codes: Vec<&str> = sessions.iter().map(|s| s.report_code.as_str()).collect();
    codes.sort_unstable();
    codes.dedup();
    let mut row = |label: &str, group: Vec<&EditingSession>| {
        let valid: Vec<f64> = group
            .iter()
            .filter(|s| s.valid)
            .map(|s| s.duration_minutes)
            .collect();
        let fraction = (!group.is_empty()).then(|| valid.len() as f64 / group.len() as f64);
        table.push([
            label.to_string(),
            group.len().to_string(),
            valid.len().to_string(),
            opt_num(fraction),
            opt_num(nepkit_core::stats::mean(&valid)),
        ]);
    };
    for code in &codes {
        row(
            code,
            sessions.iter().filter(|s| s.report_code == *code).collect(),
        );
    }
    row("TOTAL", sessions.iter().collect());
    table
}

pub fn histogram_table(histogram: &DurationHistogram) -> Table {
    let mut table = Table::new(["from_minutes", "to_minutes", "sessions"]);
    let c = histogram.chunk_minutes;
    for (&bin, &count) in &histogram.bins {
        table.push([
            num(bin as f64 * c),
            num((bin + 1) as f64 * c),
            count.to_string(),
        ]);
    }
    table.push([
        "TOTAL".to_string(),
        String::new(),
        histogram.total.to_string(),
    ]);
    table
}

pub fn correlation_table(results: &[CorrelationResult]) -> Table {
    let mut table = Table::new(["pair", "pearson_r", "reports"]);
    for r in results {
        table.push([
            r.label.clone(),
            opt_num(r.coefficient),
            r.sample_size.to_string(),
        ]);
    }
    table
}

pub fn statistics_table(stats: &ReportStatistics) -> Table {
    let mut table = Table::new(["statistic", "value"]);
    table.push(["reports".to_string(), stats.report_count.to_string()]);
    table.push([
        "subscriptions".to_string(),
        stats.subscription_total.to_string(),
    ]);
    table.push([
        "avg_subscriptions".to_string(),
        opt_num(stats.avg_subscriptions),
    ]);
    table.push([
        "avg_nep_all_size".to_string(),
        opt_num(stats.avg_nep_all_size),
    ]);
    table.push([
        "sent_issues".to_string(),
        stats.sent_issue_count.to_string(),
    ]);
    table.push(["avg_issue_size".to_string(), opt_num(stats.avg_issue_size)]);
    table.push([
        "presorted_fraction".to_string(),
        opt_num(stats.presorted_fraction),
    ]);
    table
}
