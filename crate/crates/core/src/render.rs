//! Plain-text rendering of a sent report issue for subscribers.

use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paper::PaperSource;
use crate::time::Date;
use crate::workflow::{Report, Stage, StageSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedIssue {
    pub report_code: String,
    pub issue_date: Date,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("only sent snapshots can be rendered, got {0}")]
    NotSent(Stage),
    #[error("sent snapshot has no papers")]
    Empty,
    #[error("paper {0} is not in the corpus")]
    MissingPaper(String),
}

/// Renders the issue body:
///
/// ```text
/// NEP Report: nep-mac — Macroeconomics
/// Issue: 2014-11-03
///
/// 1. <title>
///    <authors, comma-separated>
///    <fulltext url, when known>
///
/// ```
pub fn render_issue<P: PaperSource + ?Sized>(
    report: &Report,
    sent: &StageSnapshot,
    papers: &P,
) -> Result<RenderedIssue, RenderError> {
    if sent.stage != Stage::Sent {
        return Err(RenderError::NotSent(sent.stage));
    }
    if sent.is_empty() {
        return Err(RenderError::Empty);
    }
    let mut body = String::new();
    let _ = writeln!(body, "NEP Report: {} — {}", report.code, report.subject);
    let _ = writeln!(body, "Issue: {}", sent.issue_date.format("%Y-%m-%d"));
    body.push('\n');
    for (n, handle) in sent.paper_handles.iter().enumerate() {
        let paper = papers
            .paper(handle)
            .ok_or_else(|| RenderError::MissingPaper(handle.clone()))?;
        let _ = writeln!(body, "{}. {}", n + 1, paper.title);
        let _ = writeln!(body, "   {}", paper.authors.join(", "));
        if let Some(url) = &paper.fulltext_url {
            let _ = writeln!(body, "   {url}");
        }
        body.push('\n');
    }
    Ok(RenderedIssue {
        report_code: sent.report_code.clone(),
        issue_date: sent.issue_date,
        body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paper::PaperRecord;
    use crate::time::{parse_date, Timestamp};
    use crate::workflow::Mode;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn report() -> Report {
        Report {
            code: "nep-mac".into(),
            subject: "Macroeconomics".into(),
            editor_name: "Ed".into(),
            created_on: parse_date("2014-01-01").unwrap(),
        }
    }

    fn sent(handles: &[&str]) -> StageSnapshot {
        StageSnapshot {
            report_code: "nep-mac".into(),
            issue_date: parse_date("2014-11-03").unwrap(),
            stage: Stage::Sent,
            version: 1,
            created_at: Timestamp(0),
            mode: Mode::Unsorted,
            paper_handles: handles.iter().map(|h| h.to_string()).collect(),
            source_positions: handles
                .iter()
                .enumerate()
                .map(|(i, h)| (h.to_string(), i as u32 + 1))
                .collect::<BTreeMap<_, _>>(),
        }
    }

    fn papers() -> Vec<PaperRecord> {
        let mut a = PaperRecord::new("a", "Inflation targets");
        a.authors = vec!["Ann Smith".into(), "Bo Li".into()];
        a.fulltext_url = Some("http://x.org/a.pdf".into());
        let mut b = PaperRecord::new("b", "Money demand");
        b.authors = vec!["Cy Doe".into()];
        vec![a, b]
    }

    #[test]
    fn numbered_entries_in_sent_order() {
        let r = render_issue(&report(), &sent(&["b", "a"]), &papers()).unwrap();
        assert_eq!(
            r.body,
            "NEP Report: nep-mac — Macroeconomics\nIssue: 2014-11-03\n\n\
             1. Money demand\n   Cy Doe\n\n\
             2. Inflation targets\n   Ann Smith, Bo Li\n   http://x.org/a.pdf\n\n"
        );
    }

    #[test]
    fn rejects_empty_and_unknown() {
        assert_eq!(
            render_issue(&report(), &sent(&[]), &papers()),
            Err(RenderError::Empty)
        );
        assert_eq!(
            render_issue(&report(), &sent(&["zz"]), &papers()),
            Err(RenderError::MissingPaper("zz".into()))
        );
        let mut s = sent(&["a"]);
        s.stage = Stage::Ordering;
        assert_eq!(
            render_issue(&report(), &s, &papers()),
            Err(RenderError::NotSent(Stage::Ordering))
        );
    }
}
