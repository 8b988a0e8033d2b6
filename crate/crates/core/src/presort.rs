//! Presorting: ranks the papers of a nep-all issue by how likely a report's
//! editor is to include them.
//!
//! The model is an add-one smoothed log-odds score over title and abstract
//! tokens. For every token it keeps how often the token occurred in papers
//! the editor included and in papers the editor left out, across all past
//! (nep-all, sent) pairs of the report. A paper scores
//!
//! ```text
//! prior + sum over its tokens t of ln((included(t) + 1) / (excluded(t) + 1))
//! ```
//!
//! where `prior = ln((included papers + 1) / (excluded papers + 1))`.
//! A model trained on no history is the cold-start model and leaves the
//! nep-all order untouched.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nepall::NepAllIssue;
use crate::paper::{PaperRecord, PaperSource};
use crate::time::Date;
use crate::tokenize::paper_tokens;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub included: u64,
    pub excluded: u64,
}

impl TokenCounts {
    fn log_odds(self) -> f64 {
        libm::log((self.included as f64 + 1.0) / (self.excluded as f64 + 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresortModel {
    pub report_code: String,
    pub vocabulary: BTreeMap<String, TokenCounts>,
    pub trained_issue_count: u64,
    pub prior_log_odds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresortedOrder {
    pub issue_date: Date,
    pub ranked_handles: Vec<String>,
    pub scores: Vec<f64>,
    /// Size of the history the ranking model was trained on.
    pub trained_issue_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresortError {
    #[error("sent handle {handle} is not part of nep-all {issue_date}")]
    Inconsistent { issue_date: Date, handle: String },
    #[error("paper {0} is not in the corpus")]
    MissingPaper(String),
    #[error("model for {0} has not been trained")]
    NotTrained(String),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
}

impl PresortModel {
    pub fn cold_start(report_code: impl Into<String>) -> Self {
        Self {
            report_code: report_code.into(),
            vocabulary: BTreeMap::new(),
            trained_issue_count: 0,
            prior_log_odds: 0.0,
        }
    }

    pub fn is_cold_start(&self) -> bool {
        self.trained_issue_count == 0
    }

    pub fn counts(&self, token: &str) -> TokenCounts {
        self.vocabulary.get(token).copied().unwrap_or_default()
    }
}

/// Learns a model from the report's past issues. Each history entry pairs a
/// nep-all issue with the set of handles the editor sent from it.
pub fn train<P: PaperSource + ?Sized>(
    report_code: &str,
    history: &[(NepAllIssue, BTreeSet<String>)],
    papers: &P,
) -> Result<PresortModel, PresortError> {
    let mut model = PresortModel::cold_start(report_code);
    let mut included_papers = 0u64;
    let mut excluded_papers = 0u64;

    for (issue, sent) in history {
        if let Some(stray) = sent.iter().find(|h| !issue.contains(h)) {
            return Err(PresortError::Inconsistent {
                issue_date: issue.issue_date,
                handle: stray.clone(),
            });
        }
        for handle in &issue.paper_handles {
            let paper = papers
                .paper(handle)
                .ok_or_else(|| PresortError::MissingPaper(handle.clone()))?;
            let included = sent.contains(handle);
            if included {
                included_papers += 1;
            } else {
                excluded_papers += 1;
            }
            for token in paper_tokens(paper) {
                let entry = model.vocabulary.entry(token).or_default();
                if included {
                    entry.included += 1;
                } else {
                    entry.excluded += 1;
                }
            }
        }
    }
    model.trained_issue_count = history.len() as u64;
    model.prior_log_odds =
        libm::log((included_papers as f64 + 1.0) / (excluded_papers as f64 + 1.0));
    Ok(model)
}

/// Log-odds of inclusion for one paper.
pub fn score(model: &PresortModel, paper: &PaperRecord) -> Result<f64, PresortError> {
    if model.is_cold_start() {
        return Err(PresortError::NotTrained(model.report_code.clone()));
    }
    Ok(
        paper_tokens(paper).fold(model.prior_log_odds, |acc, token| {
            acc + model.counts(&token).log_odds()
        }),
    )
}

/// Orders a nep-all issue by descending score. Ties keep their nep-all
/// order; a cold-start model returns the nep-all order with zero scores.
pub fn presort<P: PaperSource + ?Sized>(
    model: &PresortModel,
    issue: &NepAllIssue,
    papers: &P,
) -> Result<PresortedOrder, PresortError> {
    let resolved = issue
        .paper_handles
        .iter()
        .map(|h| {
            papers
                .paper(h)
                .ok_or_else(|| PresortError::MissingPaper(h.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut ranked: Vec<(f64, &str)> = if model.is_cold_start() {
        issue
            .paper_handles
            .iter()
            .map(|h| (0.0, h.as_str()))
            .collect()
    } else {
        resolved
            .iter()
            .map(|p| score(model, p).map(|s| (s, p.handle.as_str())))
            .collect::<Result<_, _>>()?
    };
    // slice::sort_by is stable, which gives the nep-all tie-break.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    Ok(PresortedOrder {
        issue_date: issue.issue_date,
        ranked_handles: ranked.iter().map(|(_, h)| h.to_string()).collect(),
        scores: ranked.iter().map(|(s, _)| *s).collect(),
        trained_issue_count: model.trained_issue_count,
    })
}

const MODEL_MAGIC: &str = "nepkit-presort-model 1";

/// Formats `x` in plain decimal notation with 12 significant digits.
pub fn format_significant(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", (digits - 1).max(0) as usize, x);
    }
    let magnitude = libm::floor(libm::log10(libm::fabs(x))) as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Serializes a model: a header followed by one
/// `token included_count excluded_count` line per vocabulary entry, sorted by
/// token.
pub fn encode_model(model: &PresortModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "report_code {}", model.report_code);
    let _ = writeln!(out, "trained_issue_count {}", model.trained_issue_count);
    let _ = writeln!(
        out,
        "prior_log_odds {}",
        format_significant(model.prior_log_odds, 12)
    );
    out.push('\n');
    for (token, counts) in &model.vocabulary {
        let _ = writeln!(out, "{token} {} {}", counts.included, counts.excluded);
    }
    out
}

pub fn decode_model(text: &str) -> Result<PresortModel, PresortError> {
    let err = |line: usize, message: &str| PresortError::Format {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |expect: &str| -> Result<(usize, String), PresortError> {
        let (no, line) = lines.next().ok_or_else(|| err(0, "truncated header"))?;
        if expect.is_empty() {
            return Ok((no, line.to_string()));
        }
        line.strip_prefix(expect)
            .and_then(|r| r.strip_prefix(' '))
            .map(|r| (no, r.to_string()))
            .ok_or_else(|| err(no, expect))
    };
    let (no, magic) = next("")?;
    if magic != MODEL_MAGIC {
        return Err(err(no, "unknown model format version"));
    }
    let (_, report_code) = next("report_code")?;
    let (no, count) = next("trained_issue_count")?;
    let trained_issue_count = count.parse().map_err(|_| err(no, "bad issue count"))?;
    let (no, prior) = next("prior_log_odds")?;
    let prior_log_odds = prior.parse().map_err(|_| err(no, "bad prior"))?;
    let (no, blank) = next("")?;
    if !blank.is_empty() {
        return Err(err(no, "expected blank line after header"));
    }

    let mut vocabulary = BTreeMap::new();
    for (no, line) in text.lines().enumerate().skip(5) {
        let mut fields = line.split(' ');
        let parsed = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(token), Some(inc), Some(exc), None) => inc
                .parse()
                .ok()
                .zip(exc.parse().ok())
                .map(|(included, excluded)| (token, TokenCounts { included, excluded })),
            _ => None,
        };
        let (token, counts) = parsed.ok_or_else(|| err(no + 1, "bad vocabulary entry"))?;
        vocabulary.insert(token.to_string(), counts);
    }
    Ok(PresortModel {
        report_code,
        vocabulary,
        trained_issue_count,
        prior_log_odds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Timestamp;
    use alloc::vec;

    fn paper(handle: &str, title: &str) -> PaperRecord {
        PaperRecord::new(handle, title)
    }

    fn issue(handles: &[&str]) -> NepAllIssue {
        NepAllIssue {
            issue_date: crate::time::parse_date("2014-01-05").unwrap(),
            paper_handles: handles.iter().map(|h| h.to_string()).collect(),
            composed_at: Timestamp(0),
            registration_mark: handles.len() as u64,
        }
    }

    fn sent(handles: &[&str]) -> BTreeSet<String> {
        handles.iter().map(|h| h.to_string()).collect()
    }

    fn tax_soccer() -> (PresortModel, Vec<PaperRecord>) {
        let papers = vec![paper("A", "tax policy"), paper("B", "soccer clubs")];
        let model = train("nep-pbe", &[(issue(&["A", "B"]), sent(&["A"]))], &papers).unwrap();
        (model, papers)
    }

    #[test]
    fn empty_history_is_cold_start() {
        let model = train("nep-pbe", &[], &Vec::<PaperRecord>::new()).unwrap();
        assert!(model.is_cold_start());
        assert_eq!(model.trained_issue_count, 0);
        assert!(model.vocabulary.is_empty());
    }

    #[test]
    fn counts_tokens_per_class() {
        let (model, _) = tax_soccer();
        // Hand count: "tax policy" was included, "soccer clubs" was not.
        let expect = |t: &str, included, excluded| {
            assert_eq!(model.counts(t), TokenCounts { included, excluded }, "{t}");
        };
        expect("tax", 1, 0);
        expect("policy", 1, 0);
        expect("soccer", 0, 1);
        expect("clubs", 0, 1);
        assert_eq!(model.vocabulary.len(), 4);
        assert_eq!(model.trained_issue_count, 1);
        // one paper included, one excluded: ln(2/2)
        assert_eq!(model.prior_log_odds, 0.0);
    }

    #[test]
    fn sent_outside_nep_all_is_inconsistent() {
        let papers = vec![paper("A", "tax")];
        let err = train("nep-pbe", &[(issue(&["A"]), sent(&["Z"]))], &papers).unwrap_err();
        assert!(matches!(err, PresortError::Inconsistent { handle, .. } if handle == "Z"));
    }

    #[test]
    fn score_matches_hand_computation() {
        let (model, _) = tax_soccer();
        let got = score(&model, &paper("C", "tax reform")).unwrap();
        // tax: (1,0) -> ln(2/1); reform unseen -> ln(1/1)
        let expected = model.prior_log_odds + core::f64::consts::LN_2 + 0.0;
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn unknown_tokens_score_the_prior() {
        let papers = vec![paper("A", "tax"), paper("B", "tax"), paper("C", "golf")];
        let model = train(
            "nep-pbe",
            &[(issue(&["A", "B", "C"]), sent(&["A"]))],
            &papers,
        )
        .unwrap();
        let s = score(&model, &paper("X", "zebra")).unwrap();
        assert_eq!(s, model.prior_log_odds);
        assert_eq!(s, libm::log(2.0 / 3.0));
        assert_eq!(s, score(&model, &paper("X", "zebra")).unwrap());
    }

    #[test]
    fn cold_start_cannot_score() {
        let err = score(&PresortModel::cold_start("nep-pbe"), &paper("A", "t")).unwrap_err();
        assert!(matches!(err, PresortError::NotTrained(_)));
    }

    #[test]
    fn cold_start_presort_is_identity() {
        let papers = vec![paper("A", "x"), paper("B", "y"), paper("C", "z")];
        let order = presort(
            &PresortModel::cold_start("nep-pbe"),
            &issue(&["C", "A", "B"]),
            &papers,
        )
        .unwrap();
        assert_eq!(order.ranked_handles, ["C", "A", "B"]);
        assert_eq!(order.scores, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn tax_papers_rank_above_soccer_papers() {
        let (model, mut papers) = tax_soccer();
        papers.extend([
            paper("S1", "soccer transfer fees"),
            paper("T1", "optimal tax design"),
            paper("S2", "soccer clubs league"),
            paper("T2", "tax policy evasion"),
        ]);
        // Hand-computed log-odds with prior 0:
        //   S1: ln(1/2) = -0.693   T1: ln 2 = 0.693
        //   S2: 2 ln(1/2) = -1.386 T2: 2 ln 2 = 1.386
        let order = presort(&model, &issue(&["S1", "T1", "S2", "T2"]), &papers).unwrap();
        assert_eq!(order.ranked_handles, ["T2", "T1", "S1", "S2"]);
        assert!(order.scores.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn equal_scores_keep_nep_all_order() {
        let (model, mut papers) = tax_soccer();
        papers.extend(["P", "Q", "R"].map(|h| paper(h, "same words")));
        let order = presort(&model, &issue(&["R", "P", "Q"]), &papers).unwrap();
        assert_eq!(order.ranked_handles, ["R", "P", "Q"]);
    }

    #[test]
    fn unresolvable_handle() {
        let (model, papers) = tax_soccer();
        let err = presort(&model, &issue(&["A", "nope"]), &papers).unwrap_err();
        assert_eq!(err, PresortError::MissingPaper("nope".into()));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(
            format_significant(-core::f64::consts::LN_2, 12),
            "-0.693147180560"
        );
        assert_eq!(format_significant(12.5, 12), "12.5000000000");
        assert_eq!(format_significant(0.0, 12), "0.00000000000");
        assert_eq!(
            format_significant(0.000123456789012345, 12),
            "0.000123456789012"
        );
    }

    #[test]
    fn model_text_round_trip() {
        let (model, _) = tax_soccer();
        let text = encode_model(&model);
        assert!(text.starts_with("nepkit-presort-model 1\nreport_code nep-pbe\n"));
        assert!(text.contains("\ntax 1 0\n"));
        let back = decode_model(&text).unwrap();
        assert_eq!(back.vocabulary, model.vocabulary);
        assert!((back.prior_log_odds - model.prior_log_odds).abs() < 1e-11);
        assert_eq!(encode_model(&back), text);
    }

    #[test]
    fn rejects_corrupt_model() {
        assert!(decode_model("garbage\n").is_err());
        let (model, _) = tax_soccer();
        let text = encode_model(&model) + "broken line\n";
        assert!(matches!(
            decode_model(&text),
            Err(PresortError::Format { .. })
        ));
    }
}
