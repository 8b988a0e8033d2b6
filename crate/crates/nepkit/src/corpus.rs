//! Paper registry and nep-all composition.

use std::collections::{BTreeMap, HashMap};

use nepkit_core::nepall::{compose, decode_issue, encode_issue};
use nepkit_core::paper::parse_archive_batch;
use nepkit_core::{CompositionPolicy, Date, NepAllIssue, PaperRecord, PaperSource};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::fsio;
use crate::layout::Layout;

/// Registered papers in registration order plus every composed nep-all issue.
#[derive(Debug, Default)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
    issues: BTreeMap<Date, NepAllIssue>,
}

impl Corpus {
    pub(crate) fn load(layout: &Layout) -> Result<Self> {
        let mut corpus = Corpus::default();
        let path = layout.papers();
        if let Some(text) = fsio::read_optional(&path)? {
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
                let paper: PaperRecord =
                    serde_json::from_str(line).map_err(|e| Error::Corrupt {
                        path: path.clone(),
                        message: format!("line {}: {e}", i + 1),
                    })?;
                corpus.insert(paper);
            }
        }
        let dir = layout.nep_all_dir();
        for name in fsio::list_dir(&dir)? {
            if !name.ends_with(".txt") {
                continue;
            }
            let path = dir.join(&name);
            let text = fsio::read_optional(&path)?.unwrap_or_default();
            let issue = decode_issue(&text).map_err(|e| Error::Corrupt {
                path: path.clone(),
                message: e.to_string(),
            })?;
            corpus.issues.insert(issue.issue_date, issue);
        }
        Ok(corpus)
    }

    fn insert(&mut self, paper: PaperRecord) -> bool {
        if self.index.contains_key(&paper.handle) {
            return false;
        }
        self.index.insert(paper.handle.clone(), self.papers.len());
        self.papers.push(paper);
        true
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, handle: &str) -> Option<&PaperRecord> {
        self.index.get(handle).map(|&i| &self.papers[i])
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn issue(&self, date: Date) -> Option<&NepAllIssue> {
        self.issues.get(&date)
    }

    /// nep-all issues, oldest first.
    pub fn issues(&self) -> impl DoubleEndedIterator<Item = &NepAllIssue> {
        self.issues.values()
    }

    pub fn latest_issue(&self) -> Option<&NepAllIssue> {
        self.issues.values().next_back()
    }
}

impl PaperSource for Corpus {
    fn paper(&self, handle: &str) -> Option<&PaperRecord> {
        self.get(handle)
    }
}

impl Engine {
    /// Adds papers not yet in the corpus and returns how many were new.
    /// Existing handles are left untouched.
    pub fn register_papers(&self, records: Vec<PaperRecord>) -> Result<usize> {
        let mut corpus = self.corpus.write().expect("corpus lock poisoned");
        let now = self.clock.now();
        let mut fresh: Vec<PaperRecord> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for mut record in records {
            if corpus.get(&record.handle).is_some() || !seen.insert(record.handle.clone()) {
                continue;
            }
            record.registered_at = Some(now);
            fresh.push(record);
        }
        if fresh.is_empty() {
            return Ok(0);
        }
        let mut lines = String::new();
        for paper in &fresh {
            lines.push_str(&serde_json::to_string(paper).expect("paper serializes"));
            lines.push('\n');
        }
        fsio::append(&self.layout.papers(), lines.as_bytes())?;
        let count = fresh.len();
        for paper in fresh {
            corpus.insert(paper);
        }
        Ok(count)
    }

    /// Parses an archive batch and registers its papers.
    pub fn ingest_batch(&self, text: &str) -> Result<usize> {
        self.register_papers(parse_archive_batch(text)?)
    }

    /// Composes and persists the nep-all issue named `as_of` from every paper
    /// registered since the previous issue.
    pub fn compose_nep_all(&self, as_of: Date, policy: &CompositionPolicy) -> Result<NepAllIssue> {
        let mut corpus = self.corpus.write().expect("corpus lock poisoned");
        let previous = corpus.latest_issue();
        let start = previous.map_or(0, |p| p.registration_mark as usize);
        let issue = compose(
            previous,
            &corpus.papers[start.min(corpus.papers.len())..],
            corpus.papers.len() as u64,
            as_of,
            policy,
            self.clock.now(),
        )?;
        fsio::write_atomic(&self.layout.nep_all(as_of), encode_issue(&issue).as_bytes())?;
        corpus.issues.insert(as_of, issue.clone());
        Ok(issue)
    }

    pub fn nep_all(&self, date: Date) -> Result<NepAllIssue> {
        self.corpus
            .read()
            .expect("corpus lock poisoned")
            .issue(date)
            .cloned()
            .ok_or_else(|| Error::not_found("nep-all issue", date))
    }

    /// Dates of all nep-all issues, oldest first.
    pub fn nep_all_dates(&self) -> Vec<Date> {
        let corpus = self.corpus.read().expect("corpus lock poisoned");
        corpus.issues().map(|i| i.issue_date).collect()
    }

    pub fn paper(&self, handle: &str) -> Option<PaperRecord> {
        self.corpus
            .read()
            .expect("corpus lock poisoned")
            .get(handle)
            .cloned()
    }

    pub fn paper_count(&self) -> usize {
        self.corpus.read().expect("corpus lock poisoned").len()
    }
}
