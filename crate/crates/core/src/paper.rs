//! Bibliographic records and the archive batch format.
//!
//! A batch is UTF-8 text made of records separated by blank lines. Each
//! record line has the form `Key: value`. Recognised keys are `Handle` and
//! `Title` (both required), `Abstract`, `Author` (repeatable), `Date`
//! (`YYYY-MM-DD`), `Archive` and `Url`. Unknown keys are ignored and lines
//! starting with `#` are comments.
//!
//! ```text
//! Handle: RePEc:abc:wpaper:001
//! Title: Tax policy and growth
//! Author: Jane Doe
//! Date: 2014-10-01
//! ```

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{parse_date, Date, Timestamp};

/// One working paper as contributed by an archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub handle: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    pub creation_date: Option<Date>,
    #[serde(default)]
    pub archive_id: String,
    pub fulltext_url: Option<String>,
    /// Set by the corpus on first ingestion; `None` for freshly parsed records.
    pub registered_at: Option<Timestamp>,
}

impl PaperRecord {
    pub fn new(handle: impl Into<String>, title: impl Into<String>) -> Self {
        let handle = handle.into();
        let archive_id = archive_from_handle(&handle);
        Self {
            handle,
            title: title.into(),
            abstract_text: String::new(),
            authors: Vec::new(),
            creation_date: None,
            archive_id,
            fulltext_url: None,
            registered_at: None,
        }
    }
}

/// Archive code embedded in a `RePEc:<archive>:...` handle, or empty.
pub fn archive_from_handle(handle: &str) -> String {
    let mut parts = handle.split(':');
    match (parts.next(), parts.next()) {
        (Some(scheme), Some(archive)) if scheme.eq_ignore_ascii_case("repec") => {
            archive.to_string()
        }
        _ => String::new(),
    }
}

/// Lookup of paper records by handle.
pub trait PaperSource {
    fn paper(&self, handle: &str) -> Option<&PaperRecord>;
}

impl PaperSource for BTreeMap<String, PaperRecord> {
    fn paper(&self, handle: &str) -> Option<&PaperRecord> {
        self.get(handle)
    }
}

impl PaperSource for [PaperRecord] {
    fn paper(&self, handle: &str) -> Option<&PaperRecord> {
        self.iter().find(|p| p.handle == handle)
    }
}

impl PaperSource for Vec<PaperRecord> {
    fn paper(&self, handle: &str) -> Option<&PaperRecord> {
        self.as_slice().paper(handle)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct BatchParseError {
    pub line: usize,
    pub kind: BatchErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatchErrorKind {
    #[error("record has no Handle")]
    MissingHandle,
    #[error("record has no Title")]
    MissingTitle,
    #[error("expected `Key: value`")]
    MalformedLine,
    #[error("invalid date `{0}`, expected YYYY-MM-DD")]
    InvalidDate(String),
    #[error("key `{0}` given twice")]
    DuplicateKey(String),
}

#[derive(Default)]
struct Block {
    start_line: usize,
    handle: Option<String>,
    title: Option<String>,
    abstract_text: Option<String>,
    authors: Vec<String>,
    date: Option<Date>,
    archive: Option<String>,
    url: Option<String>,
}

impl Block {
    fn finish(self) -> Result<PaperRecord, BatchParseError> {
        let err = |kind| BatchParseError {
            line: self.start_line,
            kind,
        };
        let handle = self
            .handle
            .filter(|h| !h.is_empty())
            .ok_or_else(|| err(BatchErrorKind::MissingHandle))?;
        let title = self
            .title
            .filter(|t| !t.is_empty())
            .ok_or_else(|| err(BatchErrorKind::MissingTitle))?;
        let archive_id = match self.archive {
            Some(a) if !a.is_empty() => a,
            _ => archive_from_handle(&handle),
        };
        Ok(PaperRecord {
            handle,
            title,
            abstract_text: self.abstract_text.unwrap_or_default(),
            authors: self.authors,
            creation_date: self.date,
            archive_id,
            fulltext_url: self.url.filter(|u| !u.is_empty()),
            registered_at: None,
        })
    }
}

fn set_once(
    slot: &mut Option<String>,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), BatchParseError> {
    if slot.is_some() {
        return Err(BatchParseError {
            line,
            kind: BatchErrorKind::DuplicateKey(key.to_string()),
        });
    }
    *slot = Some(value.to_string());
    Ok(())
}

/// Parses an archive batch into records, preserving their order.
pub fn parse_archive_batch(text: &str) -> Result<Vec<PaperRecord>, BatchParseError> {
    let mut records = Vec::new();
    let mut block: Option<Block> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                records.push(b.finish()?);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or(BatchParseError {
            line: line_no,
            kind: BatchErrorKind::MalformedLine,
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(BatchParseError {
                line: line_no,
                kind: BatchErrorKind::MalformedLine,
            });
        }
        let b = block.get_or_insert_with(|| Block {
            start_line: line_no,
            ..Block::default()
        });
        match key {
            "Handle" => set_once(&mut b.handle, key, value, line_no)?,
            "Title" => set_once(&mut b.title, key, value, line_no)?,
            "Abstract" => set_once(&mut b.abstract_text, key, value, line_no)?,
            "Archive" => set_once(&mut b.archive, key, value, line_no)?,
            "Url" => set_once(&mut b.url, key, value, line_no)?,
            "Author" => {
                if !value.is_empty() {
                    b.authors.push(value.to_string());
                }
            }
            "Date" => {
                if b.date.is_some() {
                    return Err(BatchParseError {
                        line: line_no,
                        kind: BatchErrorKind::DuplicateKey(key.to_string()),
                    });
                }
                if !value.is_empty() {
                    let date = parse_date(value).ok_or_else(|| BatchParseError {
                        line: line_no,
                        kind: BatchErrorKind::InvalidDate(value.to_string()),
                    })?;
                    b.date = Some(date);
                }
            }
            _ => {}
        }
    }
    if let Some(b) = block.take() {
        records.push(b.finish()?);
    }
    Ok(records)
}

fn one_line(value: &str) -> String {
    value.replace(['\r', '\n'], " ").trim().to_string()
}

/// Writes records in the archive batch format. Line breaks inside values are
/// flattened to spaces.
pub fn serialize_archive_batch(records: &[PaperRecord]) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Handle: {}", one_line(&r.handle));
        let _ = writeln!(out, "Title: {}", one_line(&r.title));
        if !r.abstract_text.is_empty() {
            let _ = writeln!(out, "Abstract: {}", one_line(&r.abstract_text));
        }
        for author in &r.authors {
            let _ = writeln!(out, "Author: {}", one_line(author));
        }
        if let Some(date) = r.creation_date {
            let _ = writeln!(out, "Date: {}", date.format("%Y-%m-%d"));
        }
        if !r.archive_id.is_empty() && r.archive_id != archive_from_handle(&r.handle) {
            let _ = writeln!(out, "Archive: {}", one_line(&r.archive_id));
        }
        if let Some(url) = &r.fulltext_url {
            let _ = writeln!(out, "Url: {}", one_line(url));
        }
    }
    out
}
