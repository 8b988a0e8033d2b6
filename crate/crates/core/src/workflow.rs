//! Editorial state machine for one report issue.
//!
//! An editor moves an issue through four stages, and every pass through a
//! stage leaves a numbered snapshot behind:
//!
//! ```text
//! pending --open--> in_selection --select--> in_ordering --order--> (ready) --send--> sent
//!    |                   |  ^                    |  ^
//!    +------delete-------+--+--------------------+--+--> deleted
//! ```
//!
//! Re-opening creates a new source version and returns the issue to
//! selection; re-selecting returns it to ordering. A sent issue is terminal.
//!
//! [`IssueMachine`] validates transitions and builds snapshots but does no IO.
//! Callers persist what `plan_*` returns and then [`IssueMachine::apply`] it;
//! replaying the persisted events through `apply` rebuilds the same machine.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{parse_date, Date, Timestamp};

/// A subject report with its own editor and subscribers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub code: String,
    pub subject: String,
    pub editor_name: String,
    pub created_on: Date,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Source,
    Selection,
    Ordering,
    Sent,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Source,
        Stage::Selection,
        Stage::Ordering,
        Stage::Sent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Source => "source",
            Stage::Selection => "selection",
            Stage::Ordering => "ordering",
            Stage::Sent => "sent",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Stage::ALL.into_iter().find(|s| s.as_str() == text)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the source list was ordered when the editor opened the issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Presorted,
    Unsorted,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Presorted => "presorted",
            Mode::Unsorted => "unsorted",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "presorted" => Some(Mode::Presorted),
            "unsorted" => Some(Mode::Unsorted),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueState {
    Pending,
    InSelection,
    InOrdering,
    Sent,
    Deleted,
}

impl IssueState {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueState::Pending => "pending",
            IssueState::InSelection => "in_selection",
            IssueState::InOrdering => "in_ordering",
            IssueState::Sent => "sent",
            IssueState::Deleted => "deleted",
        }
    }
}

impl fmt::Display for IssueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueStatus {
    pub report_code: String,
    pub issue_date: Date,
    pub state: IssueState,
}

/// The paper list of one issue at one stage, as persisted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSnapshot {
    pub report_code: String,
    pub issue_date: Date,
    pub stage: Stage,
    pub version: u32,
    pub created_at: Timestamp,
    pub mode: Mode,
    pub paper_handles: Vec<String>,
    /// 1-based position of each listed paper in the source order.
    pub source_positions: BTreeMap<String, u32>,
}

impl StageSnapshot {
    pub fn len(&self) -> usize {
        self.paper_handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paper_handles.is_empty()
    }

    pub fn position_of(&self, handle: &str) -> Option<u32> {
        self.source_positions.get(handle).copied()
    }

    /// Source positions in list order.
    pub fn positions(&self) -> Vec<u32> {
        self.paper_handles
            .iter()
            .map(|h| self.source_positions.get(h).copied().unwrap_or(0))
            .collect()
    }

    pub fn handle_set(&self) -> BTreeSet<&str> {
        self.paper_handles.iter().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueEvent {
    Snapshot(StageSnapshot),
    Deleted { at: Timestamp },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("no paper selected")]
    EmptySelection,
    #[error("{0} is not in the source list")]
    NotInSource(String),
    #[error("{0} is not in the current selection")]
    NotInSelection(String),
    #[error("{0} listed more than once")]
    DuplicateHandle(String),
    #[error("cannot {action} an issue that is {state}")]
    InvalidTransition {
        action: &'static str,
        state: IssueState,
    },
    #[error("inconsistent snapshot history: {0}")]
    Corrupt(String),
}

impl WorkflowError {
    /// True for errors caused by the issue's current state rather than by the
    /// request payload.
    pub fn is_state_error(&self) -> bool {
        matches!(
            self,
            WorkflowError::InvalidTransition { .. } | WorkflowError::Corrupt(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueMachine {
    report_code: String,
    issue_date: Date,
    state: IssueState,
    latest: [Option<StageSnapshot>; 4],
    /// An ordering has been submitted since the latest selection.
    ordering_current: bool,
    last_created: Option<Timestamp>,
}

fn no_duplicates(handles: &[String]) -> Result<(), WorkflowError> {
    let mut seen = BTreeSet::new();
    match handles.iter().find(|h| !seen.insert(h.as_str())) {
        Some(dup) => Err(WorkflowError::DuplicateHandle(dup.clone())),
        None => Ok(()),
    }
}

impl IssueMachine {
    pub fn new(report_code: impl Into<String>, issue_date: Date) -> Self {
        Self {
            report_code: report_code.into(),
            issue_date,
            state: IssueState::Pending,
            latest: [None, None, None, None],
            ordering_current: false,
            last_created: None,
        }
    }

    pub fn state(&self) -> IssueState {
        self.state
    }

    pub fn report_code(&self) -> &str {
        &self.report_code
    }

    pub fn issue_date(&self) -> Date {
        self.issue_date
    }

    pub fn status(&self) -> IssueStatus {
        IssueStatus {
            report_code: self.report_code.clone(),
            issue_date: self.issue_date,
            state: self.state,
        }
    }

    /// Highest-version snapshot at `stage`.
    pub fn latest(&self, stage: Stage) -> Option<&StageSnapshot> {
        self.latest[stage.index()].as_ref()
    }

    /// True once an ordering has been submitted for the current selection.
    pub fn ready_to_send(&self) -> bool {
        self.state == IssueState::InOrdering && self.ordering_current
    }

    fn source(&self) -> Result<&StageSnapshot, WorkflowError> {
        self.latest(Stage::Source)
            .ok_or_else(|| WorkflowError::Corrupt("no source snapshot".into()))
    }

    fn stamp(&self, now: Timestamp) -> Timestamp {
        self.last_created.map_or(now, |last| last.max(now))
    }

    fn next_version(&self, stage: Stage) -> u32 {
        self.latest(stage).map_or(1, |s| s.version + 1)
    }

    fn build(
        &self,
        stage: Stage,
        mode: Mode,
        paper_handles: Vec<String>,
        positions: impl Fn(&str) -> u32,
        now: Timestamp,
    ) -> StageSnapshot {
        let source_positions = paper_handles
            .iter()
            .map(|h| (h.clone(), positions(h)))
            .collect();
        StageSnapshot {
            report_code: self.report_code.clone(),
            issue_date: self.issue_date,
            stage,
            version: self.next_version(stage),
            created_at: self.stamp(now),
            mode,
            paper_handles,
            source_positions,
        }
    }

    fn require(&self, action: &'static str, allowed: &[IssueState]) -> Result<(), WorkflowError> {
        if allowed.contains(&self.state) {
            Ok(())
        } else {
            Err(WorkflowError::InvalidTransition {
                action,
                state: self.state,
            })
        }
    }

    /// Source snapshot listing `order` (the nep-all or presorted order).
    pub fn plan_open(
        &self,
        mode: Mode,
        order: Vec<String>,
        now: Timestamp,
    ) -> Result<StageSnapshot, WorkflowError> {
        self.require(
            "open",
            &[
                IssueState::Pending,
                IssueState::InSelection,
                IssueState::InOrdering,
            ],
        )?;
        no_duplicates(&order)?;
        let positions: BTreeMap<&str, u32> = order
            .iter()
            .enumerate()
            .map(|(i, h)| (h.as_str(), i as u32 + 1))
            .collect();
        Ok(self.build(Stage::Source, mode, order.clone(), |h| positions[h], now))
    }

    /// Selection snapshot: the selected papers in source order.
    pub fn plan_selection(
        &self,
        selected: &[String],
        now: Timestamp,
    ) -> Result<StageSnapshot, WorkflowError> {
        self.require(
            "select papers for",
            &[IssueState::InSelection, IssueState::InOrdering],
        )?;
        if selected.is_empty() {
            return Err(WorkflowError::EmptySelection);
        }
        no_duplicates(selected)?;
        let source = self.source()?;
        if let Some(stray) = selected.iter().find(|h| source.position_of(h).is_none()) {
            return Err(WorkflowError::NotInSource(stray.clone()));
        }
        let chosen: BTreeSet<&str> = selected.iter().map(String::as_str).collect();
        let handles = source
            .paper_handles
            .iter()
            .filter(|h| chosen.contains(h.as_str()))
            .cloned()
            .collect();
        Ok(self.build(
            Stage::Selection,
            source.mode,
            handles,
            |h| source.source_positions[h],
            now,
        ))
    }

    /// Ordering snapshot with exactly the given order; omitted papers are
    /// dropped from the issue.
    pub fn plan_ordering(
        &self,
        ordered: &[String],
        now: Timestamp,
    ) -> Result<StageSnapshot, WorkflowError> {
        self.require("order", &[IssueState::InOrdering])?;
        if ordered.is_empty() {
            return Err(WorkflowError::EmptySelection);
        }
        no_duplicates(ordered)?;
        let source = self.source()?;
        let selection = self
            .latest(Stage::Selection)
            .ok_or_else(|| WorkflowError::Corrupt("no selection snapshot".into()))?;
        if let Some(stray) = ordered.iter().find(|h| selection.position_of(h).is_none()) {
            return Err(WorkflowError::NotInSelection(stray.clone()));
        }
        Ok(self.build(
            Stage::Ordering,
            source.mode,
            ordered.to_vec(),
            |h| source.source_positions[h],
            now,
        ))
    }

    /// Sent snapshot copying the latest ordering.
    pub fn plan_send(&self, now: Timestamp) -> Result<StageSnapshot, WorkflowError> {
        if !self.ready_to_send() {
            return Err(WorkflowError::InvalidTransition {
                action: "send",
                state: self.state,
            });
        }
        let source = self.source()?;
        let ordering = self
            .latest(Stage::Ordering)
            .ok_or_else(|| WorkflowError::Corrupt("no ordering snapshot".into()))?;
        Ok(self.build(
            Stage::Sent,
            source.mode,
            ordering.paper_handles.clone(),
            |h| source.source_positions[h],
            now,
        ))
    }

    pub fn plan_delete(&self, now: Timestamp) -> Result<IssueEvent, WorkflowError> {
        self.require(
            "delete",
            &[
                IssueState::Pending,
                IssueState::InSelection,
                IssueState::InOrdering,
            ],
        )?;
        Ok(IssueEvent::Deleted {
            at: self.stamp(now),
        })
    }

    /// Records an event produced by a `plan_*` call (or read back from the
    /// store), re-checking every invariant.
    pub fn apply(&mut self, event: &IssueEvent) -> Result<(), WorkflowError> {
        match event {
            IssueEvent::Deleted { at } => {
                self.require(
                    "delete",
                    &[
                        IssueState::Pending,
                        IssueState::InSelection,
                        IssueState::InOrdering,
                    ],
                )?;
                self.state = IssueState::Deleted;
                self.last_created = Some(self.stamp(*at));
                Ok(())
            }
            IssueEvent::Snapshot(snap) => {
                self.check(snap)?;
                self.state = match snap.stage {
                    Stage::Source => {
                        self.ordering_current = false;
                        IssueState::InSelection
                    }
                    Stage::Selection => {
                        self.ordering_current = false;
                        IssueState::InOrdering
                    }
                    Stage::Ordering => {
                        self.ordering_current = true;
                        IssueState::InOrdering
                    }
                    Stage::Sent => IssueState::Sent,
                };
                self.last_created = Some(snap.created_at);
                self.latest[snap.stage.index()] = Some(snap.clone());
                Ok(())
            }
        }
    }

    fn check(&self, snap: &StageSnapshot) -> Result<(), WorkflowError> {
        let corrupt = |msg: &str| Err(WorkflowError::Corrupt(msg.to_string()));
        if snap.report_code != self.report_code || snap.issue_date != self.issue_date {
            return corrupt("snapshot belongs to another issue");
        }
        if snap.version != self.next_version(snap.stage) {
            return corrupt("version out of sequence");
        }
        if self.last_created.is_some_and(|last| snap.created_at < last) {
            return corrupt("timestamp earlier than previous snapshot");
        }
        if snap.source_positions.len() != snap.paper_handles.len()
            || snap
                .paper_handles
                .iter()
                .any(|h| !snap.source_positions.contains_key(h))
        {
            return corrupt("position map does not match paper list");
        }
        let expected = match snap.stage {
            Stage::Source => {
                let planned =
                    self.plan_open(snap.mode, snap.paper_handles.clone(), snap.created_at)?;
                planned.source_positions
            }
            Stage::Selection => {
                let planned = self.plan_selection(&snap.paper_handles, snap.created_at)?;
                if planned.paper_handles != snap.paper_handles {
                    return corrupt("selection is not in source order");
                }
                planned.source_positions
            }
            Stage::Ordering => {
                self.plan_ordering(&snap.paper_handles, snap.created_at)?
                    .source_positions
            }
            Stage::Sent => {
                let planned = self.plan_send(snap.created_at)?;
                if planned.paper_handles != snap.paper_handles {
                    return corrupt("sent list differs from latest ordering");
                }
                planned.source_positions
            }
        };
        if expected != snap.source_positions {
            return corrupt("source positions disagree with the source snapshot");
        }
        if snap.stage != Stage::Source
            && Some(snap.mode) != self.latest(Stage::Source).map(|s| s.mode)
        {
            return corrupt("mode differs from the source snapshot");
        }
        Ok(())
    }
}

/// Storage path of a snapshot relative to the data root:
/// `reports/<code>/issues/<YYYY-MM-DD>/<stage>/<version>.ri`.
pub fn snapshot_path(report_code: &str, issue_date: Date, stage: Stage, version: u32) -> String {
    let mut path = String::new();
    let _ = write!(
        path,
        "reports/{report_code}/issues/{}/{stage}/{version}.ri",
        issue_date.format("%Y-%m-%d")
    );
    path
}

/// Report issue file contents: six header lines, a blank line, then one
/// `<source_position> <handle>` line per paper in stage order.
pub fn encode_snapshot(snap: &StageSnapshot) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Report: {}", snap.report_code);
    let _ = writeln!(out, "Issue: {}", snap.issue_date.format("%Y-%m-%d"));
    let _ = writeln!(out, "Stage: {}", snap.stage);
    let _ = writeln!(out, "Version: {}", snap.version);
    let _ = writeln!(out, "Mode: {}", snap.mode);
    let _ = writeln!(out, "Created: {}", snap.created_at);
    out.push('\n');
    for handle in &snap.paper_handles {
        let pos = snap.source_positions.get(handle).copied().unwrap_or(0);
        let _ = writeln!(out, "{pos} {handle}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("report issue file line {line}: {message}")]
pub struct SnapshotFormatError {
    pub line: usize,
    pub message: String,
}

pub fn decode_snapshot(text: &str) -> Result<StageSnapshot, SnapshotFormatError> {
    let err = |line: usize, message: &str| SnapshotFormatError {
        line,
        message: message.to_string(),
    };
    let lines: Vec<&str> = text.lines().collect();
    let header = |idx: usize, key: &str| -> Result<&str, SnapshotFormatError> {
        lines
            .get(idx)
            .and_then(|l| l.strip_prefix(key))
            .and_then(|r| r.strip_prefix(": "))
            .ok_or_else(|| err(idx + 1, key))
    };
    let report_code = header(0, "Report")?.to_string();
    let issue_date = parse_date(header(1, "Issue")?).ok_or_else(|| err(2, "bad issue date"))?;
    let stage = Stage::parse(header(2, "Stage")?).ok_or_else(|| err(3, "unknown stage"))?;
    let version = header(3, "Version")?
        .parse()
        .ok()
        .filter(|v| *v >= 1)
        .ok_or_else(|| err(4, "bad version"))?;
    let mode = Mode::parse(header(4, "Mode")?).ok_or_else(|| err(5, "unknown mode"))?;
    let created_at =
        Timestamp::parse_iso(header(5, "Created")?).ok_or_else(|| err(6, "bad timestamp"))?;
    if lines.get(6).is_some_and(|l| !l.is_empty()) {
        return Err(err(7, "expected blank line after header"));
    }

    let mut paper_handles = Vec::new();
    let mut source_positions = BTreeMap::new();
    for (idx, line) in lines.iter().enumerate().skip(7) {
        let (pos, handle) = line
            .split_once(' ')
            .and_then(|(p, h)| p.parse::<u32>().ok().map(|p| (p, h)))
            .filter(|(p, h)| *p >= 1 && !h.is_empty())
            .ok_or_else(|| err(idx + 1, "expected `<position> <handle>`"))?;
        if source_positions.insert(handle.to_string(), pos).is_some() {
            return Err(err(idx + 1, "duplicate handle"));
        }
        paper_handles.push(handle.to_string());
    }
    Ok(StageSnapshot {
        report_code,
        issue_date,
        stage,
        version,
        created_at,
        mode,
        paper_handles,
        source_positions,
    })
}
