//! Editorial actions on report issues, and presort training.

use std::collections::BTreeSet;
use std::sync::Arc;

use nepkit_core::metrics::{ReportIssues, SentIssue};
use nepkit_core::presort::{self, decode_model, encode_model};
use nepkit_core::workflow::{IssueEvent, IssueStatus};
use nepkit_core::{
    Date, IssueMachine, IssueState, Mode, NepAllIssue, PresortModel, Stage, StageSnapshot,
};
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::fsio;

/// Buttons offered next to a pending issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueAction {
    Presorted,
    Unsorted,
    Delete,
}

pub const PENDING_ACTIONS: [IssueAction; 3] = [
    IssueAction::Presorted,
    IssueAction::Unsorted,
    IssueAction::Delete,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingIssue {
    pub issue_date: Date,
    pub state: IssueState,
    pub actions: Vec<IssueAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SendReceipt {
    pub snapshot: StageSnapshot,
    /// Number of subscribers the issue was delivered to.
    pub delivered: usize,
}

impl Engine {
    fn issue_context(&self, code: &str, date: Date) -> Result<NepAllIssue> {
        self.report(code)?;
        self.nep_all(date)
    }

    /// Runs one editorial action under the issue's claim and persists it.
    fn act<F>(&self, code: &str, date: Date, plan: F) -> Result<(IssueMachine, IssueEvent)>
    where
        F: FnOnce(&IssueMachine) -> Result<IssueEvent>,
    {
        self.issue_context(code, date)?;
        let _claim = self.claim(code, date)?;
        let mut machine = self.machine(code, date)?;
        let event = plan(&machine)?;
        self.commit(&mut machine, event.clone())?;
        Ok((machine, event))
    }

    fn act_snapshot<F>(&self, code: &str, date: Date, plan: F) -> Result<StageSnapshot>
    where
        F: FnOnce(&IssueMachine) -> Result<StageSnapshot>,
    {
        let (_, event) = self.act(code, date, |m| plan(m).map(IssueEvent::Snapshot))?;
        match event {
            IssueEvent::Snapshot(s) => Ok(s),
            IssueEvent::Deleted { .. } => unreachable!("snapshot action produced a deletion"),
        }
    }

    pub fn issue_status(&self, code: &str, date: Date) -> Result<IssueStatus> {
        self.issue_context(code, date)?;
        Ok(self.machine(code, date)?.status())
    }

    /// nep-all issues the report has neither sent nor deleted, newest first.
    pub fn list_pending(&self, code: &str) -> Result<Vec<PendingIssue>> {
        self.report(code)?;
        let mut pending = Vec::new();
        for date in self.nep_all_dates().into_iter().rev() {
            let state = self.machine(code, date)?.state();
            if !matches!(state, IssueState::Sent | IssueState::Deleted) {
                pending.push(PendingIssue {
                    issue_date: date,
                    state,
                    actions: PENDING_ACTIONS.to_vec(),
                });
            }
        }
        Ok(pending)
    }

    /// Writes a source snapshot: the nep-all issue either as is or presorted
    /// with the report's current model.
    pub fn open_issue(&self, code: &str, date: Date, mode: Mode) -> Result<StageSnapshot> {
        let issue = self.issue_context(code, date)?;
        let order = match mode {
            Mode::Unsorted => issue.paper_handles.clone(),
            Mode::Presorted => {
                let model = self.model(code)?;
                let corpus = self.corpus.read().expect("corpus lock poisoned");
                presort::presort(&model, &issue, &*corpus)?.ranked_handles
            }
        };
        let now = self.clock.now();
        self.act_snapshot(code, date, |m| Ok(m.plan_open(mode, order, now)?))
    }

    pub fn submit_selection(
        &self,
        code: &str,
        date: Date,
        selected: &[String],
    ) -> Result<StageSnapshot> {
        let now = self.clock.now();
        self.act_snapshot(code, date, |m| Ok(m.plan_selection(selected, now)?))
    }

    pub fn submit_ordering(
        &self,
        code: &str,
        date: Date,
        ordered: &[String],
    ) -> Result<StageSnapshot> {
        let now = self.clock.now();
        self.act_snapshot(code, date, |m| Ok(m.plan_ordering(ordered, now)?))
    }

    /// Writes the sent snapshot and delivers the issue to every subscriber.
    pub fn send_issue(&self, code: &str, date: Date) -> Result<SendReceipt> {
        let now = self.clock.now();
        let snapshot = self.act_snapshot(code, date, |m| Ok(m.plan_send(now)?))?;
        let rendered = self.render_issue(&snapshot)?;
        let delivered = self.deliver(&rendered)?;
        Ok(SendReceipt {
            snapshot,
            delivered,
        })
    }

    /// Marks an unsent issue as deleted. Its snapshots stay on disk.
    pub fn delete_issue(&self, code: &str, date: Date) -> Result<IssueStatus> {
        let now = self.clock.now();
        let (machine, _) = self.act(code, date, |m| Ok(m.plan_delete(now)?))?;
        Ok(machine.status())
    }

    /// Highest-version snapshot of an issue at `stage`, if any.
    pub fn latest_snapshot(
        &self,
        code: &str,
        date: Date,
        stage: Stage,
    ) -> Result<Option<StageSnapshot>> {
        self.report(code)?;
        Ok(self.machine(code, date)?.latest(stage).cloned())
    }

    /// Every sent issue of a report with its latest source and sent snapshots.
    pub fn report_issues(&self, code: &str) -> Result<ReportIssues> {
        self.report(code)?;
        let mut issues = Vec::new();
        for date in self.nep_all_dates() {
            let machine = self.machine(code, date)?;
            if machine.state() != IssueState::Sent {
                continue;
            }
            if let (Some(source), Some(sent)) =
                (machine.latest(Stage::Source), machine.latest(Stage::Sent))
            {
                issues.push(SentIssue {
                    source: source.clone(),
                    sent: sent.clone(),
                });
            }
        }
        Ok(ReportIssues {
            report_code: code.to_string(),
            issues,
        })
    }

    pub fn all_report_issues(&self) -> Result<Vec<ReportIssues>> {
        self.reports()
            .iter()
            .map(|r| self.report_issues(&r.code))
            .collect()
    }

    /// Current presort model of a report; the cold-start model if it was
    /// never trained.
    pub fn model(&self, code: &str) -> Result<Arc<PresortModel>> {
        self.report(code)?;
        if let Some(m) = self.models.read().expect("models lock poisoned").get(code) {
            return Ok(Arc::clone(m));
        }
        let path = self.layout.model(code);
        let model = match fsio::read_optional(&path)? {
            Some(text) => decode_model(&text).map_err(|e| Error::Corrupt {
                path,
                message: e.to_string(),
            })?,
            None => PresortModel::cold_start(code),
        };
        let model = Arc::new(model);
        self.models
            .write()
            .expect("models lock poisoned")
            .insert(code.to_string(), Arc::clone(&model));
        Ok(model)
    }

    /// Retrains the report's model on all of its sent issues and stores it.
    pub fn train(&self, code: &str) -> Result<Arc<PresortModel>> {
        let history: Vec<(NepAllIssue, BTreeSet<String>)> = self
            .report_issues(code)?
            .issues
            .into_iter()
            .map(|i| {
                let nep_all = self.nep_all(i.issue_date())?;
                Ok((nep_all, i.sent.paper_handles.into_iter().collect()))
            })
            .collect::<Result<_>>()?;
        let model = {
            let corpus = self.corpus.read().expect("corpus lock poisoned");
            presort::train(code, &history, &*corpus)?
        };
        // Round-trip through the stored text so the in-memory model matches
        // what a restarted service would load.
        let text = encode_model(&model);
        fsio::write_atomic(&self.layout.model(code), text.as_bytes())?;
        let stored = Arc::new(decode_model(&text)?);
        self.models
            .write()
            .expect("models lock poisoned")
            .insert(code.to_string(), Arc::clone(&stored));
        Ok(stored)
    }
}
