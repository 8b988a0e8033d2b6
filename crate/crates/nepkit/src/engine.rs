use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use nepkit_core::workflow::{decode_snapshot, encode_snapshot, IssueEvent};
use nepkit_core::{Date, IssueMachine, PresortModel, Report, Stage, Timestamp};
use regex::Regex;

use crate::clock::{Clock, SystemClock};
use crate::corpus::Corpus;
use crate::dispatch::Subscribers;
use crate::error::{Error, Result};
use crate::fsio;
use crate::layout::Layout;

pub const DEFAULT_REPORT_CODE_PATTERN: &str = "^nep-[a-z]{3}$";

pub(crate) type IssueKey = (String, Date);

pub struct EngineOptions {
    pub clock: Arc<dyn Clock>,
    pub report_code_pattern: String,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            clock: Arc::new(SystemClock),
            report_code_pattern: DEFAULT_REPORT_CODE_PATTERN.to_string(),
        }
    }
}

/// The service state rooted at one data directory.
///
/// Corpus writes are serialized behind a lock. Editorial actions take a
/// per-issue claim, and a second action on the same issue while one is in
/// flight fails with [`Error::Conflict`].
pub struct Engine {
    pub(crate) layout: Layout,
    pub(crate) clock: Arc<dyn Clock>,
    code_pattern: Regex,
    pub(crate) corpus: RwLock<Corpus>,
    pub(crate) reports: RwLock<BTreeMap<String, Report>>,
    pub(crate) machines: Mutex<HashMap<IssueKey, IssueMachine>>,
    busy: Mutex<HashSet<IssueKey>>,
    pub(crate) subscribers: Mutex<BTreeMap<String, Subscribers>>,
    pub(crate) models: RwLock<HashMap<String, Arc<PresortModel>>>,
}

/// Exclusive claim on one issue; released on drop.
pub(crate) struct IssueClaim<'a> {
    busy: &'a Mutex<HashSet<IssueKey>>,
    key: IssueKey,
}

impl Drop for IssueClaim<'_> {
    fn drop(&mut self) {
        if let Ok(mut busy) = self.busy.lock() {
            busy.remove(&self.key);
        }
    }
}

impl Engine {
    /// Opens (creating if needed) the data directory at `root`.
    pub fn open(root: impl Into<PathBuf>, options: EngineOptions) -> Result<Self> {
        let layout = Layout::new(root);
        std::fs::create_dir_all(layout.root()).map_err(|e| Error::io(layout.root(), e))?;
        let code_pattern = Regex::new(&options.report_code_pattern)
            .map_err(|e| Error::Invalid(format!("report code pattern: {e}")))?;
        let corpus = Corpus::load(&layout)?;

        let mut reports = BTreeMap::new();
        let mut subscribers = BTreeMap::new();
        for code in fsio::list_dir(&layout.reports_dir())? {
            let path = layout.report_meta(&code);
            let Some(text) = fsio::read_optional(&path)? else {
                continue;
            };
            let report: Report = serde_json::from_str(&text).map_err(|e| Error::Corrupt {
                path: path.clone(),
                message: e.to_string(),
            })?;
            subscribers.insert(code.clone(), Subscribers::load(&layout.subscribers(&code))?);
            reports.insert(code, report);
        }

        Ok(Self {
            layout,
            clock: options.clock,
            code_pattern,
            corpus: RwLock::new(corpus),
            reports: RwLock::new(reports),
            machines: Mutex::new(HashMap::new()),
            busy: Mutex::new(HashSet::new()),
            subscribers: Mutex::new(subscribers),
            models: RwLock::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        self.layout.root()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn add_report(&self, code: &str, subject: &str, editor_name: &str) -> Result<Report> {
        if !self.code_pattern.is_match(code) || code != code.to_lowercase() {
            return Err(Error::Invalid(format!(
                "report code `{code}` does not match {}",
                self.code_pattern.as_str()
            )));
        }
        let mut reports = self.reports.write().expect("reports lock poisoned");
        if reports.contains_key(code) {
            return Err(Error::Conflict(format!("report `{code}` already exists")));
        }
        let report = Report {
            code: code.to_string(),
            subject: subject.to_string(),
            editor_name: editor_name.to_string(),
            created_on: self.clock.now().date(),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        fsio::write_atomic(&self.layout.report_meta(code), json.as_bytes())?;
        self.subscribers
            .lock()
            .expect("subscribers lock poisoned")
            .insert(code.to_string(), Subscribers::default());
        reports.insert(code.to_string(), report.clone());
        Ok(report)
    }

    pub fn report(&self, code: &str) -> Result<Report> {
        self.reports
            .read()
            .expect("reports lock poisoned")
            .get(code)
            .cloned()
            .ok_or_else(|| Error::not_found("report", code))
    }

    pub fn reports(&self) -> Vec<Report> {
        self.reports
            .read()
            .expect("reports lock poisoned")
            .values()
            .cloned()
            .collect()
    }

    pub(crate) fn claim(&self, code: &str, date: Date) -> Result<IssueClaim<'_>> {
        let key = (code.to_string(), date);
        let mut busy = self.busy.lock().expect("busy lock poisoned");
        if !busy.insert(key.clone()) {
            return Err(Error::Conflict(format!(
                "issue {code}/{date} is being modified by another request"
            )));
        }
        Ok(IssueClaim {
            busy: &self.busy,
            key,
        })
    }

    /// Current machine for an issue, replaying its journal on first use.
    pub(crate) fn machine(&self, code: &str, date: Date) -> Result<IssueMachine> {
        let key = (code.to_string(), date);
        if let Some(m) = self
            .machines
            .lock()
            .expect("machines lock poisoned")
            .get(&key)
        {
            return Ok(m.clone());
        }
        let machine = self.replay(code, date)?;
        self.machines
            .lock()
            .expect("machines lock poisoned")
            .entry(key)
            .or_insert_with(|| machine.clone());
        Ok(machine)
    }

    /// Rebuilds an issue's machine from the files on disk alone.
    pub fn replay(&self, code: &str, date: Date) -> Result<IssueMachine> {
        let mut machine = IssueMachine::new(code, date);
        let journal = self.layout.journal(code, date);
        let Some(text) = fsio::read_optional(&journal)? else {
            return Ok(machine);
        };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let corrupt = |message: String| Error::Corrupt {
                path: journal.clone(),
                message: format!("line {}: {message}", i + 1),
            };
            let fields: Vec<&str> = line.split(' ').collect();
            let at = fields
                .first()
                .and_then(|t| Timestamp::parse_iso(t))
                .ok_or_else(|| corrupt("bad timestamp".into()))?;
            let event = match fields[1..] {
                ["deleted"] => IssueEvent::Deleted { at },
                [stage, version] => {
                    let stage = Stage::parse(stage).ok_or_else(|| corrupt("bad stage".into()))?;
                    let version: u32 =
                        version.parse().map_err(|_| corrupt("bad version".into()))?;
                    let path = self.layout.snapshot(code, date, stage, version);
                    let text = fsio::read_optional(&path)?
                        .ok_or_else(|| corrupt(format!("missing {}", path.display())))?;
                    let snap = decode_snapshot(&text).map_err(|e| Error::Corrupt {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                    IssueEvent::Snapshot(snap)
                }
                _ => return Err(corrupt("unrecognised entry".into())),
            };
            machine.apply(&event).map_err(|e| corrupt(e.to_string()))?;
        }
        Ok(machine)
    }

    /// Persists an event and advances the cached machine. The snapshot file
    /// is in place before the journal line that makes it visible.
    pub(crate) fn commit(&self, machine: &mut IssueMachine, event: IssueEvent) -> Result<()> {
        let code = machine.report_code().to_string();
        let date = machine.issue_date();
        let entry = match &event {
            IssueEvent::Snapshot(snap) => {
                let path = self.layout.snapshot(&code, date, snap.stage, snap.version);
                fsio::write_atomic(&path, encode_snapshot(snap).as_bytes())?;
                format!("{} {} {}\n", snap.created_at, snap.stage, snap.version)
            }
            IssueEvent::Deleted { at } => format!("{at} deleted\n"),
        };
        machine.apply(&event)?;
        fsio::append(&self.layout.journal(&code, date), entry.as_bytes())?;
        self.machines
            .lock()
            .expect("machines lock poisoned")
            .insert((code, date), machine.clone());
        Ok(())
    }
}
