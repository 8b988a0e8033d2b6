//! Subscriptions and delivery of sent issues to the outbox.

use std::collections::BTreeMap;
use std::path::Path;

use nepkit_core::render::{render_issue, RenderedIssue};
use nepkit_core::{StageSnapshot, Timestamp};
use serde::Serialize;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::fsio;

/// Subscribers of one report: address to subscription time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Subscribers(BTreeMap<String, Timestamp>);

impl Subscribers {
    /// Reads `address<TAB>timestamp` lines; a missing file means no subscribers.
    pub(crate) fn load(path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        let Some(text) = fsio::read_optional(path)? else {
            return Ok(Self(map));
        };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let parsed = line
                .split_once('\t')
                .and_then(|(addr, at)| Some((addr.to_string(), Timestamp::parse_iso(at)?)));
            let Some((addr, at)) = parsed else {
                return Err(Error::Corrupt {
                    path: path.to_path_buf(),
                    message: format!("line {}: expected address and timestamp", i + 1),
                });
            };
            map.insert(addr, at);
        }
        Ok(Self(map))
    }

    fn encode(&self) -> String {
        self.0.iter().map(|(a, t)| format!("{a}\t{t}\n")).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, address: &str) -> bool {
        self.0.contains_key(address)
    }

    pub fn addresses(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Addresses become file names in the outbox.
fn validate_address(address: &str) -> Result<()> {
    let bad = address.is_empty()
        || address.contains(['/', '\\', '\t', '\n', '\r', '\0'])
        || address.starts_with('.')
        || address.contains("..");
    if bad {
        return Err(Error::Invalid(format!(
            "invalid subscriber address `{address}`"
        )));
    }
    Ok(())
}

impl Engine {
    fn update_subscribers<F>(&self, code: &str, change: F) -> Result<bool>
    where
        F: FnOnce(&mut Subscribers) -> bool,
    {
        self.report(code)?;
        let mut all = self.subscribers.lock().expect("subscribers lock poisoned");
        let current = all.entry(code.to_string()).or_default();
        let mut next = current.clone();
        if !change(&mut next) {
            return Ok(false);
        }
        fsio::write_atomic(&self.layout.subscribers(code), next.encode().as_bytes())?;
        *current = next;
        Ok(true)
    }

    /// Returns false if the address was already subscribed.
    pub fn subscribe(&self, code: &str, address: &str) -> Result<bool> {
        validate_address(address)?;
        let now = self.clock.now();
        self.update_subscribers(code, |s| {
            if s.contains(address) {
                return false;
            }
            s.0.insert(address.to_string(), now);
            true
        })
    }

    /// Returns false if the address was not subscribed.
    pub fn unsubscribe(&self, code: &str, address: &str) -> Result<bool> {
        self.update_subscribers(code, |s| s.0.remove(address).is_some())
    }

    pub fn subscribers(&self, code: &str) -> Result<Subscribers> {
        self.report(code)?;
        Ok(self
            .subscribers
            .lock()
            .expect("subscribers lock poisoned")
            .get(code)
            .cloned()
            .unwrap_or_default())
    }

    pub fn subscriber_count(&self, code: &str) -> Result<usize> {
        Ok(self.subscribers(code)?.len())
    }

    pub fn render_issue(&self, sent: &StageSnapshot) -> Result<RenderedIssue> {
        let report = self.report(&sent.report_code)?;
        let corpus = self.corpus.read().expect("corpus lock poisoned");
        Ok(render_issue(&report, sent, &*corpus)?)
    }

    /// Writes one outbox file per subscriber and returns how many were written.
    pub fn deliver(&self, rendered: &RenderedIssue) -> Result<usize> {
        let subscribers = self.subscribers(&rendered.report_code)?;
        for address in subscribers.addresses() {
            let path = self
                .layout
                .outbox(&rendered.report_code, rendered.issue_date, address);
            fsio::write_atomic(&path, rendered.body.as_bytes())?;
        }
        Ok(subscribers.len())
    }
}
