//! Paths inside the data directory.

use std::path::{Path, PathBuf};

use nepkit_core::workflow::snapshot_path;
use nepkit_core::{Date, Stage};

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

fn day(date: Date) -> String {
    date.format("%Y-%m-%d").to_string()
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn papers(&self) -> PathBuf {
        self.root.join("corpus").join("papers.jsonl")
    }

    pub fn nep_all_dir(&self) -> PathBuf {
        self.root.join("nep-all")
    }

    pub fn nep_all(&self, date: Date) -> PathBuf {
        self.nep_all_dir().join(format!("{}.txt", day(date)))
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report_dir(&self, code: &str) -> PathBuf {
        self.reports_dir().join(code)
    }

    pub fn report_meta(&self, code: &str) -> PathBuf {
        self.report_dir(code).join("report.json")
    }

    pub fn model(&self, code: &str) -> PathBuf {
        self.report_dir(code).join("model.txt")
    }

    pub fn subscribers(&self, code: &str) -> PathBuf {
        self.report_dir(code).join("subscribers.tsv")
    }

    pub fn issue_dir(&self, code: &str, date: Date) -> PathBuf {
        self.report_dir(code).join("issues").join(day(date))
    }

    pub fn journal(&self, code: &str, date: Date) -> PathBuf {
        self.issue_dir(code, date).join("journal")
    }

    /// `reports/<code>/issues/<YYYY-MM-DD>/<stage>/<version>.ri`
    pub fn snapshot(&self, code: &str, date: Date, stage: Stage, version: u32) -> PathBuf {
        self.root.join(snapshot_path(code, date, stage, version))
    }

    pub fn outbox(&self, code: &str, date: Date, address: &str) -> PathBuf {
        self.root
            .join("outbox")
            .join(code)
            .join(day(date))
            .join(format!("{address}.txt"))
    }
}
