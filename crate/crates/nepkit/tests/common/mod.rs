#![allow(dead_code)]

use std::sync::Arc;

use nepkit::{Engine, EngineOptions, ManualClock};
use nepkit_core::time::parse_date;
use nepkit_core::{Date, Timestamp};
use tempfile::TempDir;

pub const START: &str = "2024-03-04T08:00:00Z";

pub fn ts(s: &str) -> Timestamp {
    Timestamp::parse_iso(s).expect("valid timestamp")
}

pub fn day(s: &str) -> Date {
    parse_date(s).expect("valid date")
}

pub fn handle(archive: &str, n: usize) -> String {
    format!("RePEc:{archive}:wpaper:{n:04}")
}

/// Archive batch with `count` dated papers numbered from `first`.
pub fn batch(archive: &str, first: usize, count: usize) -> String {
    (first..first + count)
        .map(|n| {
            format!(
                "Handle: {}\nTitle: Paper {n} on topic {}\nAbstract: Abstract of paper {n}.\nAuthor: Author {n}\nDate: 2024-01-15\n",
                handle(archive, n),
                n % 7
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub struct Fixture {
    pub dir: TempDir,
    pub clock: Arc<ManualClock>,
    pub engine: Engine,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let clock = Arc::new(ManualClock::new(ts(START)));
        let engine = open(&dir, &clock);
        Self { dir, clock, engine }
    }

    /// A second engine over the same directory, as after a restart.
    pub fn reopen(&self) -> Engine {
        open(&self.dir, &self.clock)
    }

    /// One report and one nep-all issue of `papers` papers dated `date`.
    pub fn with_issue(code: &str, date: &str, papers: usize) -> Self {
        let f = Self::new();
        f.engine
            .add_report(code, "Test subject", "Ed Itor")
            .unwrap();
        f.engine.ingest_batch(&batch("abc", 1, papers)).unwrap();
        f.engine
            .compose_nep_all(day(date), &Default::default())
            .unwrap();
        f
    }
}

fn open(dir: &TempDir, clock: &Arc<ManualClock>) -> Engine {
    Engine::open(
        dir.path(),
        EngineOptions {
            clock: clock.clone(),
            ..EngineOptions::default()
        },
    )
    .expect("engine opens")
}
