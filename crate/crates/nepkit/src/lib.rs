//! File-backed current awareness service built on [`nepkit_core`].
//!
//! [`Engine`] owns the data directory and exposes ingestion, nep-all
//! composition, presort training, the editorial workflow, subscriber
//! dispatch and analytics. The `nepkit` binary and the HTTP API are thin
//! layers over it.
//!
//! Data directory layout:
//!
//! ```text
//! corpus/papers.jsonl                                  registered papers
//! nep-all/<YYYY-MM-DD>.txt                             composed nep-all issues
//! reports/<code>/report.json                           report metadata
//! reports/<code>/model.txt                             presort model
//! reports/<code>/subscribers.tsv                       subscriptions
//! reports/<code>/issues/<YYYY-MM-DD>/<stage>/<n>.ri    stage snapshots
//! reports/<code>/issues/<YYYY-MM-DD>/journal           append-only action log
//! outbox/<code>/<YYYY-MM-DD>/<address>.txt             delivered issues
//! ```

pub mod analytics;
pub mod cli;
pub mod clock;
pub mod config;
pub mod corpus;
pub mod dispatch;
pub mod engine;
pub mod error;
mod fsio;
pub mod http;
pub mod layout;
pub mod table;
pub mod workflow;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use engine::{Engine, EngineOptions};
pub use error::{Error, Result};
