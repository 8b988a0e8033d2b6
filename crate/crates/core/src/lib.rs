//! Core of the nepkit current awareness engine.
//!
//! Everything here is pure computation over owned values: the archive batch
//! and snapshot file codecs, nep-all composition, the presorting model, the
//! editorial state machine for one report issue, and the evaluation measures
//! (precision at N, relative search length, editing-time segmentation,
//! Pearson correlation). Storage, transport and the command line live in the
//! `nepkit` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod metrics;
pub mod nepall;
pub mod paper;
pub mod presort;
pub mod render;
pub mod stats;
pub mod time;
pub mod tokenize;
pub mod workflow;

pub use nepall::{CompositionPolicy, NepAllIssue};
pub use paper::{PaperRecord, PaperSource};
pub use presort::{PresortModel, PresortedOrder};
pub use time::{Date, Timestamp};
pub use workflow::{IssueMachine, IssueState, Mode, Report, Stage, StageSnapshot};
