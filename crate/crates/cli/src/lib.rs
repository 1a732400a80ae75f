//! Seeded verification suites over `poslab-core`, with JSON and CSV reports.
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial index), so a
//! failure is replayable from the report alone.

pub mod config;
pub mod report;
pub mod run;
mod trials;

pub use config::{Backend, HarnessError, Suite, SuiteConfig};
pub use report::{canonical_json, emit_report, write_csv, write_json, Failure, Format, TrialRecord, TrialReport};
pub use run::{run_suite, thread_cap};
