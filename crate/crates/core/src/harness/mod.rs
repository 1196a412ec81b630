//! Validation sink and fidelity reporting.
//!
//! The sink accepts any POST, logs `{recv_ns, template_id, scheduled_at, status}` as one
//! JSON line per request through a single writer task, and answers 200 (or 400 for a body
//! that is not a dispatch envelope). [`fidelity_report`] compares such a log with the store.

pub mod report;
pub mod sink;

pub use report::{fidelity_report, FidelityReport, HourCount, LagStats, MinuteCount};
pub use sink::{read_log, serve_sink, SinkConfig, SinkEntry, SinkServer};
