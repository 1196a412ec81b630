//! Context-query workload synthesis and replay for smart car-parking scenarios.
//!
//! The crate turns four source datasets (place popularity, car parks, vehicles and an
//! optional traffic-volume matrix) into a week-long set of context-query templates whose
//! volume, timing, destinations, commuter profiles and preference conditions follow
//! empirical distributions, persists them into a template repository, and replays them
//! against an HTTP endpoint under time compression.
//!
//! The pipeline, module by module:
//!
//! - [`ingest`] loads or bootstraps the datasets.
//! - [`stats`] computes query volumes, crowd distributions, car-park availability and the
//!   per-time-span distance-preference table.
//! - [`generator`] runs the matching pipeline that produces [`generator::TemplateRecord`]s.
//! - [`store`] persists templates (NDJSON + manifest), serves time windows and exports CSV.
//! - [`executor`] renders registered queries and replays the store against an endpoint.
//! - [`harness`] is the validation sink plus the fidelity report.
//! - [`cli`] wires everything behind the `cqsim` binary.
//!
//! Runnable walkthroughs live in `examples/`, one per capability.

pub mod cli;
pub mod error;
pub mod executor;
pub mod generator;
pub mod geo;
pub mod ingest;
pub mod rng;
pub mod stats;
pub mod store;
pub mod harness;
pub mod time;

pub use error::{Error, Result};
pub use geo::GeoPoint;
