//! Replay a generated week against an in-process sink under time compression.
//!
//! ```text
//! cargo run --release --example replay_week -- [compression]
//! ```

use std::time::Duration;

use cqsim::executor::{self, QueryRegistry, RunConfig};
use cqsim::generator::{self, GenerationConfig};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::harness::{self, SinkConfig, SinkServer};
use cqsim::ingest::fixture_bundle;
use cqsim::stats::QueryVolumeConfig;
use cqsim::store::TemplateStore;
use cqsim::time::SECONDS_PER_WEEK;
use tokio_util::sync::CancellationToken;

#[tokio::main]
async fn main() -> cqsim::Result<()> {
    let compression: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_160.0);
    let dir = tempfile::tempdir()?;

    let bundle = fixture_bundle(5, 2, 20, 50, PRINCES_BRIDGE, 2000.0)?;
    let cfg = GenerationConfig { seed: 5, volume: QueryVolumeConfig::new(0.5, 1.0), ..Default::default() };
    let store = TemplateStore::from_records(generator::generate(&bundle, &cfg)?.templates)?;

    let log_path = dir.path().join("sink.ndjson");
    let sink = SinkServer::start(SinkConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        log_path: log_path.clone(),
        response_delay: Duration::ZERO,
    })
    .await?;
    let run = RunConfig {
        endpoint: sink.url(),
        compression,
        duration: SECONDS_PER_WEEK,
        ..RunConfig::default()
    };
    println!(
        "replaying {} templates, one week in {:.0} s",
        store.len(),
        f64::from(SECONDS_PER_WEEK) / compression
    );
    let report = executor::run(&store, &QueryRegistry::builtin(), &run, CancellationToken::new()).await?;
    sink.shutdown().await?;

    let s = &report.summary;
    println!(
        "dispatched {} / fetched {} in {:.1} s; {} late; within eps={:.0}s: {:.4}; peak in flight {}",
        s.dispatched, s.fetched, s.wall_seconds, s.late, report.clock.epsilon, s.within_epsilon_fraction, s.max_in_flight_observed
    );
    let mut worst: Vec<_> = report.records.iter().collect();
    worst.sort_by(|a, b| b.sim_error().abs().total_cmp(&a.sim_error().abs()));
    for r in worst.iter().take(5) {
        println!(
            "  template {} scheduled {}: trigger {:+.1}, dispatch {:+.1} sim s off",
            r.template_id,
            cqsim::time::format_instant(r.scheduled_at),
            r.fired_sim - f64::from(r.scheduled_at),
            r.sim_error()
        );
    }
    let fidelity = harness::fidelity_report(&store, &harness::read_log(&log_path)?, &report.clock);
    println!(
        "sink saw {}; missing {}, duplicates {}; per-hour exact: {}",
        fidelity.observed,
        fidelity.missing_ids.len(),
        fidelity.duplicate_ids.len(),
        fidelity.per_hour_exact
    );
    Ok(())
}
