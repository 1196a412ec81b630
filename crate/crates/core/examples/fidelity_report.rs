//! Build a fidelity report from a short replay: one destination-hour of 80 queries.
//!
//! ```text
//! cargo run --example fidelity_report
//! ```

use std::time::Duration;

use cqsim::executor::{self, QueryRegistry, RunConfig};
use cqsim::generator::{self, GenerationConfig};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::harness::{self, SinkConfig, SinkServer};
use cqsim::ingest::fixture_bundle;
use cqsim::stats::QueryVolumeConfig;
use cqsim::store::TemplateStore;
use tokio_util::sync::CancellationToken;

#[tokio::main]
async fn main() -> cqsim::Result<()> {
    // One place whose only busy hour is Monday 10:00 at rp 80.
    let mut bundle = fixture_bundle(2, 1, 10, 10, PRINCES_BRIDGE, 2000.0)?;
    let mut rp = [[0u8; 24]; 7];
    rp[0][10] = 80;
    bundle.places[0].rp = rp;
    let cfg = GenerationConfig { volume: QueryVolumeConfig::new(1.0, 1.0), ..Default::default() };
    let store = TemplateStore::from_records(generator::generate(&bundle, &cfg)?.templates)?;

    let dir = tempfile::tempdir()?;
    let log_path = dir.path().join("sink.ndjson");
    let sink = SinkServer::start(SinkConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        log_path: log_path.clone(),
        response_delay: Duration::ZERO,
    })
    .await?;
    let run = RunConfig {
        endpoint: sink.url(),
        compression: 600.0,
        start: 10 * 3600,
        duration: 3600,
        ..RunConfig::default()
    };
    let report = executor::run(&store, &QueryRegistry::builtin(), &run, CancellationToken::new()).await?;
    sink.shutdown().await?;

    let fidelity = harness::fidelity_report(&store, &harness::read_log(&log_path)?, &report.clock);
    let mut summary = fidelity.clone();
    summary.per_minute.truncate(5);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
