//! Query counts from relative popularity, the multiplier and the query probability.
//!
//! ```text
//! cargo run --example query_volume
//! ```

use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::fixture_bundle;
use cqsim::stats::{self, QueryVolumeConfig};
use cqsim::time::DAY_NAMES;

fn main() -> cqsim::Result<()> {
    // A place at 70% of its weekly peak, 5 people per popularity point, 40% of them querying.
    println!("query_count(70, 5, 0.4) = {}", stats::query_count(70.0, 5.0, 0.4)?);
    // An hour at rp 80 with one person per point, everyone querying.
    println!("query_count(80, 1, 1.0) = {}", stats::query_count(80.0, 1.0, 1.0)?);

    let bundle = fixture_bundle(7, 4, 10, 10, PRINCES_BRIDGE, 2000.0)?;
    let cfg = QueryVolumeConfig::default();
    let crowd = stats::crowd_distributions(&bundle, &cfg)?;
    println!("\nweekly total with alpha={} p_query={}: {}", cfg.alpha, cfg.p_query, crowd.total());
    for (d, n) in crowd.by_day.iter().enumerate() {
        println!("  {:<9} {n}", DAY_NAMES[d]);
    }
    for (place, n) in &crowd.by_place {
        println!("  {place}: {n}");
    }
    assert!(crowd.is_consistent());
    Ok(())
}
