//! Persist a workload, reopen it and walk the week in 10-minute fetch windows.
//!
//! ```text
//! cargo run --example window_fetch -- [store_dir]
//! ```

use std::path::PathBuf;

use cqsim::generator::{self, GenerationConfig};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::fixture_bundle;
use cqsim::stats::QueryVolumeConfig;
use cqsim::store::{self, TemplateStore};
use cqsim::time::{format_instant, SECONDS_PER_DAY};

fn main() -> cqsim::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cqsim-store"));
    let bundle = fixture_bundle(11, 2, 20, 50, PRINCES_BRIDGE, 2000.0)?;
    let cfg = GenerationConfig { seed: 11, volume: QueryVolumeConfig::new(2.0, 1.0), ..Default::default() };
    store::persist(&generator::generate(&bundle, &cfg)?, &dir)?;

    let s = TemplateStore::open(&dir)?;
    println!("{} records in {}", s.len(), dir.display());

    let m = 600;
    let thursday_ten = s.fetch_window(3, 10 * 3600, m)?;
    println!("Thursday 10:00 window holds {} records:", thursday_ten.len());
    for r in thursday_ten.iter().take(5) {
        println!("  #{:<7} {} {}", r.id, format_instant(r.instant()), r.address);
    }

    let mut total = 0;
    let mut busiest = (0, 0u32);
    for day in 0..7u8 {
        for start in (0..SECONDS_PER_DAY).step_by(m as usize) {
            let n = s.fetch_window(day, start, m)?.len();
            total += n;
            if n > busiest.0 {
                busiest = (n, u32::from(day) * SECONDS_PER_DAY + start);
            }
        }
    }
    println!("{} windows cover {total} records", 7 * SECONDS_PER_DAY / m);
    println!("busiest window starts {} with {} records", format_instant(busiest.1), busiest.0);
    assert_eq!(total, s.len());
    Ok(())
}
