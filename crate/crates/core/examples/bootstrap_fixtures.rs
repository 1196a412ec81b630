//! Write a seeded synthetic dataset and load it back.
//!
//! ```text
//! cargo run --example bootstrap_fixtures -- [out_dir] [seed]
//! ```

use std::path::PathBuf;

use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::{self, LoadConfig};

fn main() -> cqsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cqsim-fixtures"));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let written = ingest::bootstrap_fixtures(seed, 5, 30, 100, PRINCES_BRIDGE, 2000.0, &out)?;
    let loaded = ingest::load_dir(&out, &LoadConfig::default())?;
    assert_eq!(written.places, loaded.places);

    println!("wrote {}", out.display());
    for p in &loaded.places {
        let peak = p.rp.iter().flatten().max().unwrap();
        let from_center = p.location.distance_to(&PRINCES_BRIDGE);
        println!(
            "  {} {:<28} {:>6.0} m from center, stay {:>3.0}-{:>3.0} min, peak rp {}",
            p.place_id, p.name, from_center, p.min_time, p.max_time, peak
        );
        println!("      Monday rp: {:?}", p.rp[0]);
    }
    println!("  {} car parks, {} vehicles", loaded.carparks.len(), loaded.vehicles.len());
    Ok(())
}
