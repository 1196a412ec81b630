//! Generate a week of templates and summarize the run.
//!
//! ```text
//! cargo run --release --example generate_templates -- [n_places] [alpha] [seed]
//! ```

use std::time::Instant;

use cqsim::generator::{self, GenerationConfig};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::fixture_bundle;
use cqsim::stats::QueryVolumeConfig;

fn main() -> cqsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_places: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let alpha: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let bundle = fixture_bundle(seed, n_places, 40, 200, PRINCES_BRIDGE, 2000.0)?;
    let cfg = GenerationConfig { seed, volume: QueryVolumeConfig::new(alpha, 1.0), ..Default::default() };
    let t0 = Instant::now();
    let w = generator::generate(&bundle, &cfg)?;
    println!("{} templates, {} consumers in {:.2?}", w.templates.len(), w.consumers.len(), t0.elapsed());

    let s = &w.stats;
    println!("profile  share    consumers");
    for p in 1..=13u8 {
        println!("  {:>2}    {:.4}  {:>8}", p, s.profile_shares[&p], s.consumers_per_profile[&p]);
    }
    let m = &s.condition_marginals;
    println!(
        "conditions present: rating {:.4}, price {:.4}, duration {:.4}, distance {:.4}",
        m.rating, m.price, m.duration, m.distance
    );
    println!("modified vehicles: {} of {}", s.modified_vehicles, s.consumer_count);
    if !s.allocation_shortfall.is_empty() {
        println!("shortfall moved to profile 13: {:?}", s.allocation_shortfall);
    }
    println!("first template: {}", serde_json::to_string_pretty(&w.templates[0])?);
    Ok(())
}
