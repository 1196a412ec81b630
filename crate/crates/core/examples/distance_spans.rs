//! The per-time-span walking-distance table, published and derived from availability.
//!
//! ```text
//! cargo run --example distance_spans
//! ```

use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::fixture_bundle;
use cqsim::stats::{self, DistanceSpanTable, SpanConfig};

fn show(title: &str, t: &DistanceSpanTable) {
    println!("{title}");
    println!("  span          p_d     mu_d    p_n     mu_n     E");
    for s in &t.spans {
        println!(
            "  {:<12} {:>5.3} {:>8.2} {:>6.3} {:>8.2} {:>7.2}",
            s.label(),
            s.p_dominant,
            s.mu_dominant_m,
            s.p_nondominant,
            s.mu_nondominant_m,
            s.expected_distance()
        );
    }
}

fn main() -> cqsim::Result<()> {
    show("published (01-05 row corrected)", &DistanceSpanTable::published(false));
    show("published (01-05 row as printed)", &DistanceSpanTable::published(true));

    let bundle = fixture_bundle(3, 3, 60, 10, PRINCES_BRIDGE, 2000.0)?;
    let availability = stats::availability_profile(&bundle.carparks);
    println!("\nopen car parks on Monday by half hour: {:?}", availability.open_counts[0]);
    let derived = stats::derive_distance_spans(
        &bundle,
        3,
        2,
        &SpanConfig { use_published_table: false, ..SpanConfig::default() },
    )?;
    show("\nderived from simulated availability (k_min = 2)", &derived);
    Ok(())
}
