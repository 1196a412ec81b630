//! Export a store to CSV and read it back.
//!
//! ```text
//! cargo run --example export_csv -- [out.csv]
//! ```

use std::path::PathBuf;

use cqsim::generator::{self, GenerationConfig};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::fixture_bundle;
use cqsim::stats::QueryVolumeConfig;
use cqsim::store::{import_csv, CsvRow, TemplateStore};

fn main() -> cqsim::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cqsim-templates.csv"));
    let bundle = fixture_bundle(5, 2, 10, 30, PRINCES_BRIDGE, 2000.0)?;
    let cfg = GenerationConfig { seed: 5, volume: QueryVolumeConfig::new(0.5, 1.0), ..Default::default() };
    let s = TemplateStore::from_records(generator::generate(&bundle, &cfg)?.templates)?;

    let rows = s.export_csv(&out)?;
    println!("wrote {rows} rows to {}", out.display());
    let text = std::fs::read_to_string(&out)?;
    for line in text.lines().take(4) {
        println!("  {line}");
    }

    let back = import_csv(&out)?;
    let same = back.iter().zip(s.records()).all(|(a, r)| *a == CsvRow::from(r));
    println!("re-imported {} rows, identical: {same}", back.len());
    Ok(())
}
