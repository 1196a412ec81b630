//! Merge a template into its registered query text.
//!
//! ```text
//! cargo run --example render_query
//! ```

use cqsim::executor::QueryRegistry;
use cqsim::generator::TemplateRecord;
use cqsim::geo::GeoPoint;

fn main() -> cqsim::Result<()> {
    let mut record = TemplateRecord {
        id: 1,
        location: GeoPoint::new(-37.8183, 144.9671)?,
        address: "Melbourne Skydeck".into(),
        day: 6,
        hour: 17,
        minute: 30,
        second: 0,
        distance: Some(200.0),
        expected_time: Some(90.0),
        price: Some(20.0),
        rating: Some(3.0),
        vin: "13UNVER82367G4".into(),
        query_id: "parking_pull".into(),
        consumer_id: 1,
        profile_no: 1,
        distance_group: None,
        price_category: None,
    };
    let registry = QueryRegistry::builtin();
    println!("--- every condition present ---\n{}", registry.render(&record)?);

    record.distance = None;
    record.rating = None;
    record.expected_time = None;
    println!("--- distance, rating and duration absent ---\n{}", registry.render(&record)?);

    record.query_id = "parking_push".into();
    println!("--- push variant ---\n{}", registry.render(&record)?);

    let mut custom = QueryRegistry::empty();
    custom.insert("short", "find parking near {{address}} for {{vin}}[[? under ${{price}}]]")?;
    record.query_id = "short".into();
    println!("--- custom registry ---\n{}", custom.render(&record)?);
    Ok(())
}
