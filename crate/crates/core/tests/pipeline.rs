use std::collections::{BTreeMap, BTreeSet, HashMap};

use cqsim::generator::profiles::RUSH_PREFERRED;
use cqsim::generator::{self, Family, GenerationConfig, Parallelism, ProfileTable, TemplateRecord};
use cqsim::geo::PRINCES_BRIDGE;
use cqsim::ingest::{self, fixture_bundle, LoadConfig};
use cqsim::stats::QueryVolumeConfig;
use cqsim::store::{self, import_csv, CsvRow, TemplateStore, CSV_HEADER};
use cqsim::time::SECONDS_PER_DAY;

fn small_config(seed: u64, alpha: f64) -> GenerationConfig {
    GenerationConfig { seed, volume: QueryVolumeConfig::new(alpha, 1.0), ..Default::default() }
}

#[test]
fn bootstrap_generate_persist_reload() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let written = ingest::bootstrap_fixtures(4, 3, 15, 20, PRINCES_BRIDGE, 1500.0, &data).unwrap();
    let bundle = ingest::load_dir(&data, &LoadConfig::default()).unwrap();
    assert_eq!(written.places, bundle.places);
    assert_eq!(written.carparks, bundle.carparks);
    assert_eq!(written.vehicles, bundle.vehicles);

    let w = generator::generate(&bundle, &small_config(4, 2.0)).unwrap();
    let path = dir.path().join("store");
    let persisted = store::persist(&w, &path).unwrap();
    let reopened = TemplateStore::open(&path).unwrap();
    assert_eq!(persisted.records(), reopened.records());
    assert_eq!(persisted.consumers(), reopened.consumers());
    assert_eq!(persisted.manifest(), reopened.manifest());
    assert_eq!(reopened.manifest().record_count, w.templates.len() as u64);

    let mut by_id: Vec<&TemplateRecord> = reopened.records().iter().collect();
    by_id.sort_by_key(|r| r.id);
    let mut original: Vec<&TemplateRecord> = w.templates.iter().collect();
    original.sort_by_key(|r| r.id);
    assert_eq!(by_id, original);
}

#[test]
fn empty_store_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let s = store::persist_templates(&[], dir.path()).unwrap();
    assert_eq!(s.manifest().record_count, 0);
    let s = TemplateStore::open(dir.path()).unwrap();
    assert!(s.is_empty());
    assert!(s.fetch_window(0, 0, 86_400).unwrap().is_empty());
    let csv = dir.path().join("t.csv");
    assert_eq!(s.export_csv(&csv).unwrap(), 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().trim_end(), CSV_HEADER);
}

#[test]
fn digest_changes_with_every_config_field() {
    let base = GenerationConfig::default();
    let variants: Vec<(&str, GenerationConfig)> = vec![
        ("seed", GenerationConfig { seed: 2, ..base.clone() }),
        ("alpha", GenerationConfig { volume: QueryVolumeConfig::new(9.0, 1.0), ..base.clone() }),
        ("p_query", GenerationConfig { volume: QueryVolumeConfig::new(10.0, 0.9), ..base.clone() }),
        ("origin_center", GenerationConfig { origin_center: Some(PRINCES_BRIDGE), ..base.clone() }),
        ("origin_radius_m", GenerationConfig { origin_radius_m: 1000.0, ..base.clone() }),
        ("vehicle_mod_fraction", GenerationConfig { vehicle_mod_fraction: 0.4, ..base.clone() }),
        ("per_param_mod_prob", GenerationConfig { per_param_mod_prob: 0.4, ..base.clone() }),
        ("locality_rate_range", GenerationConfig { locality_rate_range: (5.0, 12.0), ..base.clone() }),
        ("rush_windows", GenerationConfig { rush_windows: Some(vec![(8, 10)]), ..base.clone() }),
        ("distance_bounds", GenerationConfig { distance_bounds: (5.0, 3000.0), ..base.clone() }),
        ("k_min", GenerationConfig { k_min: 3, ..base.clone() }),
        ("query_id", GenerationConfig { query_id: "parking_push".into(), ..base.clone() }),
        ("random_group_max", GenerationConfig { random_group_max: 2, ..base.clone() }),
        ("distance_factor_probs", GenerationConfig { distance_factor_probs: [0.5, 0.25, 0.25], ..base.clone() }),
    ];
    let mut seen = BTreeSet::new();
    seen.insert(base.digest());
    for (name, v) in &variants {
        assert!(seen.insert(v.digest()), "digest did not change for {name}");
    }
    let mut c = base.clone();
    c.cond_probs.rating = 0.5;
    assert!(seen.insert(c.digest()));
    let mut c = base.clone();
    c.max_mod.width_m = 0.2;
    assert!(seen.insert(c.digest()));
    let mut c = base.clone();
    c.onstreet_price.sd = 4.0;
    assert!(seen.insert(c.digest()));
    let mut c = base.clone();
    c.spans.verbatim_row5 = true;
    assert!(seen.insert(c.digest()));
}

#[test]
fn parallelism_does_not_change_output() {
    let bundle = fixture_bundle(8, 3, 10, 30, PRINCES_BRIDGE, 2000.0).unwrap();
    let cfg = small_config(8, 3.0);
    let a = generator::generate_with(&bundle, &cfg, Parallelism::Sequential).unwrap();
    let b = generator::generate_with(&bundle, &cfg, Parallelism::Rayon).unwrap();
    assert_eq!(a.templates, b.templates);
    assert_eq!(a.consumers, b.consumers);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn recurrence_invariants_hold() {
    let bundle = fixture_bundle(12, 4, 10, 30, PRINCES_BRIDGE, 2000.0).unwrap();
    let w = generator::generate(&bundle, &small_config(12, 4.0)).unwrap();
    let table = ProfileTable::published();
    let mut owned: HashMap<u64, Vec<&TemplateRecord>> = HashMap::new();
    for t in &w.templates {
        owned.entry(t.consumer_id).or_default().push(t);
    }
    for c in &w.consumers {
        let spec = table.get(c.profile_no).unwrap();
        let ts = &owned[&c.consumer_id];
        assert!(ts.iter().all(|t| t.vin == c.vin && t.profile_no == c.profile_no));
        let days: Vec<u8> = {
            let mut d: Vec<u8> = ts.iter().map(|t| t.day).collect();
            d.sort_unstable();
            d
        };
        match spec.family {
            Family::Random => assert!((1..=3).contains(&ts.len())),
            f => assert_eq!(days, f.days().to_vec(), "consumer {} profile {}", c.consumer_id, c.profile_no),
        }
        assert_eq!(c.home_destination.is_some(), spec.same_location());
        assert_eq!(c.home_hour.is_some(), spec.same_time());
        if let Some(place_id) = &c.home_destination {
            let name = &bundle.place(place_id).unwrap().name;
            assert!(ts.iter().all(|t| &t.address == name));
        }
        if let Some(h) = c.home_hour {
            assert!(ts.iter().all(|t| t.hour == h));
        }
    }
}

#[test]
fn rush_preferred_profiles_anchor_in_rush_hours() {
    let bundle = fixture_bundle(21, 3, 10, 30, PRINCES_BRIDGE, 2000.0).unwrap();
    let w = generator::generate(&bundle, &small_config(21, 5.0)).unwrap();
    let rush = GenerationConfig::default().rush_hours(None);
    let mut in_rush: BTreeMap<u8, (u64, u64)> = BTreeMap::new();
    let mut first: BTreeMap<u8, (u64, u8)> = BTreeMap::new();
    for c in &w.consumers {
        if let Some(h) = c.home_hour {
            let e = in_rush.entry(c.profile_no).or_default();
            e.0 += u64::from(rush[h as usize]);
            e.1 += 1;
            let f = first.entry(c.profile_no).or_insert((c.consumer_id, h));
            if c.consumer_id < f.0 {
                *f = (c.consumer_id, h);
            }
        }
    }
    let baseline = rush.iter().filter(|&&r| r).count() as f64 / 24.0;
    // profile 1 is allocated first, later preferred profiles may find rush slots used up
    let (r, n) = in_rush[&1];
    assert!(n > 0 && r as f64 / n as f64 > baseline, "profile 1: {r}/{n} in rush hours");
    for p in RUSH_PREFERRED {
        assert!(rush[first[&p].1 as usize], "first consumer of profile {p} anchors outside rush hours");
    }
}

#[test]
fn windows_partition_the_week() {
    let bundle = fixture_bundle(5, 2, 10, 20, PRINCES_BRIDGE, 2000.0).unwrap();
    let s = TemplateStore::from_records(generator::generate(&bundle, &small_config(5, 1.0)).unwrap().templates).unwrap();
    for m in [60u32, 600, 3600, 7200, 86_400] {
        let mut ids = Vec::new();
        for day in 0..7u8 {
            for start in (0..SECONDS_PER_DAY).step_by(m as usize) {
                let w = s.fetch_window(day, start, m).unwrap();
                assert!(w.windows(2).all(|p| (p[0].instant(), p[0].id) < (p[1].instant(), p[1].id)));
                let lo = u32::from(day) * SECONDS_PER_DAY + start;
                assert!(w.iter().all(|r| (lo..lo + m).contains(&r.instant())));
                ids.extend(w.iter().map(|r| r.id));
            }
        }
        assert_eq!(ids.len(), s.len(), "window {m}");
        let unique: BTreeSet<u64> = ids.into_iter().collect();
        assert_eq!(unique.len(), s.len());
    }
}

#[test]
fn csv_round_trip_on_generated_store() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = fixture_bundle(6, 2, 10, 20, PRINCES_BRIDGE, 2000.0).unwrap();
    let s = store::persist(&generator::generate(&bundle, &small_config(6, 1.0)).unwrap(), &dir.path().join("s")).unwrap();
    let csv = dir.path().join("out.csv");
    let rows = s.export_csv(&csv).unwrap();
    assert_eq!(rows, s.manifest().record_count);
    let back = import_csv(&csv).unwrap();
    let expected: Vec<CsvRow> = s.records().iter().map(CsvRow::from).collect();
    assert_eq!(back, expected);
    // null cells are empty
    let text = std::fs::read_to_string(&csv).unwrap();
    let nulls = s.records().iter().filter(|r| r.price.is_none()).count();
    let empty_price = text.lines().skip(1).filter(|l| l.split(',').nth(10) == Some("")).count();
    assert_eq!(nulls, empty_price);
}

#[test]
fn csv_header_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "_id,lat,lng\n1,2,3\n").unwrap();
    assert!(matches!(import_csv(&p), Err(cqsim::Error::SchemaViolation { .. })));
}
