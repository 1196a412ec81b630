//! Query volume, crowd distributions, car-park availability and distance preferences.
//!
//! The number of queries for a destination in one hour is
//! `round_half_up(rp * alpha * p_query)`, where `rp` is the relative popularity (0-100),
//! `alpha` converts it to an absolute crowd size and `p_query` is the share of the crowd
//! that issues a query. Summing over every (place, day, hour) gives the weekly total.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine, GeoPoint};
use crate::ingest::{CarPark, DatasetBundle};
use crate::rng;

pub type CountMatrix = [[u64; 24]; 7];

// ---- query volume -------------------------------------------------------------------

/// Per-(place, hour) override of the volume parameters. `hour: None` applies to the whole day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeOverride {
    pub place_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hour: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_query: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryVolumeConfig {
    pub alpha: f64,
    pub p_query: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<VolumeOverride>,
}

impl Default for QueryVolumeConfig {
    fn default() -> Self {
        QueryVolumeConfig {
            alpha: 10.0,
            p_query: 1.0,
            overrides: Vec::new(),
        }
    }
}

impl QueryVolumeConfig {
    pub fn new(alpha: f64, p_query: f64) -> Self {
        QueryVolumeConfig {
            alpha,
            p_query,
            overrides: Vec::new(),
        }
    }

    fn lookup(&self, place_id: &str, hour: u8, pick: impl Fn(&VolumeOverride) -> Option<f64>) -> Option<f64> {
        // hour-specific beats whole-day; later entries beat earlier ones
        let mut day_wide = None;
        let mut specific = None;
        for o in self.overrides.iter().filter(|o| o.place_id == place_id) {
            match (o.hour, pick(o)) {
                (Some(h), Some(v)) if h == hour => specific = Some(v),
                (None, Some(v)) => day_wide = Some(v),
                _ => {}
            }
        }
        specific.or(day_wide)
    }

    pub fn alpha_for(&self, place_id: &str, hour: u8) -> f64 {
        self.lookup(place_id, hour, |o| o.alpha).unwrap_or(self.alpha)
    }

    pub fn p_query_for(&self, place_id: &str, hour: u8) -> f64 {
        self.lookup(place_id, hour, |o| o.p_query).unwrap_or(self.p_query)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha, "alpha")?;
        check_p(self.p_query, "p_query")?;
        for o in &self.overrides {
            if let Some(h) = o.hour {
                if h > 23 {
                    return Err(Error::domain("overrides.hour", format!("{h} not in [0, 23]")));
                }
            }
            if let Some(a) = o.alpha {
                check_alpha(a, "overrides.alpha")?;
            }
            if let Some(p) = o.p_query {
                check_p(p, "overrides.p_query")?;
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64, field: &str) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(field, format!("{alpha} must be > 0")));
    }
    Ok(())
}

fn check_p(p: f64, field: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(field, format!("{p} not in [0, 1]")));
    }
    Ok(())
}

/// Round half up. The tiny bias absorbs binary representation error in products such as
/// `350 * 0.4`, which must land on `140` rather than `139.99999999999997`.
pub fn round_half_up(x: f64) -> u64 {
    (x + 0.5 + 1e-9).floor().max(0.0) as u64
}

/// Number of queries for one (place, hour): `round_half_up(rp * alpha * p_query)`.
pub fn query_count(rp: f64, alpha: f64, p_query: f64) -> Result<u64> {
    if !(0.0..=100.0).contains(&rp) {
        return Err(Error::domain("rp", format!("{rp} not in [0, 100]")));
    }
    check_alpha(alpha, "alpha")?;
    check_p(p_query, "p_query")?;
    Ok(round_half_up(rp * alpha * p_query))
}

/// Query counts per `[day][hour]` for each place, in bundle order.
pub fn hourly_counts(bundle: &DatasetBundle, config: &QueryVolumeConfig) -> Result<Vec<CountMatrix>> {
    config.validate()?;
    bundle
        .places
        .iter()
        .map(|p| {
            let mut m = [[0u64; 24]; 7];
            for (d, row) in m.iter_mut().enumerate() {
                for (h, cell) in row.iter_mut().enumerate() {
                    let hour = h as u8;
                    *cell = query_count(
                        f64::from(p.rp[d][h]),
                        config.alpha_for(&p.place_id, hour),
                        config.p_query_for(&p.place_id, hour),
                    )?;
                }
            }
            Ok(m)
        })
        .collect()
}

/// Weekly total over every (place, day, hour).
pub fn total_query_count(bundle: &DatasetBundle, config: &QueryVolumeConfig) -> Result<u64> {
    Ok(hourly_counts(bundle, config)?
        .iter()
        .flat_map(|m| m.iter().flatten())
        .sum())
}

// ---- crowd distributions ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdDistributions {
    pub by_place: BTreeMap<String, u64>,
    pub by_day: [u64; 7],
    pub by_place_day: BTreeMap<String, [u64; 7]>,
    pub by_place_day_hour: BTreeMap<String, CountMatrix>,
}

impl CrowdDistributions {
    pub fn total(&self) -> u64 {
        self.by_day.iter().sum()
    }

    /// Checks every marginal against the finest table.
    pub fn is_consistent(&self) -> bool {
        let mut by_day = [0u64; 7];
        let mut total_place = 0;
        for (place, m) in &self.by_place_day_hour {
            let Some(pd) = self.by_place_day.get(place) else { return false };
            let mut place_total = 0;
            for d in 0..7 {
                let s: u64 = m[d].iter().sum();
                if s != pd[d] {
                    return false;
                }
                by_day[d] += s;
                place_total += s;
            }
            if self.by_place.get(place) != Some(&place_total) {
                return false;
            }
            total_place += place_total;
        }
        by_day == self.by_day
            && self.by_place.len() == self.by_place_day_hour.len()
            && self.by_place_day.len() == self.by_place_day_hour.len()
            && total_place == self.total()
    }
}

pub fn crowd_distributions(bundle: &DatasetBundle, config: &QueryVolumeConfig) -> Result<CrowdDistributions> {
    let counts = hourly_counts(bundle, config)?;
    let mut out = CrowdDistributions {
        by_place: BTreeMap::new(),
        by_day: [0; 7],
        by_place_day: BTreeMap::new(),
        by_place_day_hour: BTreeMap::new(),
    };
    for (place, m) in bundle.places.iter().zip(&counts) {
        let mut per_day = [0u64; 7];
        for d in 0..7 {
            per_day[d] = m[d].iter().sum();
            out.by_day[d] += per_day[d];
        }
        out.by_place.insert(place.place_id.clone(), per_day.iter().sum());
        out.by_place_day.insert(place.place_id.clone(), per_day);
        out.by_place_day_hour.insert(place.place_id.clone(), *m);
    }
    Ok(out)
}

// ---- car-park availability ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityProfile {
    /// Open car parks per `[day][half-hour bin]`, sampled at the bin start.
    pub open_counts: Vec<Vec<u32>>,
}

pub fn availability_profile(carparks: &[CarPark]) -> AvailabilityProfile {
    let open_counts = (0..7u8)
        .map(|d| {
            (0..48u32)
                .map(|b| carparks.iter().filter(|c| c.is_open(d, b * 1800)).count() as u32)
                .collect()
        })
        .collect();
    AvailabilityProfile { open_counts }
}

/// Per-minute available-slot series for one car park on one day.
///
/// Zero whenever the car park is closed; inside opening windows the level follows a
/// bounded random walk in `[0, capacity]`. The stream is keyed by
/// `(seed, carpark_id, day)` so series are independent of evaluation order.
pub fn simulate_slots(carpark: &CarPark, day: u8, seed: u64) -> Vec<u32> {
    let mut rng = rng::stream(seed, &[rng::tag("slots"), rng::tag(&carpark.carpark_id), u64::from(day)]);
    let cap = f64::from(carpark.capacity);
    let step = Normal::new(0.0, (cap * 0.03).max(1.0)).unwrap();
    let mut level = cap * rng.random_range(0.2..0.9);
    (0..1440u32)
        .map(|minute| {
            let delta = step.sample(&mut rng);
            if carpark.is_open(day, minute * 60) {
                level = (level + delta).clamp(0.0, cap);
                level.round() as u32
            } else {
                0
            }
        })
        .collect()
}

/// Slot series for every car park and day, indexed like the car-park list.
#[derive(Debug, Clone)]
pub struct SlotTable {
    series: Vec<Vec<Vec<u32>>>,
}

impl SlotTable {
    pub fn simulate(carparks: &[CarPark], seed: u64) -> Self {
        SlotTable {
            series: carparks
                .iter()
                .map(|c| (0..7u8).map(|d| simulate_slots(c, d, seed)).collect())
                .collect(),
        }
    }

    pub fn from_series(series: Vec<Vec<Vec<u32>>>) -> Self {
        SlotTable { series }
    }

    pub fn available(&self, carpark: usize, day: u8, second_of_day: u32) -> u32 {
        self.series
            .get(carpark)
            .and_then(|days| days.get(day as usize % 7))
            .and_then(|s| s.get((second_of_day / 60) as usize))
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radius {
    Meters(f64),
    Unbounded,
}

impl Radius {
    pub fn meters(self) -> Option<f64> {
        match self {
            Radius::Meters(m) => Some(m),
            Radius::Unbounded => None,
        }
    }
}

/// Distance to the k-th nearest car park that is open at the instant and has a free slot.
pub fn radius_for_k(
    destination: GeoPoint,
    day: u8,
    second_of_day: u32,
    k: usize,
    carparks: &[CarPark],
    slots: &SlotTable,
) -> Radius {
    let k = k.max(1);
    let mut d: Vec<f64> = carparks
        .iter()
        .enumerate()
        .filter(|(i, c)| c.is_open(day, second_of_day) && slots.available(*i, day, second_of_day) > 0)
        .map(|(_, c)| haversine(destination, c.location))
        .collect();
    if d.len() < k {
        return Radius::Unbounded;
    }
    d.select_nth_unstable_by(k - 1, f64::total_cmp);
    Radius::Meters(d[k - 1])
}

// ---- distance-preference spans ------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpan {
    pub start_sec: u32,
    pub end_sec: u32,
    pub p_dominant: f64,
    pub mu_dominant_m: f64,
    pub p_nondominant: f64,
    pub mu_nondominant_m: f64,
}

impl DistanceSpan {
    pub fn contains(&self, second_of_day: u32) -> bool {
        if self.start_sec < self.end_sec {
            (self.start_sec..self.end_sec).contains(&second_of_day)
        } else {
            second_of_day >= self.start_sec || second_of_day < self.end_sec
        }
    }

    pub fn expected_distance(&self) -> f64 {
        self.p_dominant * self.mu_dominant_m + self.p_nondominant * self.mu_nondominant_m
    }

    pub fn label(&self) -> String {
        format!(
            "{}-{}",
            crate::time::format_clock(self.start_sec),
            crate::time::format_clock(self.end_sec)
        )
    }

    fn hours(&self) -> Vec<u8> {
        (0..24u8).filter(|h| self.contains(u32::from(*h) * 3600)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpanTable {
    pub spans: Vec<DistanceSpan>,
}

/// The five clock windows, as `(start_hour, end_hour)`.
pub const SPAN_HOURS: [(u32, u32); 5] = [(5, 10), (10, 14), (14, 19), (19, 1), (1, 5)];

/// Expected distance printed for each span, meters.
pub const PRINTED_EXPECTATION_M: [f64; 5] = [85.0, 187.72, 85.0, 215.8, 73.0];

/// Non-dominant probability of the 01:00-05:00 span as printed. With `mu = 1000 m` it
/// implies an expectation of 28 m rather than the printed 73 m; `0.05` reproduces 73 m.
pub const PRINTED_ROW5_P_NONDOMINANT: f64 = 0.005;
pub const CORRECTED_ROW5_P_NONDOMINANT: f64 = 0.05;

impl DistanceSpanTable {
    /// The constant table, with the 01:00-05:00 non-dominant share corrected to 0.05
    /// unless `verbatim_row5` is set.
    pub fn published(verbatim_row5: bool) -> Self {
        let rows = [
            (0.2, 137.5, 0.05, 1150.0),
            (0.125, 189.29, 0.125, 1312.5),
            (0.2, 137.5, 0.05, 1150.0),
            (0.1, 189.29, 0.15, 1312.5),
            (
                0.2,
                115.0,
                if verbatim_row5 { PRINTED_ROW5_P_NONDOMINANT } else { CORRECTED_ROW5_P_NONDOMINANT },
                1000.0,
            ),
        ];
        DistanceSpanTable {
            spans: SPAN_HOURS
                .iter()
                .zip(rows)
                .map(|(&(s, e), (pd, md, pn, mn))| DistanceSpan {
                    start_sec: s * 3600,
                    end_sec: e * 3600,
                    p_dominant: pd,
                    mu_dominant_m: md,
                    p_nondominant: pn,
                    mu_nondominant_m: mn,
                })
                .collect(),
        }
    }

    pub fn span_index(&self, second_of_day: u32) -> Option<usize> {
        self.spans.iter().position(|s| s.contains(second_of_day))
    }

    pub fn span_for(&self, second_of_day: u32) -> Option<&DistanceSpan> {
        self.span_index(second_of_day).map(|i| &self.spans[i])
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.spans {
            if s.start_sec >= 86_400 || s.end_sec > 86_400 || s.start_sec == s.end_sec {
                return Err(Error::domain("spans", format!("bad span {}", s.label())));
            }
            if s.p_dominant < 0.0 || s.p_nondominant < 0.0 || s.p_dominant + s.p_nondominant > 1.0 + 1e-12 {
                return Err(Error::domain("spans", format!("span {} probabilities exceed 1", s.label())));
            }
        }
        for minute in 0..1440u32 {
            let n = self.spans.iter().filter(|s| s.contains(minute * 60)).count();
            if n != 1 {
                return Err(Error::domain(
                    "spans",
                    format!("minute {minute} covered by {n} spans; spans must partition the day"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanConfig {
    /// Return the published constants instead of deriving from availability.
    pub use_published_table: bool,
    /// Keep the printed 0.005 for the 01:00-05:00 non-dominant share.
    pub verbatim_row5: bool,
    /// Non-dominant commuters want this many times `k_min` car parks within reach.
    pub nondominant_k_factor: usize,
}

impl Default for SpanConfig {
    fn default() -> Self {
        SpanConfig {
            use_published_table: true,
            verbatim_row5: false,
            nondominant_k_factor: 3,
        }
    }
}

const MAX_DISTANCE_M: f64 = 3000.0;

/// Build the distance-preference table.
///
/// In derived mode the span probabilities are kept from the published table (they come
/// from traffic statistics, not availability), and the group means are measured: for each
/// destination, day and half-hour inside a span, the dominant mean is the average radius
/// enclosing `k_min` open car parks with free slots, the non-dominant mean the radius
/// enclosing `k_min * nondominant_k_factor`. Unbounded samples are skipped; a span with no
/// bounded sample falls back to 3000 m.
pub fn derive_distance_spans(
    bundle: &DatasetBundle,
    slot_seed: u64,
    k_min: usize,
    config: &SpanConfig,
) -> Result<DistanceSpanTable> {
    if k_min == 0 {
        return Err(Error::domain("k_min", "must be >= 1"));
    }
    let published = DistanceSpanTable::published(config.verbatim_row5);
    if config.use_published_table {
        return Ok(published);
    }
    let slots = SlotTable::simulate(&bundle.carparks, slot_seed);
    let k_wide = k_min * config.nondominant_k_factor.max(1);
    let spans = published
        .spans
        .iter()
        .map(|span| {
            let (mut near, mut n_near, mut wide, mut n_wide) = (0.0, 0u64, 0.0, 0u64);
            for place in &bundle.places {
                for day in 0..7u8 {
                    for h in span.hours() {
                        for half in 0..2u32 {
                            let sod = u32::from(h) * 3600 + half * 1800;
                            let r = radius_for_k(place.location, day, sod, k_min, &bundle.carparks, &slots);
                            if let Some(m) = r.meters() {
                                near += m;
                                n_near += 1;
                            }
                            let r = radius_for_k(place.location, day, sod, k_wide, &bundle.carparks, &slots);
                            if let Some(m) = r.meters() {
                                wide += m;
                                n_wide += 1;
                            }
                        }
                    }
                }
            }
            let mean = |sum: f64, n: u64| if n == 0 { MAX_DISTANCE_M } else { sum / n as f64 };
            DistanceSpan {
                mu_dominant_m: mean(near, n_near),
                mu_nondominant_m: mean(wide, n_wide),
                ..span.clone()
            }
        })
        .collect();
    Ok(DistanceSpanTable { spans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::PRINCES_BRIDGE;
    use crate::ingest::{OpeningWindow, PopularityProfile, VehicleSpec};

    fn carpark(id: &str, location: GeoPoint, always_open: bool) -> CarPark {
        let w = if always_open {
            vec![OpeningWindow { open_sec: 0, close_sec: 86_400 }]
        } else {
            vec![]
        };
        CarPark {
            carpark_id: id.into(),
            name: id.into(),
            location,
            opening: std::array::from_fn(|_| w.clone()),
            capacity: 100,
            price_per_hour: 5.0,
            rating: 4.0,
            max_height: 2.1,
        }
    }

    fn one_place(rp: [[u8; 24]; 7]) -> DatasetBundle {
        DatasetBundle {
            places: vec![PopularityProfile {
                place_id: "p".into(),
                name: "P".into(),
                location: PRINCES_BRIDGE,
                min_time: 30.0,
                max_time: 90.0,
                rp,
            }],
            carparks: vec![carpark("c", PRINCES_BRIDGE, true)],
            vehicles: vec![VehicleSpec { vin: "V".into(), height: 1.5, length: 4.0, width: 1.8 }],
            center: PRINCES_BRIDGE,
            traffic: None,
        }
    }

    #[test]
    fn query_count_examples() {
        assert_eq!(query_count(70.0, 5.0, 0.4).unwrap(), 140);
        assert_eq!(query_count(0.0, 10.0, 1.0).unwrap(), 0);
        // 33 * 10 * 0.37 = 122.1
        assert_eq!(query_count(33.0, 10.0, 0.37).unwrap(), 122);
        // exact halves round up
        assert_eq!(query_count(1.0, 2.5, 1.0).unwrap(), 3);
    }

    #[test]
    fn query_count_domain_errors() {
        assert!(query_count(101.0, 1.0, 1.0).is_err());
        assert!(query_count(-1.0, 1.0, 1.0).is_err());
        assert!(query_count(50.0, 0.0, 1.0).is_err());
        assert!(query_count(50.0, 1.0, 1.3).is_err());
        assert!(query_count(50.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn total_examples() {
        let cfg = QueryVolumeConfig::new(10.0, 1.0);
        assert_eq!(total_query_count(&one_place([[0; 24]; 7]), &cfg).unwrap(), 0);
        assert_eq!(total_query_count(&one_place([[100; 24]; 7]), &cfg).unwrap(), 168_000);
    }

    #[test]
    fn overrides_apply_per_hour() {
        let mut cfg = QueryVolumeConfig::new(10.0, 1.0);
        cfg.overrides.push(VolumeOverride { place_id: "p".into(), hour: None, alpha: Some(2.0), p_query: None });
        cfg.overrides.push(VolumeOverride { place_id: "p".into(), hour: Some(3), alpha: Some(1.0), p_query: Some(0.5) });
        assert_eq!(cfg.alpha_for("p", 0), 2.0);
        assert_eq!(cfg.alpha_for("p", 3), 1.0);
        assert_eq!(cfg.p_query_for("p", 3), 0.5);
        assert_eq!(cfg.alpha_for("q", 3), 10.0);
        // 24 hours * 7 days at rp 100: 23 hours * 200 + 1 hour * 50
        assert_eq!(total_query_count(&one_place([[100; 24]; 7]), &cfg).unwrap(), 7 * (23 * 200 + 50));
    }

    #[test]
    fn single_cell_crowd() {
        let mut rp = [[0u8; 24]; 7];
        rp[2][10] = 50;
        let c = crowd_distributions(&one_place(rp), &QueryVolumeConfig::new(10.0, 1.0)).unwrap();
        assert_eq!(c.by_day, [0, 0, 500, 0, 0, 0, 0]);
        assert_eq!(c.by_place["p"], 500);
        assert!(c.is_consistent());
    }

    #[test]
    fn slots_closed_all_day_are_zero() {
        let c = carpark("c", PRINCES_BRIDGE, false);
        assert!(simulate_slots(&c, 0, 1).iter().all(|&v| v == 0));
    }

    #[test]
    fn slots_deterministic_and_bounded() {
        let c = carpark("c", PRINCES_BRIDGE, true);
        assert_eq!(simulate_slots(&c, 3, 42), simulate_slots(&c, 3, 42));
        assert_ne!(simulate_slots(&c, 3, 42), simulate_slots(&c, 3, 43));
        for seed in 0..1000 {
            assert!(simulate_slots(&c, (seed % 7) as u8, seed).iter().all(|&v| v <= 100));
        }
    }

    #[test]
    fn radius_trivial_cases() {
        let open = vec![carpark("a", PRINCES_BRIDGE, true)];
        let slots = SlotTable::from_series(vec![vec![vec![5; 1440]; 7]]);
        assert_eq!(radius_for_k(PRINCES_BRIDGE, 0, 0, 1, &open, &slots), Radius::Meters(0.0));
        assert_eq!(radius_for_k(PRINCES_BRIDGE, 0, 0, 2, &open, &slots), Radius::Unbounded);

        let closed = vec![carpark("a", PRINCES_BRIDGE, false)];
        let slots = SlotTable::simulate(&closed, 1);
        assert_eq!(radius_for_k(PRINCES_BRIDGE, 0, 0, 1, &closed, &slots), Radius::Unbounded);

        // open but full
        let full = SlotTable::from_series(vec![vec![vec![0; 1440]; 7]]);
        assert_eq!(radius_for_k(PRINCES_BRIDGE, 0, 0, 1, &open, &full), Radius::Unbounded);
    }

    #[test]
    fn published_table_rows() {
        let t = DistanceSpanTable::published(false);
        t.validate().unwrap();
        let first = &t.spans[0];
        assert_eq!((first.p_dominant, first.mu_dominant_m), (0.2, 137.5));
        assert_eq!((first.p_nondominant, first.mu_nondominant_m), (0.05, 1150.0));
        assert!((first.expected_distance() - 85.0).abs() < 1e-9);
        assert!((t.spans[1].expected_distance() - 187.72).abs() < 0.01);
        assert!((t.spans[4].expected_distance() - 73.0).abs() < 1e-9);
        let verbatim = DistanceSpanTable::published(true);
        assert!((verbatim.spans[4].expected_distance() - 28.0).abs() < 1e-9);
    }

    #[test]
    fn wrapping_span_lookup() {
        let t = DistanceSpanTable::published(false);
        assert_eq!(t.span_index(19 * 3600), Some(3));
        assert_eq!(t.span_index(0), Some(3));
        assert_eq!(t.span_index(3600 - 1), Some(3));
        assert_eq!(t.span_index(3600), Some(4));
        assert_eq!(t.span_index(5 * 3600), Some(0));
    }

    #[test]
    fn derived_mode_degenerate_geometry() {
        let mut b = one_place([[10; 24]; 7]);
        b.carparks = vec![carpark("a", PRINCES_BRIDGE, true), carpark("b", PRINCES_BRIDGE, true)];
        let cfg = SpanConfig { use_published_table: false, ..SpanConfig::default() };
        let t = derive_distance_spans(&b, 5, 1, &cfg).unwrap();
        for s in &t.spans {
            assert!(s.mu_dominant_m < 1.0, "{}", s.mu_dominant_m);
        }
        assert!(derive_distance_spans(&b, 5, 0, &cfg).is_err());
    }
}
