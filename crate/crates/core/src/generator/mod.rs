//! The template generation pipeline.
//!
//! Stages, in order:
//!
//! 1. schedule: per (place, day, hour) the query count from [`crate::stats::query_count`],
//!    each stamped with a uniform minute and second, plus a uniform origin in the disk
//!    around the origin center;
//! 2. commuter matching ([`profiles::allocate_commuters`]);
//! 3. one vehicle per consumer ([`vehicle::assign_vehicle`]);
//! 4. preference conditions per template ([`conditions::attach_conditions`]).
//!
//! Each stage draws from its own seeded stream keyed by place/day, consumer or template id,
//! so the output is identical whether stages 1 and 4 run sequentially or on the rayon pool.

pub mod conditions;
pub mod profiles;
pub mod schedule;
pub mod vehicle;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use conditions::{
    ConditionProbabilities, DistanceGroup, PriceCategory, PriceCategoryShares, PriceDistribution,
};
pub use profiles::{CommuterProfileSpec, Family, ProfileTable};
pub use vehicle::MaxModification;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::ingest::{DatasetBundle, VehicleSpec};
use crate::rng::{self, truncated_normal};
use crate::stats::{self, DistanceSpanTable, QueryVolumeConfig, SpanConfig};
use conditions::{crowd_multiplier, ConditionContext, PriceTables, STATIC_PREF_REFERENCE_M};
use profiles::SlotKey;

pub const DEFAULT_QUERY_ID: &str = "parking_pull";

/// Rush windows used when neither the config nor a traffic matrix provides them.
pub const DEFAULT_RUSH_WINDOWS: [(u8, u8); 2] = [(7, 9), (16, 18)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub seed: u64,
    pub volume: QueryVolumeConfig,
    /// Defaults to the bundle's center.
    pub origin_center: Option<GeoPoint>,
    pub origin_radius_m: f64,
    pub cond_probs: ConditionProbabilities,
    pub vehicle_mod_fraction: f64,
    pub per_param_mod_prob: f64,
    pub max_mod: MaxModification,
    pub price_categories: PriceCategoryShares,
    pub onstreet_price: PriceDistribution,
    /// Hourly-rate range for the seeded per-destination locality table.
    pub locality_rate_range: (f64, f64),
    /// `[start_hour, end_hour)` pairs. Derived from the traffic matrix when absent, else
    /// [`DEFAULT_RUSH_WINDOWS`].
    pub rush_windows: Option<Vec<(u8, u8)>>,
    /// Shares of static preference, crowdedness and pure random in choosing a distance.
    pub distance_factor_probs: [f64; 3],
    pub distance_bounds: (f64, f64),
    pub spans: SpanConfig,
    /// Car parks a result should contain; only used when deriving spans from availability.
    pub k_min: usize,
    pub query_id: String,
    /// Random-profile consumers own between 1 and this many templates.
    pub random_group_max: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            seed: 1,
            volume: QueryVolumeConfig::default(),
            origin_center: None,
            origin_radius_m: 2000.0,
            cond_probs: ConditionProbabilities::default(),
            vehicle_mod_fraction: 0.5,
            per_param_mod_prob: 0.5,
            max_mod: MaxModification::default(),
            price_categories: PriceCategoryShares::default(),
            onstreet_price: PriceDistribution::default(),
            locality_rate_range: (4.0, 12.0),
            rush_windows: None,
            distance_factor_probs: [1.0 / 3.0; 3],
            distance_bounds: (10.0, 3000.0),
            spans: SpanConfig::default(),
            k_min: 2,
            query_id: DEFAULT_QUERY_ID.to_string(),
            random_group_max: 3,
        }
    }
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(field, format!("{p} not in [0, 1]")));
    }
    Ok(())
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        self.volume.validate()?;
        if let Some(c) = &self.origin_center {
            c.validate()?;
        }
        if !(self.origin_radius_m >= 0.0 && self.origin_radius_m.is_finite()) {
            return Err(Error::domain("origin_radius_m", "must be >= 0"));
        }
        check_prob("cond_probs.rating", self.cond_probs.rating)?;
        check_prob("cond_probs.price", self.cond_probs.price)?;
        check_prob("cond_probs.duration", self.cond_probs.duration)?;
        check_prob("vehicle_mod_fraction", self.vehicle_mod_fraction)?;
        check_prob("per_param_mod_prob", self.per_param_mod_prob)?;
        for (f, v) in [
            ("max_mod.height_m", self.max_mod.height_m),
            ("max_mod.length_m", self.max_mod.length_m),
            ("max_mod.width_m", self.max_mod.width_m),
        ] {
            if !(v >= 0.0) {
                return Err(Error::domain(f, "must be >= 0"));
            }
        }
        let shares = self.price_categories.as_array();
        for (f, v) in ["cat1_expected_time", "random_normal", "locality", "time_of_day"]
            .iter()
            .zip(shares)
        {
            check_prob(&format!("price_categories.{f}"), v)?;
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::domain("price_categories", format!("shares sum to {sum}, not 1")));
        }
        for (i, p) in self.distance_factor_probs.iter().enumerate() {
            check_prob(&format!("distance_factor_probs[{i}]"), *p)?;
        }
        let sum: f64 = self.distance_factor_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::domain("distance_factor_probs", format!("sum to {sum}, not 1")));
        }
        if !(self.onstreet_price.mean >= 0.0 && self.onstreet_price.sd >= 0.0) {
            return Err(Error::domain("onstreet_price", "mean and sd must be >= 0"));
        }
        let (lo, hi) = self.locality_rate_range;
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::domain("locality_rate_range", "need 0 <= low <= high"));
        }
        let (lo, hi) = self.distance_bounds;
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::domain("distance_bounds", "need 0 <= low < high"));
        }
        if let Some(windows) = &self.rush_windows {
            for &(s, e) in windows {
                if s > 23 || e > 24 || s >= e {
                    return Err(Error::domain("rush_windows", format!("bad window {s}-{e}")));
                }
            }
        }
        if self.k_min == 0 {
            return Err(Error::domain("k_min", "must be >= 1"));
        }
        if self.random_group_max == 0 {
            return Err(Error::domain("random_group_max", "must be >= 1"));
        }
        if self.query_id.trim().is_empty() {
            return Err(Error::domain("query_id", "must not be empty"));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the whole config.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Rush hours as a per-hour mask.
    pub fn rush_hours(&self, traffic: Option<&crate::ingest::HourMatrix>) -> [bool; 24] {
        let mut mask = [false; 24];
        match (&self.rush_windows, traffic) {
            (Some(windows), _) => {
                for &(s, e) in windows {
                    for h in s..e.min(24) {
                        mask[h as usize] = true;
                    }
                }
            }
            (None, Some(t)) => mask = rush_hours_from_traffic(t),
            (None, None) => {
                for (s, e) in DEFAULT_RUSH_WINDOWS {
                    for h in s..e {
                        mask[h as usize] = true;
                    }
                }
            }
        }
        mask
    }
}

/// Hours whose mean weekday traffic is at least 80% of the busiest weekday hour.
pub fn rush_hours_from_traffic(traffic: &crate::ingest::HourMatrix) -> [bool; 24] {
    let mean: Vec<f64> = (0..24)
        .map(|h| (0..5).map(|d| f64::from(traffic[d][h])).sum::<f64>() / 5.0)
        .collect();
    let peak = mean.iter().cloned().fold(0.0, f64::max);
    let mut mask = [false; 24];
    if peak > 0.0 {
        for h in 0..24 {
            mask[h] = mean[h] >= 0.8 * peak;
        }
    }
    mask
}

/// One context-query template: the repository schema plus generation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateRecord {
    #[serde(rename = "_id")]
    pub id: u64,
    pub location: GeoPoint,
    pub address: String,
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
    pub second: u8,
    pub distance: Option<f64>,
    pub expected_time: Option<f64>,
    pub price: Option<f64>,
    pub rating: Option<f64>,
    pub vin: String,
    pub query_id: String,
    pub consumer_id: u64,
    pub profile_no: u8,
    #[serde(default)]
    pub distance_group: Option<DistanceGroup>,
    #[serde(default)]
    pub price_category: Option<PriceCategory>,
}

impl TemplateRecord {
    pub fn instant(&self) -> u32 {
        crate::time::week_instant(self.day, self.hour, self.minute, self.second)
    }

    pub fn second_of_day(&self) -> u32 {
        self.instant() % crate::time::SECONDS_PER_DAY
    }

    pub fn validate(&self) -> Result<()> {
        let label = format!("template {}", self.id);
        if self.day > 6 || self.hour > 23 || self.minute > 59 || self.second > 59 {
            return Err(Error::invariant(&label, "day/hour/minute/second", "out of range"));
        }
        self.location.validate().map_err(|e| Error::invariant(&label, "location", e.to_string()))?;
        if self.address.is_empty() {
            return Err(Error::invariant(&label, "address", "empty"));
        }
        if self.vin.is_empty() {
            return Err(Error::invariant(&label, "vin", "empty"));
        }
        if self.query_id.is_empty() {
            return Err(Error::invariant(&label, "query_id", "empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consumer {
    pub consumer_id: u64,
    pub profile_no: u8,
    /// Place id; present exactly when the profile is same-location.
    pub home_destination: Option<String>,
    /// Present exactly when the profile is same-time.
    pub home_hour: Option<u8>,
    pub vin: String,
    /// Vehicle after any modification.
    pub vehicle: VehicleSpec,
    pub vehicle_modified: bool,
    /// Preferred walking distance at the 137.5 m reference scale.
    pub static_distance_pref: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Rayon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMarginals {
    pub rating: f64,
    pub price: f64,
    pub duration: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub template_count: u64,
    pub consumer_count: u64,
    pub templates_per_profile: BTreeMap<u8, u64>,
    pub profile_shares: BTreeMap<u8, f64>,
    pub consumers_per_profile: BTreeMap<u8, u64>,
    /// Templates a constrained profile could not claim; they went to the random profile.
    pub allocation_shortfall: BTreeMap<u8, u64>,
    pub condition_marginals: ConditionMarginals,
    pub modified_vehicles: u64,
}

#[derive(Debug, Clone)]
pub struct GeneratedWorkload {
    pub templates: Vec<TemplateRecord>,
    pub consumers: Vec<Consumer>,
    pub config: GenerationConfig,
    pub span_table: DistanceSpanTable,
    pub stats: GenerationStats,
}

pub fn generate(bundle: &DatasetBundle, config: &GenerationConfig) -> Result<GeneratedWorkload> {
    generate_with(bundle, config, Parallelism::Rayon)
}

struct Draft {
    place: usize,
    day: u8,
    hour: u8,
    minute: u8,
    second: u8,
    origin: GeoPoint,
}

pub fn generate_with(
    bundle: &DatasetBundle,
    config: &GenerationConfig,
    parallelism: Parallelism,
) -> Result<GeneratedWorkload> {
    config.validate()?;
    bundle.validate()?;
    let seed = config.seed;
    let counts = stats::hourly_counts(bundle, &config.volume)?;
    let center = config.origin_center.unwrap_or(bundle.center);

    // canonical (place_id, day) group order
    let mut place_order: Vec<usize> = (0..bundle.places.len()).collect();
    place_order.sort_by(|&a, &b| bundle.places[a].place_id.cmp(&bundle.places[b].place_id));
    let groups: Vec<(usize, u8)> = place_order
        .iter()
        .flat_map(|&p| (0..7u8).map(move |d| (p, d)))
        .collect();

    let schedule_group = |&(p, d): &(usize, u8)| -> Vec<Draft> {
        let pid = rng::tag(&bundle.places[p].place_id);
        let mut time_rng = rng::stream(seed, &[rng::tag("schedule"), pid, u64::from(d)]);
        let mut origin_rng = rng::stream(seed, &[rng::tag("origin"), pid, u64::from(d)]);
        let mut out = Vec::new();
        for h in 0..24u8 {
            for (minute, second) in schedule::assign_execution_time(counts[p][d as usize][h as usize], &mut time_rng) {
                out.push(Draft {
                    place: p,
                    day: d,
                    hour: h,
                    minute,
                    second,
                    origin: schedule::sample_origin(center, config.origin_radius_m, &mut origin_rng),
                });
            }
        }
        out
    };
    let drafts: Vec<Draft> = match parallelism {
        Parallelism::Sequential => groups.iter().flat_map(schedule_group).collect(),
        Parallelism::Rayon => groups.par_iter().flat_map_iter(schedule_group).collect(),
    };

    // commuter matching
    let slots: Vec<SlotKey> = drafts
        .iter()
        .map(|d| SlotKey { place: d.place, day: d.day, hour: d.hour })
        .collect();
    let table = ProfileTable::published();
    let rush = config.rush_hours(bundle.traffic.as_ref());
    let mut alloc_rng = rng::stream(seed, &[rng::tag("allocation")]);
    let alloc = profiles::allocate_commuters(
        &slots,
        bundle.places.len(),
        &table,
        &rush,
        config.random_group_max,
        &mut alloc_rng,
    )?;

    // vehicles and static preferences
    let consumers: Vec<Consumer> = alloc
        .consumers
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let id = i as u64 + 1;
            let mut r = rng::stream(seed, &[rng::tag("consumer"), id]);
            let v = vehicle::assign_vehicle(&bundle.vehicles, config, &mut r);
            let (lo, hi) = config.distance_bounds;
            let pref = truncated_normal(&mut r, STATIC_PREF_REFERENCE_M, STATIC_PREF_REFERENCE_M / 4.0, lo, hi);
            Consumer {
                consumer_id: id,
                profile_no: a.profile_no,
                home_destination: a.home_place.map(|p| bundle.places[p].place_id.clone()),
                home_hour: a.home_hour,
                vin: v.vin,
                vehicle: v.effective,
                vehicle_modified: v.modified,
                static_distance_pref: Some(conditions::round1(pref)),
            }
        })
        .collect();

    // conditions
    let span_table = stats::derive_distance_spans(bundle, seed, config.k_min, &config.spans)?;
    span_table.validate()?;
    let ctx = ConditionContext {
        prices: PriceTables::build(bundle, &span_table, config),
        crowd_norm: crowd_normalizers(&drafts, bundle, &span_table),
        spans: span_table.clone(),
    };
    let build = |(i, d): (usize, &Draft)| -> TemplateRecord {
        let id = i as u64 + 1;
        let consumer = &consumers[alloc.owner[i] as usize];
        let place = &bundle.places[d.place];
        let mut t = TemplateRecord {
            id,
            location: d.origin,
            address: place.name.clone(),
            day: d.day,
            hour: d.hour,
            minute: d.minute,
            second: d.second,
            distance: None,
            expected_time: None,
            price: None,
            rating: None,
            vin: consumer.vin.clone(),
            query_id: config.query_id.clone(),
            consumer_id: consumer.consumer_id,
            profile_no: consumer.profile_no,
            distance_group: None,
            price_category: None,
        };
        let mut r = rng::stream(seed, &[rng::tag("conditions"), id]);
        conditions::attach_conditions(&mut t, consumer, d.place, place, &ctx, config, &mut r);
        t
    };
    let templates: Vec<TemplateRecord> = match parallelism {
        Parallelism::Sequential => drafts.iter().enumerate().map(build).collect(),
        Parallelism::Rayon => drafts.par_iter().enumerate().map(build).collect(),
    };

    let stats = summarize(&templates, &consumers, &alloc.shortfall);
    Ok(GeneratedWorkload {
        templates,
        consumers,
        config: config.clone(),
        span_table,
        stats,
    })
}

fn crowd_normalizers(drafts: &[Draft], bundle: &DatasetBundle, spans: &DistanceSpanTable) -> Vec<f64> {
    let mut sum = vec![0.0; spans.spans.len()];
    let mut n = vec![0u64; spans.spans.len()];
    for d in drafts {
        let sod = u32::from(d.hour) * 3600 + u32::from(d.minute) * 60 + u32::from(d.second);
        if let Some(si) = spans.span_index(sod) {
            sum[si] += crowd_multiplier(bundle.places[d.place].rp[d.day as usize][d.hour as usize]);
            n[si] += 1;
        }
    }
    sum.iter()
        .zip(&n)
        .map(|(s, &k)| if k == 0 { 1.0 } else { s / k as f64 })
        .collect()
}

fn summarize(templates: &[TemplateRecord], consumers: &[Consumer], shortfall: &[(u8, u64)]) -> GenerationStats {
    let n = templates.len() as u64;
    let mut per_profile: BTreeMap<u8, u64> = (1..=13).map(|p| (p, 0)).collect();
    let (mut rating, mut price, mut duration, mut distance) = (0u64, 0u64, 0u64, 0u64);
    for t in templates {
        *per_profile.entry(t.profile_no).or_default() += 1;
        rating += u64::from(t.rating.is_some());
        price += u64::from(t.price.is_some());
        duration += u64::from(t.expected_time.is_some());
        distance += u64::from(t.distance.is_some());
    }
    let mut consumers_per_profile: BTreeMap<u8, u64> = (1..=13).map(|p| (p, 0)).collect();
    for c in consumers {
        *consumers_per_profile.entry(c.profile_no).or_default() += 1;
    }
    let frac = |k: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    GenerationStats {
        template_count: n,
        consumer_count: consumers.len() as u64,
        profile_shares: per_profile.iter().map(|(&p, &k)| (p, frac(k))).collect(),
        templates_per_profile: per_profile,
        consumers_per_profile,
        allocation_shortfall: shortfall.iter().copied().collect(),
        condition_marginals: ConditionMarginals {
            rating: frac(rating),
            price: frac(price),
            duration: frac(duration),
            distance: frac(distance),
        },
        modified_vehicles: consumers.iter().filter(|c| c.vehicle_modified).count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::PRINCES_BRIDGE;
    use crate::ingest::{fixture_bundle, PopularityProfile};

    fn single_cell_bundle() -> DatasetBundle {
        let mut b = fixture_bundle(1, 1, 3, 4, PRINCES_BRIDGE, 2000.0).unwrap();
        let mut rp = [[0u8; 24]; 7];
        rp[0][10] = 80;
        b.places = vec![PopularityProfile { rp, ..b.places[0].clone() }];
        b
    }

    #[test]
    fn single_cell_forcing() {
        let b = single_cell_bundle();
        let cfg = GenerationConfig { volume: QueryVolumeConfig::new(1.0, 1.0), ..Default::default() };
        let w = generate(&b, &cfg).unwrap();
        assert_eq!(w.templates.len(), 80);
        for t in &w.templates {
            assert_eq!((t.day, t.hour), (0, 10));
            assert_eq!(t.address, b.places[0].name);
            // one day only: nothing but the random profile can own these
            assert_eq!(t.profile_no, 13);
            t.validate().unwrap();
        }
    }

    #[test]
    fn ids_are_dense_and_unique() {
        let b = fixture_bundle(3, 2, 3, 5, PRINCES_BRIDGE, 2000.0).unwrap();
        let cfg = GenerationConfig { volume: QueryVolumeConfig::new(1.0, 1.0), ..Default::default() };
        let w = generate(&b, &cfg).unwrap();
        for (i, t) in w.templates.iter().enumerate() {
            assert_eq!(t.id, i as u64 + 1);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = GenerationConfig::default();
        c.volume.p_query = 1.3;
        match c.validate() {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "p_query"),
            other => panic!("{other:?}"),
        }
        let c = GenerationConfig {
            price_categories: PriceCategoryShares { locality: 0.3, ..Default::default() },
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_tracks_config() {
        let a = GenerationConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.origin_radius_m = 1999.0;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn rush_hour_sources() {
        let c = GenerationConfig::default();
        let m = c.rush_hours(None);
        assert!(m[7] && m[8] && m[16] && m[17]);
        assert!(!m[9] && !m[18] && !m[12]);
        let mut t = [[10u8; 24]; 7];
        for d in 0..5 {
            t[d][8] = 100;
            t[d][17] = 90;
        }
        let m = c.rush_hours(Some(&t));
        assert_eq!(m.iter().filter(|x| **x).count(), 2);
        assert!(m[8] && m[17]);
    }
}
