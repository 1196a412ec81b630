//! Preference conditions: distance, expected parking time, price and rating.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Consumer, GenerationConfig, TemplateRecord};
use crate::ingest::{DatasetBundle, PopularityProfile};
use crate::rng::{self, bernoulli, truncated_normal};
use crate::stats::DistanceSpanTable;

pub const RATING_CHOICES: [f64; 5] = [2.5, 3.0, 3.5, 4.0, 4.5];

/// Static distance preferences are expressed at this scale (the dominant mean of the
/// 05:00-10:00 span) and rescaled to the mean of whichever group they are applied to.
pub const STATIC_PREF_REFERENCE_M: f64 = 137.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceGroup {
    Dominant,
    NonDominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceFactor {
    StaticPreference,
    Crowdedness,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceCategory {
    ExpectedTime,
    RandomNormal,
    Locality,
    TimeOfDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionProbabilities {
    pub rating: f64,
    pub price: f64,
    pub duration: f64,
}

impl Default for ConditionProbabilities {
    fn default() -> Self {
        ConditionProbabilities {
            rating: 0.5003,
            price: 0.8004,
            duration: 0.2003,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceCategoryShares {
    pub cat1_expected_time: f64,
    pub random_normal: f64,
    pub locality: f64,
    pub time_of_day: f64,
}

impl Default for PriceCategoryShares {
    fn default() -> Self {
        PriceCategoryShares {
            cat1_expected_time: 0.16,
            random_normal: 0.64,
            locality: 0.10,
            time_of_day: 0.10,
        }
    }
}

impl PriceCategoryShares {
    pub fn as_array(&self) -> [f64; 4] {
        [self.cat1_expected_time, self.random_normal, self.locality, self.time_of_day]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceDistribution {
    pub mean: f64,
    pub sd: f64,
}

impl Default for PriceDistribution {
    fn default() -> Self {
        PriceDistribution { mean: 15.0, sd: 5.0 }
    }
}

/// Seeded rate lookups used by the locality and time-of-day price categories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceTables {
    /// Hourly rate per destination, indexed like `bundle.places`.
    pub hourly_rate: Vec<f64>,
    /// Fixed price per destination: hourly rate times the place's mean stay.
    pub locality_price: Vec<f64>,
    /// Fixed price per distance span.
    pub span_price: Vec<f64>,
}

impl PriceTables {
    pub fn build(bundle: &DatasetBundle, spans: &DistanceSpanTable, config: &GenerationConfig) -> Self {
        let mut r = rng::stream(config.seed, &[rng::tag("price.tables")]);
        let (lo, hi) = config.locality_rate_range;
        let hourly_rate: Vec<f64> = bundle
            .places
            .iter()
            .map(|_| round2(if hi > lo { r.random_range(lo..hi) } else { lo }))
            .collect();
        let locality_price = bundle
            .places
            .iter()
            .zip(&hourly_rate)
            .map(|(p, rate)| round2(rate * (p.min_time + p.max_time) / 120.0))
            .collect();
        let span_price = spans
            .spans
            .iter()
            .map(|_| round2(config.onstreet_price.mean * r.random_range(0.6..1.4)))
            .collect();
        PriceTables {
            hourly_rate,
            locality_price,
            span_price,
        }
    }
}

/// Everything condition attachment needs beyond the template and its consumer.
#[derive(Debug, Clone)]
pub struct ConditionContext {
    pub spans: DistanceSpanTable,
    pub prices: PriceTables,
    /// Mean crowdedness multiplier per span over the template set, so the crowdedness
    /// factor keeps each group's mean on target.
    pub crowd_norm: Vec<f64>,
}

/// Raw crowdedness multiplier: linear from 1.0 at RP 0 down to 0.5 at RP 100.
pub fn crowd_multiplier(rp: u8) -> f64 {
    1.0 - 0.5 * f64::from(rp.min(100)) / 100.0
}

/// Cat-1 price: expected stay in hours times the destination's hourly rate.
pub fn cat1_price(expected_minutes: f64, hourly_rate: f64) -> f64 {
    round2(expected_minutes / 60.0 * hourly_rate)
}

pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn draw_expected_time<R: Rng + ?Sized>(place: &PopularityProfile, rng: &mut R) -> f64 {
    let mean = (place.min_time + place.max_time) / 2.0;
    let sd = (place.max_time - place.min_time) / 4.0;
    round1(truncated_normal(rng, mean, sd, 1.0, f64::INFINITY))
}

/// Result of condition attachment beyond what lands in the record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionTrace {
    pub distance_factor: Option<DistanceFactor>,
}

/// Fill the nullable preference fields of `template`.
///
/// Draw order is fixed so a template's conditions depend only on its own stream.
pub fn attach_conditions<R: Rng + ?Sized>(
    template: &mut TemplateRecord,
    consumer: &Consumer,
    place_index: usize,
    place: &PopularityProfile,
    ctx: &ConditionContext,
    config: &GenerationConfig,
    rng: &mut R,
) -> ConditionTrace {
    let has_rating = bernoulli(rng, config.cond_probs.rating);
    let has_price = bernoulli(rng, config.cond_probs.price);
    let has_duration = bernoulli(rng, config.cond_probs.duration);

    let sod = u32::from(template.hour) * 3600 + u32::from(template.minute) * 60 + u32::from(template.second);
    let span_idx = ctx.spans.span_index(sod);
    let (lo, hi) = config.distance_bounds;

    // distance
    let u: f64 = rng.random();
    let mut trace = ConditionTrace { distance_factor: None };
    template.distance = None;
    template.distance_group = None;
    if let Some(si) = span_idx {
        let span = &ctx.spans.spans[si];
        let group = if u < span.p_dominant {
            Some((DistanceGroup::Dominant, span.mu_dominant_m))
        } else if u < span.p_dominant + span.p_nondominant {
            Some((DistanceGroup::NonDominant, span.mu_nondominant_m))
        } else {
            None
        };
        if let Some((group, mu)) = group {
            let factors = [DistanceFactor::StaticPreference, DistanceFactor::Crowdedness, DistanceFactor::Random];
            let pick: f64 = rng.random();
            let w = config.distance_factor_probs;
            let factor = if pick < w[0] {
                factors[0]
            } else if pick < w[0] + w[1] {
                factors[1]
            } else {
                factors[2]
            };
            let value = match (factor, consumer.static_distance_pref) {
                (DistanceFactor::StaticPreference, Some(pref)) => {
                    (pref * mu / STATIC_PREF_REFERENCE_M).clamp(lo, hi)
                }
                (DistanceFactor::Crowdedness, _) => {
                    let rp = place.rp[template.day as usize][template.hour as usize];
                    let norm = ctx.crowd_norm.get(si).copied().filter(|n| *n > 0.0).unwrap_or(1.0);
                    let m = mu * crowd_multiplier(rp) / norm;
                    truncated_normal(rng, m, m / 4.0, lo, hi)
                }
                _ => truncated_normal(rng, mu, mu / 4.0, lo, hi),
            };
            template.distance = Some(round1(value));
            template.distance_group = Some(group);
            trace.distance_factor = Some(factor);
        }
    }

    // expected time
    template.expected_time = if has_duration {
        Some(draw_expected_time(place, rng))
    } else {
        None
    };

    // price
    template.price = None;
    template.price_category = None;
    if has_price {
        let shares = config.price_categories.as_array();
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        let mut cat = 3;
        for (i, s) in shares.iter().enumerate() {
            acc += s;
            if pick < acc {
                cat = i;
                break;
            }
        }
        let (category, price) = match cat {
            0 => {
                let minutes = match template.expected_time {
                    Some(m) => m,
                    None => draw_expected_time(place, rng),
                };
                (PriceCategory::ExpectedTime, cat1_price(minutes, ctx.prices.hourly_rate[place_index]))
            }
            1 => {
                let p = config.onstreet_price;
                (PriceCategory::RandomNormal, round2(truncated_normal(rng, p.mean, p.sd, 0.0, f64::INFINITY)))
            }
            2 => (PriceCategory::Locality, ctx.prices.locality_price[place_index]),
            _ => (
                PriceCategory::TimeOfDay,
                span_idx
                    .and_then(|i| ctx.prices.span_price.get(i).copied())
                    .unwrap_or(config.onstreet_price.mean),
            ),
        };
        template.price = Some(price);
        template.price_category = Some(category);
    }

    template.rating = if has_rating {
        Some(*RATING_CHOICES.choose(rng).unwrap())
    } else {
        None
    };
    trace
}
