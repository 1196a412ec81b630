use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GenerationConfig;
use crate::ingest::VehicleSpec;
use crate::rng::{bernoulli, truncated_normal};

/// Maximum legal modification per dimension, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxModification {
    pub height_m: f64,
    pub length_m: f64,
    pub width_m: f64,
}

impl Default for MaxModification {
    fn default() -> Self {
        MaxModification {
            height_m: 0.30,
            length_m: 0.50,
            width_m: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleAssignment {
    pub vin: String,
    pub effective: VehicleSpec,
    pub modified: bool,
    /// Which of height, length, width received a delta.
    pub changed: [bool; 3],
}

/// Pick a catalog vehicle and possibly modify it.
///
/// A modified vehicle has each of height, length and width independently updated with
/// probability `per_param_mod_prob`, by a delta from a normal with mean `max/2` and sd
/// `max/4`, truncated to `[0, max]`.
pub fn assign_vehicle<R: Rng + ?Sized>(
    vehicles: &[VehicleSpec],
    config: &GenerationConfig,
    rng: &mut R,
) -> VehicleAssignment {
    let base = vehicles.choose(rng).expect("non-empty vehicle catalog");
    let mut effective = base.clone();
    let modified = bernoulli(rng, config.vehicle_mod_fraction);
    let mut changed = [false; 3];
    if modified {
        let max = config.max_mod;
        let dims: [(&mut f64, f64); 3] = [
            (&mut effective.height, max.height_m),
            (&mut effective.length, max.length_m),
            (&mut effective.width, max.width_m),
        ];
        for (i, (value, max)) in dims.into_iter().enumerate() {
            if bernoulli(rng, config.per_param_mod_prob) {
                let delta = truncated_normal(rng, max / 2.0, max / 4.0, 0.0, max);
                *value += delta;
                changed[i] = true;
            }
        }
    }
    VehicleAssignment {
        vin: base.vin.clone(),
        effective,
        modified,
        changed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn catalog() -> Vec<VehicleSpec> {
        vec![
            VehicleSpec { vin: "A".into(), height: 1.5, length: 4.2, width: 1.8 },
            VehicleSpec { vin: "B".into(), height: 1.9, length: 5.1, width: 1.9 },
        ]
    }

    #[test]
    fn no_modification_keeps_catalog_spec() {
        let cfg = GenerationConfig { vehicle_mod_fraction: 0.0, ..GenerationConfig::default() };
        let cat = catalog();
        let mut r = rng::stream(1, &[]);
        for _ in 0..1000 {
            let a = assign_vehicle(&cat, &cfg, &mut r);
            assert!(!a.modified);
            assert!(cat.contains(&a.effective));
        }
    }

    #[test]
    fn deltas_within_bounds() {
        let cfg = GenerationConfig { vehicle_mod_fraction: 1.0, per_param_mod_prob: 1.0, ..GenerationConfig::default() };
        let cat = catalog();
        let mut r = rng::stream(2, &[]);
        for _ in 0..10_000 {
            let a = assign_vehicle(&cat, &cfg, &mut r);
            let base = cat.iter().find(|v| v.vin == a.vin).unwrap();
            let dh = a.effective.height - base.height;
            let dl = a.effective.length - base.length;
            let dw = a.effective.width - base.width;
            assert!((0.0..=0.30 + 1e-12).contains(&dh));
            assert!((0.0..=0.50 + 1e-12).contains(&dl));
            assert!((0.0..=0.25 + 1e-12).contains(&dw));
        }
    }
}
