use rand::Rng;

use crate::geo::{self, GeoPoint};

/// Independent uniform `(minute, second)` stamps within one hour.
///
/// Conditioned on the hourly count, this is the arrival pattern of a Poisson process with
/// that hourly rate.
pub fn assign_execution_time<R: Rng + ?Sized>(count: u64, rng: &mut R) -> Vec<(u8, u8)> {
    (0..count)
        .map(|_| {
            let s: u16 = rng.random_range(0..3600);
            ((s / 60) as u8, (s % 60) as u8)
        })
        .collect()
}

/// Uniform origin within `radius_m` of `center`; a non-positive radius yields the center.
pub fn sample_origin<R: Rng + ?Sized>(center: GeoPoint, radius_m: f64, rng: &mut R) -> GeoPoint {
    geo::sample_in_disk(center, radius_m.max(0.0), rng)
}
