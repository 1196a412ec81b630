//! Geographic primitives: points, haversine distance and uniform disk sampling.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Meters per degree of latitude under the local equirectangular approximation.
const METERS_PER_DEG_LAT: f64 = EARTH_RADIUS_M * PI / 180.0;

/// Princes Bridge, Melbourne. Default origin-sampling center.
pub const PRINCES_BRIDGE: GeoPoint = GeoPoint {
    lat: -37.8183,
    lng: 144.9671,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lng: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lng: f64) -> Result<Self> {
        let p = GeoPoint { lat, lng };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) || self.lat.is_nan() {
            return Err(Error::domain("lat", format!("{} not in [-90, 90]", self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.lng) || self.lng.is_nan() {
            return Err(Error::domain("lng", format!("{} not in [-180, 180]", self.lng)));
        }
        Ok(())
    }

    pub fn distance_to(&self, other: &GeoPoint) -> f64 {
        haversine(*self, *other)
    }
}

/// Great-circle distance in meters.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlng = (b.lng - a.lng).to_radians();

    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlng / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Uniform point in a disk of `radius_m` around `center`.
///
/// The planar offset is `r = radius * sqrt(u)`, `theta = 2 pi u'`, mapped back to degrees
/// with the local equirectangular approximation. The equirectangular offset slightly
/// overestimates the great-circle distance for small radii, so the offset is scaled down
/// in the rare case the haversine check would otherwise land a hair outside the disk.
pub fn sample_in_disk<R: Rng + ?Sized>(center: GeoPoint, radius_m: f64, rng: &mut R) -> GeoPoint {
    let u: f64 = rng.random();
    let theta = 2.0 * PI * rng.random::<f64>();
    if radius_m <= 0.0 {
        return center;
    }
    let r = radius_m * u.sqrt();
    let mut p = offset(center, r * theta.cos(), r * theta.sin());
    let mut d = haversine(center, p);
    while d > radius_m {
        let shrink = radius_m / d * (1.0 - 1e-12);
        p = offset(center, r * shrink * theta.cos(), r * shrink * theta.sin());
        d = haversine(center, p);
    }
    p
}

/// Shift `center` by `north_m` / `east_m` meters.
pub fn offset(center: GeoPoint, north_m: f64, east_m: f64) -> GeoPoint {
    let meters_per_deg_lng = METERS_PER_DEG_LAT * center.lat.to_radians().cos();
    GeoPoint {
        lat: center.lat + north_m / METERS_PER_DEG_LAT,
        lng: center.lng + east_m / meters_per_deg_lng,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haversine_zero_and_symmetry() {
        let a = PRINCES_BRIDGE;
        let b = GeoPoint { lat: -37.8136, lng: 144.9631 };
        assert_eq!(haversine(a, a), 0.0);
        assert!((haversine(a, b) - haversine(b, a)).abs() < 1e-9);
    }

    #[test]
    fn haversine_one_degree_of_latitude() {
        let a = GeoPoint { lat: 0.0, lng: 0.0 };
        let b = GeoPoint { lat: 1.0, lng: 0.0 };
        assert!((haversine(a, b) - METERS_PER_DEG_LAT).abs() < 1e-6);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(-37.0, 144.0).is_ok());
    }

    #[test]
    fn zero_radius_is_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_in_disk(PRINCES_BRIDGE, 0.0, &mut rng), PRINCES_BRIDGE);
    }

    #[test]
    fn disk_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let p = sample_in_disk(PRINCES_BRIDGE, 2000.0, &mut rng);
            assert!(haversine(PRINCES_BRIDGE, p) <= 2000.0);
        }
    }
}
