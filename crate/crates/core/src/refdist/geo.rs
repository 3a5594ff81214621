use serde::{Deserialize, Serialize};

use crate::corpus::LanguageMeta;
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoPoint {
    pub fn new(latitude: f64, longitude: f64) -> Self {
        GeoPoint { latitude, longitude }
    }
}

impl From<&LanguageMeta> for GeoPoint {
    fn from(m: &LanguageMeta) -> Self {
        GeoPoint::new(m.latitude, m.longitude)
    }
}

/// Great-circle distance on a spherical Earth (haversine formula).
pub fn haversine_km(p: GeoPoint, q: GeoPoint) -> f64 {
    let (phi1, phi2) = (p.latitude.to_radians(), q.latitude.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (q.longitude - p.longitude).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

pub fn geographic_distance_matrix(meta: &[LanguageMeta]) -> Result<DistanceMatrix> {
    if meta.len() < 2 {
        return Err(Error::TooFewLanguages("geographic matrix needs 2 languages".into()));
    }
    let pts: Vec<GeoPoint> = meta.iter().map(GeoPoint::from).collect();
    let labels = meta.iter().map(|m| m.iso.clone()).collect();
    DistanceMatrix::from_fn(labels, DistanceKind::Geographic, |i, j| haversine_km(pts[i], pts[j]))
}
