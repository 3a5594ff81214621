use serde_json::{json, Value};

use crate::corpus::{LanguageMeta, LanguageTable};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MapEdge {
    pub l1: String,
    pub l2: String,
    pub distance: f64,
    /// `1 − distance / threshold`.
    pub weight: f64,
    /// Shared family name, else `cross-family`.
    pub family: String,
}

/// Nearest-rank quantile: the `ceil(p·N)`-th smallest value (at least the first).
pub fn nearest_rank_threshold(values: &[f64], percentile: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((percentile * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Some(v[k - 1])
}

/// All pairs at distance ≤ the nearest-rank `percentile` quantile, in
/// matrix pair order.
pub fn map_edges(m: &DistanceMatrix, meta: &LanguageTable, percentile: f64) -> Result<Vec<MapEdge>> {
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::InvalidArgument(format!("percentile {percentile} outside (0, 1)")));
    }
    let rows: Vec<&LanguageMeta> = m.labels().iter().map(|l| meta.require(l)).collect::<Result<_>>()?;
    let Some(threshold) = nearest_rank_threshold(m.values(), percentile) else {
        return Ok(Vec::new());
    };
    Ok(m.pairs()
        .filter(|&(_, _, d)| d <= threshold)
        .map(|(i, j, d)| MapEdge {
            l1: rows[i].iso.clone(),
            l2: rows[j].iso.clone(),
            distance: d,
            weight: if threshold > 0.0 { 1.0 - d / threshold } else { 1.0 },
            family: if rows[i].family == rows[j].family { rows[i].family.clone() } else { "cross-family".into() },
        })
        .collect())
}

/// GeoJSON FeatureCollection: one LineString per edge (coordinates in
/// lon, lat order) and one Point per language without an edge.
pub fn emit_map_edges(m: &DistanceMatrix, meta: &LanguageTable, percentile: f64) -> Result<Value> {
    let edges = map_edges(m, meta, percentile)?;
    let coord = |iso: &str| {
        let r = meta.get(iso).expect("checked by map_edges");
        json!([r.longitude, r.latitude])
    };
    let mut features: Vec<Value> = edges
        .iter()
        .map(|e| {
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": [coord(&e.l1), coord(&e.l2)]},
                "properties": {
                    "source": e.l1, "target": e.l2, "distance": e.distance,
                    "weight": e.weight, "family": e.family,
                },
            })
        })
        .collect();
    for l in m.labels() {
        if !edges.iter().any(|e| &e.l1 == l || &e.l2 == l) {
            let r = meta.require(l)?;
            features.push(json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": coord(l)},
                "properties": {"iso": l, "name": r.name, "family": r.family, "isolated": true},
            }));
        }
    }
    Ok(json!({"type": "FeatureCollection", "features": features}))
}
