use serde::{Deserialize, Serialize};

use super::correlation::pearson;
use super::pairs::build_pair_table;
use super::regression::{fit_model, ModelSpec};
use crate::corpus::{EmbeddingSet, LanguageTable};
use crate::distance::DistanceMatrix;
use crate::embedspace::{cosine_distance_matrix, language_centroids, project, Projection};
use crate::error::{Error, Result};
use crate::par;

/// Correlations of one embedding matrix against the reference distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceCorrelations {
    pub r_geographic: f64,
    pub r_lexical: f64,
    /// `sqrt(max(adjusted R², 0))` of the interaction model.
    pub model_correlation: f64,
}

pub fn distance_correlations(
    emb: &DistanceMatrix,
    lex: &DistanceMatrix,
    geo: &DistanceMatrix,
    meta: &LanguageTable,
    spec: &ModelSpec,
) -> Result<DistanceCorrelations> {
    let table = build_pair_table(emb, Some(lex), geo, meta)?;
    let r_geographic = pearson(&table.embedding(), &table.geographic())?;
    let (e, l): (Vec<f64>, Vec<f64>) = table.with_lexical().map(|(_, r)| (r.embedding, r.lexical.unwrap())).unzip();
    let r_lexical = pearson(&e, &l)?;
    let model_correlation = fit_model(&table, spec)?.model_correlation();
    Ok(DistanceCorrelations { r_geographic, r_lexical, model_correlation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    #[serde(flatten)]
    pub correlations: DistanceCorrelations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCurve {
    /// Strictly increasing in `n`.
    pub points: Vec<CurvePoint>,
    /// Model correlation of the unprojected embedding distances.
    pub baseline_model_correlation: f64,
}

/// Correlations of cosine distances over the leading `n` discriminants for
/// each `n` in `n_range`. `set` is the unprojected corpus `proj` was fit on.
pub fn cumulative_dimension_curve(
    set: &EmbeddingSet,
    proj: &Projection,
    lex: &DistanceMatrix,
    geo: &DistanceMatrix,
    meta: &LanguageTable,
    n_range: &[usize],
    spec: &ModelSpec,
) -> Result<CumulativeCurve> {
    let mut ns = n_range.to_vec();
    ns.sort_unstable();
    ns.dedup();
    match (ns.first(), ns.last()) {
        (Some(&lo), Some(&hi)) if lo >= 2 && hi <= proj.output_dim() => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "dimension range must be non-empty within 2..={}",
                proj.output_dim()
            )))
        }
    }
    let centroids = language_centroids(&project(set, proj)?)?;
    let points = par::map_slice(&ns, |&n| {
        let m = cosine_distance_matrix(&centroids, n)?;
        Ok(CurvePoint { n, correlations: distance_correlations(&m, lex, geo, meta, spec)? })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let raw = language_centroids(set)?;
    let raw_m = cosine_distance_matrix(&raw, set.dim())?;
    let baseline_model_correlation = distance_correlations(&raw_m, lex, geo, meta, spec)?.model_correlation;
    Ok(CumulativeCurve { points, baseline_model_correlation })
}
