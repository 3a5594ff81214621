use serde::{Deserialize, Serialize};

use super::projection::{project_rows, Projection};
use crate::corpus::{EmbeddingSet, Gender};
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::stats::{ks_two_sample, KsResult};

/// A language represented by the centroid of its utterance embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageEmbedding {
    pub iso: String,
    pub vector: Vec<f64>,
    pub sample_count: usize,
}

/// One centroid per language, in ascending ISO order.
pub fn language_centroids(set: &EmbeddingSet) -> Result<Vec<LanguageEmbedding>> {
    if set.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(set
        .language_groups()
        .into_iter()
        .map(|(iso, rows)| {
            let mut vector = vec![0.0; set.dim()];
            for &i in &rows {
                vector.iter_mut().zip(set.row(i)).for_each(|(a, &v)| *a += v as f64);
            }
            let n = rows.len() as f64;
            vector.iter_mut().for_each(|a| *a /= n);
            LanguageEmbedding { iso: iso.to_string(), vector, sample_count: rows.len() }
        })
        .collect())
}

/// Cosine distances `1 − u·v` between the L2-normalised leading
/// `dims_used` coordinates of each embedding. Normalisation follows
/// truncation.
pub fn cosine_distance_matrix(embs: &[LanguageEmbedding], dims_used: usize) -> Result<DistanceMatrix> {
    if let Some(e) = embs.iter().find(|e| dims_used < 2 || dims_used > e.vector.len()) {
        return Err(Error::InvalidArgument(format!(
            "dims_used {dims_used} outside 2..={} for {}",
            e.vector.len(),
            e.iso
        )));
    }
    let units: Vec<Vec<f64>> = embs
        .iter()
        .map(|e| {
            let v = &e.vector[..dims_used];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                Ok(v.iter().map(|x| x / norm).collect())
            } else {
                Err(Error::ZeroVector(e.iso.clone()))
            }
        })
        .collect::<Result<_>>()?;
    let labels = embs.iter().map(|e| e.iso.clone()).collect();
    DistanceMatrix::from_fn(labels, DistanceKind::Embedding, |i, j| {
        let dot: f64 = units[i].iter().zip(&units[j]).map(|(a, b)| a * b).sum();
        (1.0 - dot).clamp(0.0, 2.0)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborProfile {
    pub iso: String,
    /// Mean distance to the k nearest other languages, one entry per k.
    pub means: Vec<f64>,
}

/// Mean distance of each language to its k nearest neighbours for every k
/// in `ks`. Neighbours are ranked by distance then label; the output is
/// ordered by nearest-neighbour distance, then label.
pub fn neighbor_profile(m: &DistanceMatrix, ks: &[usize]) -> Result<Vec<NeighborProfile>> {
    let n = m.len();
    if n < 2 {
        return Err(Error::TooFewLanguages("neighbour profile needs 2 languages".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n - 1) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={}", n - 1)));
    }
    let mut rows: Vec<(f64, NeighborProfile)> = (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (m.get(i, j), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut prefix = Vec::with_capacity(d.len() + 1);
            prefix.push(0.0);
            for (v, _) in &d {
                prefix.push(prefix.last().unwrap() + v);
            }
            let means = ks.iter().map(|&k| prefix[k] / k as f64).collect();
            (d[0].0, NeighborProfile { iso: m.labels()[i].clone(), means })
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.iso.cmp(&b.1.iso)));
    Ok(rows.into_iter().map(|(_, p)| p).collect())
}

/// Two-sample KS test between male and female utterances on each of the
/// first `n_components` projected coordinates.
pub fn gender_component_test(set: &EmbeddingSet, proj: &Projection, n_components: usize) -> Result<Vec<KsResult>> {
    let k = proj.output_dim();
    if n_components == 0 || n_components > k {
        return Err(Error::InvalidArgument(format!("n_components must be in 1..={k}")));
    }
    let coords = project_rows(set, proj)?;
    let genders: Vec<Option<Gender>> = set.records().iter().map(|r| r.gender).collect();
    let pick = |g: Gender, c: usize| -> Vec<f64> {
        (0..set.len()).filter(|&i| genders[i] == Some(g)).map(|i| coords[i * k + c]).collect()
    };
    if !genders.contains(&Some(Gender::Male)) {
        return Err(Error::MissingGroup("male"));
    }
    if !genders.contains(&Some(Gender::Female)) {
        return Err(Error::MissingGroup("female"));
    }
    Ok((0..n_components).map(|c| ks_two_sample(&pick(Gender::Male, c), &pick(Gender::Female, c))).collect())
}
