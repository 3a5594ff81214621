use std::collections::BTreeMap;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::consensus::{consensus, ConsensusTree};
use super::tree::{upgma, Dendrogram};
use crate::corpus::EmbeddingSet;
use crate::distance::DistanceMatrix;
use crate::embedspace::{lda_language_distances, LdaOptions};
use crate::error::{Error, Result};
use crate::stats::{mean_std, pearson};
use crate::{par, rng};

/// Salt separating replicate draws from other seeded streams.
const REPLICATE_SALT: u64 = 0x7265_706c;

/// Per language, `needed` distinct row indices in seeded random order.
/// Languages with fewer rows are returned separately.
fn disjoint_draws(set: &EmbeddingSet, needed: usize, seed: u64) -> (BTreeMap<String, Vec<usize>>, Vec<String>) {
    let mut draws = BTreeMap::new();
    let mut excluded = Vec::new();
    for (lang, rows) in set.language_groups() {
        if rows.len() < needed {
            excluded.push(lang.to_string());
            continue;
        }
        let mut r = rng::stream(seed, lang, REPLICATE_SALT);
        let picked = index::sample(&mut r, rows.len(), needed).into_vec();
        draws.insert(lang.to_string(), picked.into_iter().map(|k| rows[k]).collect());
    }
    (draws, excluded)
}

/// Rows of replicate `r` with `n` samples per language, ascending.
fn replicate_rows(draws: &BTreeMap<String, Vec<usize>>, n: usize, r: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = draws.values().flat_map(|v| v[r * n..(r + 1) * n].iter().copied()).collect();
    rows.sort_unstable();
    rows
}

fn language_matrix(set: &EmbeddingSet, rows: &[usize], opts: LdaOptions) -> Result<DistanceMatrix> {
    Ok(lda_language_distances(&set.select(rows), opts)?.2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCurve {
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub languages: Vec<String>,
    /// Languages with fewer than `max(sizes) × replicates` samples.
    pub excluded: Vec<String>,
    /// `per_language[l][k]`: mean pairwise replicate correlation of
    /// language `l`'s distance vector at `sizes[k]`.
    pub per_language: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across languages.
    pub std: Vec<f64>,
}

/// Mean Pearson correlation over all pairs of replicate vectors.
pub fn replicate_correlation(vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicate vectors".into()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            sum += pearson(&vectors[a], &vectors[b])?;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

fn distance_vector(m: &DistanceMatrix, i: usize) -> Vec<f64> {
    (0..m.len()).filter(|&j| j != i).map(|j| m.get(i, j)).collect()
}

/// For each size `n`, draws `replicates` disjoint sets of `n` utterances
/// per language, refits LDA on each and correlates each language's
/// distance vector across replicates.
pub fn robustness_experiment(
    set: &EmbeddingSet,
    sizes: &[usize],
    replicates: usize,
    seed: u64,
    opts: LdaOptions,
) -> Result<RobustnessCurve> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if replicates < 2 || sizes.is_empty() || sizes[0] < 2 {
        return Err(Error::InvalidArgument("need >= 2 replicates and sizes >= 2".into()));
    }
    let (draws, excluded) = disjoint_draws(set, sizes[sizes.len() - 1] * replicates, seed);
    if draws.len() < 4 {
        return Err(Error::InsufficientSamples(format!(
            "{} language(s) have {} samples; need 4",
            draws.len(),
            sizes[sizes.len() - 1] * replicates
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..sizes.len()).flat_map(|k| (0..replicates).map(move |r| (k, r))).collect();
    let matrices = par::map_slice(&jobs, |&(k, r)| language_matrix(set, &replicate_rows(&draws, sizes[k], r), opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let languages: Vec<String> = draws.keys().cloned().collect();
    let mut per_language = vec![vec![0.0; sizes.len()]; languages.len()];
    for k in 0..sizes.len() {
        let reps = &matrices[k * replicates..(k + 1) * replicates];
        for (l, row) in per_language.iter_mut().enumerate() {
            let vectors: Vec<Vec<f64>> = reps.iter().map(|m| distance_vector(m, l)).collect();
            row[k] = replicate_correlation(&vectors)?;
        }
    }
    let (mut mean, mut std) = (Vec::new(), Vec::new());
    for k in 0..sizes.len() {
        let col: Vec<f64> = per_language.iter().map(|r| r[k]).collect();
        let (m, s) = mean_std(&col);
        mean.push(m);
        std.push(s);
    }
    Ok(RobustnessCurve { sizes, replicates, languages, excluded, per_language, mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusExperiment {
    pub consensus: ConsensusTree,
    pub trees: Vec<Dendrogram>,
    pub excluded: Vec<String>,
}

/// UPGMA trees from `n_trees` disjoint subsamples of `n_per_language`
/// utterances (LDA refit each time), scored against the full-data tree.
pub fn consensus_experiment(
    set: &EmbeddingSet,
    n_per_language: usize,
    n_trees: usize,
    seed: u64,
    opts: LdaOptions,
) -> Result<ConsensusExperiment> {
    if n_trees == 0 || n_per_language < 2 {
        return Err(Error::InvalidArgument("need n_trees >= 1 and n_per_language >= 2".into()));
    }
    let (draws, excluded) = disjoint_draws(set, n_per_language * n_trees, seed);
    if draws.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{} language(s) have {} samples; need 2",
            draws.len(),
            n_per_language * n_trees
        )));
    }
    let mut eligible: Vec<usize> = Vec::new();
    for (lang, rows) in set.language_groups() {
        if draws.contains_key(lang) {
            eligible.extend(rows);
        }
    }
    eligible.sort_unstable();
    let reference = upgma(&language_matrix(set, &eligible, opts)?)?;
    let trees = par::map_range(n_trees, |t| upgma(&language_matrix(set, &replicate_rows(&draws, n_per_language, t), opts)?))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsensusExperiment { consensus: consensus(&trees, &reference)?, trees, excluded })
}
