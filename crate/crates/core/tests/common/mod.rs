#![allow(dead_code)]

use glem_core::corpus::{EmbeddingSet, UtteranceRecord};
use glem_core::{DistanceKind, DistanceMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Gaussian classes: `means[c]` plus unit noise scaled by `sd`, `per_class`
/// rows each, language codes `c00`, `c01`, ...
pub fn gaussian_classes(r: &mut ChaCha8Rng, means: &[Vec<f64>], per_class: usize, sd: f64) -> EmbeddingSet {
    let dim = means[0].len();
    let mut recs = Vec::new();
    let mut data = Vec::new();
    for (c, m) in means.iter().enumerate() {
        for k in 0..per_class {
            recs.push(UtteranceRecord::new(format!("u{c}_{k}"), format!("c{c:02}")));
            data.extend(m.iter().map(|&mu| (mu + sd * normal(r)) as f32));
        }
    }
    EmbeddingSet::new(recs, dim, data).unwrap()
}

pub fn random_means(r: &mut ChaCha8Rng, k: usize, dim: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..k).map(|_| (0..dim).map(|_| spread * normal(r)).collect()).collect()
}

/// Symmetric random matrix with labels `l00`, `l01`, ... and entries in (0, 1].
pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let labels = (0..n).map(|i| format!("l{i:02}")).collect();
    let values = (0..n * (n - 1) / 2).map(|_| r.random_range(0.01..1.0)).collect();
    DistanceMatrix::new(labels, values, DistanceKind::Embedding).unwrap()
}

pub fn column_variance(rows: &[Vec<f64>], c: usize) -> f64 {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
    rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

pub fn set_rows(set: &EmbeddingSet) -> Vec<Vec<f64>> {
    (0..set.len()).map(|i| set.row(i).iter().map(|&v| v as f64).collect()).collect()
}
pub mod oracle;
pub mod planted;
pub mod splits;

/// Random word lists over the first `meanings` inventory items: forms of
/// 1..=6 segments from a 6-letter alphabet, a second synonym with
/// probability `synonym_rate`, each meaning kept with probability 0.9.
pub fn random_wordlists(r: &mut ChaCha8Rng, langs: &[String], meanings: usize, synonym_rate: f64) -> glem_core::corpus::WordList {
    let alphabet = ['p', 't', 'k', 'a', 'i', 'u'];
    let form = |r: &mut ChaCha8Rng| -> Vec<char> {
        (0..r.random_range(1..=6)).map(|_| alphabet[r.random_range(0..alphabet.len())]).collect()
    };
    let mut wl = glem_core::corpus::WordList::new();
    for l in langs {
        for &m in &glem_core::corpus::ASJP_MEANINGS[..meanings] {
            if r.random_bool(0.9) {
                wl.push(l, m, form(r));
                if r.random_bool(synonym_rate) {
                    wl.push(l, m, form(r));
                }
            }
        }
    }
    wl
}
