//! Planted split systems and the metrics they induce.

use std::collections::BTreeMap;

use glem_core::distance::{DistanceKind, DistanceMatrix};
use glem_core::phylo::SplitSystem;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i:02}")).collect()
}

/// Side of a bipartition not containing taxon 0, as a sorted list.
pub fn normalise(side: &[usize], n: usize) -> Vec<usize> {
    let mut s = if side.contains(&0) { (0..n).filter(|t| !side.contains(t)).collect() } else { side.to_vec() };
    s.sort_unstable();
    s
}

pub fn metric_of(n: usize, splits: &BTreeMap<Vec<usize>, f64>) -> DistanceMatrix {
    DistanceMatrix::from_fn(labels(n), DistanceKind::Embedding, |a, b| {
        splits.iter().filter(|(s, _)| s.contains(&a) != s.contains(&b)).map(|(_, w)| w).sum()
    })
    .unwrap()
}

pub fn recovered(s: &SplitSystem) -> BTreeMap<Vec<usize>, f64> {
    let n = s.taxa.len();
    s.splits.iter().map(|x| (normalise(&x.side, n), x.weight)).collect()
}

/// Random circular split system: all trivial splits plus each non-trivial
/// circular split with probability 1/2, over a random cycle.
pub fn random_circular(rng: &mut ChaCha8Rng, n: usize) -> BTreeMap<Vec<usize>, f64> {
    let mut cycle: Vec<usize> = (0..n).collect();
    cycle.shuffle(rng);
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let size = j - i;
            if size == 1 || size == n - 1 || rng.random_bool(0.5) {
                let side: Vec<usize> = cycle[i + 1..=j].to_vec();
                out.insert(normalise(&side, n), rng.random_range(0.1..1.0));
            }
        }
    }
    out
}

/// Random binary tree splits with positive edge weights.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> BTreeMap<Vec<usize>, f64> {
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut out = BTreeMap::new();
    while clusters.len() > 1 {
        for c in &clusters {
            if c.len() < n - 1 || n <= 2 {
                out.entry(normalise(c, n)).or_insert_with(|| rng.random_range(0.1..1.0));
            }
        }
        let a = rng.random_range(0..clusters.len());
        let x = clusters.swap_remove(a);
        let b = rng.random_range(0..clusters.len());
        let y = clusters.swap_remove(b);
        clusters.push([x, y].concat());
    }
    // Keep only splits that are proper bipartitions.
    out.retain(|s, _| !s.is_empty() && s.len() < n);
    out
}
