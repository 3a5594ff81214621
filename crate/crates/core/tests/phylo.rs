mod common;

use std::collections::BTreeMap;

use glem_core::distance::{DistanceKind, DistanceMatrix};
use glem_core::phylo::{
    consensus, cophenetic, neighbor_net, replicate_correlation, upgma, Dendrogram, Merge,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::splits::*;

#[test]
fn neighbor_net_recovers_circular_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let n = 5 + trial % 4;
        let planted = random_circular(&mut rng, n);
        let got = recovered(&neighbor_net(&metric_of(n, &planted)).unwrap());
        assert_eq!(got.keys().collect::<Vec<_>>(), planted.keys().collect::<Vec<_>>(), "trial {trial}");
        for (s, w) in &planted {
            assert!((got[s] - w).abs() < 1e-6, "trial {trial} split {s:?}");
        }
    }
}

#[test]
fn neighbor_net_recovers_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let n = 4 + trial % 5;
        let planted = random_tree(&mut rng, n);
        let net = neighbor_net(&metric_of(n, &planted)).unwrap();
        assert!(net.is_compatible(), "trial {trial}");
        let got = recovered(&net);
        assert_eq!(got.keys().collect::<Vec<_>>(), planted.keys().collect::<Vec<_>>(), "trial {trial}");
    }
}

#[test]
fn four_taxon_tree_has_no_box() {
    // ((a,b),(c,d)) with internal edge 1.
    let mut planted = BTreeMap::new();
    for t in 1..4 {
        planted.insert(vec![t], 0.5);
    }
    planted.insert(vec![1, 2, 3], 0.5);
    planted.insert(vec![2, 3], 1.0);
    let net = neighbor_net(&metric_of(4, &planted)).unwrap();
    assert_eq!(net.splits.len(), 5);
    assert!(net.is_compatible());
}

#[test]
fn consensus_counts() {
    let t = |merges: Vec<Merge>| Dendrogram { labels: labels(3), merges };
    let ab = t(vec![Merge { left: 0, right: 1, height: 1.0, size: 2 }, Merge { left: 3, right: 2, height: 2.0, size: 3 }]);
    let bc = t(vec![Merge { left: 1, right: 2, height: 1.0, size: 2 }, Merge { left: 0, right: 3, height: 2.0, size: 3 }]);
    let c = consensus(&[ab.clone(), ab.clone(), bc.clone()], &ab).unwrap();
    assert!((c.support[0] - 66.7).abs() < 0.1);
    assert_eq!(c.support[1], 100.0);
    let all = consensus(&vec![ab.clone(); 20], &ab).unwrap();
    assert!(all.support.iter().all(|&s| s == 100.0));
    let other = Dendrogram { labels: vec!["x".into(), "y".into(), "z".into()], merges: ab.merges.clone() };
    assert!(consensus(&[other], &ab).is_err());
}

#[test]
fn identical_replicates_correlate_perfectly() {
    let v = vec![0.1, 0.5, 0.3, 0.9];
    assert_eq!(replicate_correlation(&[v.clone(), v.clone(), v]).unwrap(), 1.0);
}

fn matrix_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (3usize..9).prop_flat_map(|n| (Just(n), prop::collection::vec(0.01f64..10.0, n * (n - 1) / 2)))
}

fn residual(a: &DistanceMatrix, b: &DistanceMatrix) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upgma_is_ultrametric((n, v) in matrix_strategy()) {
        let m = DistanceMatrix::new(labels(n), v, DistanceKind::Embedding).unwrap();
        let t = upgma(&m).unwrap();
        prop_assert_eq!(t.merges.len(), n - 1);
        for (k, mg) in t.merges.iter().enumerate() {
            for c in [mg.left, mg.right] {
                if c >= n {
                    prop_assert!(t.merges[c - n].height <= mg.height);
                }
            }
            prop_assert!(mg.left < n + k && mg.right < n + k);
        }
        let c = cophenetic(&t).unwrap();
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    if a != b && b != d && a != d {
                        prop_assert!(c.get(a, b) <= c.get(a, d).max(c.get(b, d)) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn upgma_permutation_invariant((n, v) in matrix_strategy(), seed in any::<u64>()) {
        let m = DistanceMatrix::new(labels(n), v, DistanceKind::Embedding).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled_labels: Vec<String> = perm.iter().map(|&i| m.labels()[i].clone()).collect();
        let p = DistanceMatrix::from_fn(shuffled_labels, DistanceKind::Embedding, |i, j| m.get(perm[i], perm[j])).unwrap();
        prop_assert_eq!(upgma(&m).unwrap(), upgma(&p).unwrap());
    }

    #[test]
    fn neighbor_net_fits_at_least_as_well_as_upgma((n, v) in matrix_strategy()) {
        let m = DistanceMatrix::new(labels(n), v, DistanceKind::Embedding).unwrap();
        let net = neighbor_net(&m).unwrap();
        prop_assert!(net.splits.iter().all(|s| s.weight >= 0.0 && !s.side.is_empty() && s.side.len() < n));
        let net_res = residual(&net.metric().unwrap(), &m);
        let tree_res = residual(&cophenetic(&upgma(&m).unwrap()).unwrap(), &m);
        prop_assert!(net_res <= tree_res * (1.0 + 1e-9) + 1e-12, "{} > {}", net_res, tree_res);
    }

    #[test]
    fn splits_are_contiguous_in_cycle((n, v) in matrix_strategy()) {
        let m = DistanceMatrix::new(labels(n), v, DistanceKind::Embedding).unwrap();
        let net = neighbor_net(&m).unwrap();
        let pos: Vec<usize> = {
            let mut p = vec![0; n];
            net.circular_order.iter().enumerate().for_each(|(k, &t)| p[t] = k);
            p
        };
        for s in &net.splits {
            let mut ps: Vec<usize> = s.side.iter().map(|&t| pos[t]).collect();
            ps.sort_unstable();
            prop_assert_eq!(ps[ps.len() - 1] - ps[0] + 1, ps.len());
        }
    }

    #[test]
    fn consensus_is_permutation_invariant(seeds in prop::collection::vec(any::<u64>(), 2..6)) {
        let trees: Vec<Dendrogram> = seeds.iter().map(|&s| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let v: Vec<f64> = (0..15).map(|_| r.random_range(0.0..1.0)).collect();
            upgma(&DistanceMatrix::new(labels(6), v, DistanceKind::Embedding).unwrap()).unwrap()
        }).collect();
        let mut rev = trees.clone();
        rev.reverse();
        prop_assert_eq!(consensus(&trees, &trees[0]).unwrap().support, consensus(&rev, &trees[0]).unwrap().support);
    }
}
