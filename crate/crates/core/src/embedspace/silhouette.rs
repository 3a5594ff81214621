use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingSet;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SilhouetteMetric {
    #[default]
    Cosine,
    Euclidean,
}

/// Per-utterance silhouette `s = (b − a) / max(a, b)` with languages as
/// clusters: `a` is the mean distance to the other utterances of the same
/// language, `b` the smallest mean distance to another language.
pub fn silhouette_scores(set: &EmbeddingSet, metric: SilhouetteMetric) -> Result<Vec<f64>> {
    let groups = set.language_groups();
    if groups.len() < 2 {
        return Err(Error::TooFewLanguages("silhouette needs at least 2 languages".into()));
    }
    if let Some((lang, _)) = groups.iter().find(|(_, r)| r.len() < 2) {
        return Err(Error::InsufficientSamples(format!("{lang} has a single sample")));
    }
    let mut cluster_of = vec![0usize; set.len()];
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    for (c, rows) in groups.values().enumerate() {
        rows.iter().for_each(|&i| cluster_of[i] = c);
    }
    // per-row distance sums to every cluster
    let sums: Vec<Vec<f64>> = match metric {
        SilhouetteMetric::Cosine => cosine_cluster_sums(set, &groups.values().collect::<Vec<_>>())?,
        SilhouetteMetric::Euclidean => euclidean_cluster_sums(set, &cluster_of, sizes.len()),
    };
    Ok(sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let own = cluster_of[i];
            let a = (s[own] / (sizes[own] - 1) as f64).max(0.0);
            let b = (0..sizes.len())
                .filter(|&c| c != own)
                .map(|c| s[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect())
}

fn unit(row: &[f32]) -> Option<Vec<f64>> {
    let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    (norm > 0.0).then(|| row.iter().map(|&v| v as f64 / norm).collect())
}

/// Cosine distance is affine in the normalised vectors, so the summed
/// distance from `u` to a cluster is `|C| − u·ΣC` (minus the self term for
/// the own cluster). That makes this O(N·K·d) instead of O(N²·d).
fn cosine_cluster_sums(set: &EmbeddingSet, groups: &[&Vec<usize>]) -> Result<Vec<Vec<f64>>> {
    if let Some(i) = (0..set.len()).find(|&i| set.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroVector(set.records()[i].id.clone()));
    }
    let d = set.dim();
    let centroid_sums: Vec<Vec<f64>> = par::map_slice(groups, |rows| {
        let mut acc = vec![0.0; d];
        for &i in rows.iter() {
            let u = unit(set.row(i)).expect("checked non-zero");
            acc.iter_mut().zip(&u).for_each(|(a, x)| *a += x);
        }
        acc
    });
    let mut cluster_of = vec![0usize; set.len()];
    for (c, rows) in groups.iter().enumerate() {
        rows.iter().for_each(|&i| cluster_of[i] = c);
    }
    Ok(par::map_range(set.len(), |i| {
        let u = unit(set.row(i)).expect("checked non-zero");
        centroid_sums
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let dot: f64 = u.iter().zip(s).map(|(a, b)| a * b).sum();
                let n = groups[c].len() as f64;
                if c == cluster_of[i] {
                    let self_dot: f64 = u.iter().map(|a| a * a).sum();
                    (n - 1.0) - (dot - self_dot)
                } else {
                    n - dot
                }
            })
            .collect()
    }))
}

fn euclidean_cluster_sums(set: &EmbeddingSet, cluster_of: &[usize], k: usize) -> Vec<Vec<f64>> {
    par::map_range(set.len(), |i| {
        let x = set.row(i);
        let mut sums = vec![0.0; k];
        for j in 0..set.len() {
            if j == i {
                continue;
            }
            let d2: f64 = x.iter().zip(set.row(j)).map(|(&a, &b)| (a as f64 - b as f64).powi(2)).sum();
            sums[cluster_of[j]] += d2.sqrt();
        }
        sums
    })
}

/// Removes, per language, the `floor(drop_fraction · count)` lowest-scoring
/// utterances (ties broken by utterance id). Returns the filtered set and
/// the scores of the input rows.
pub fn silhouette_filter(
    set: &EmbeddingSet,
    drop_fraction: f64,
    metric: SilhouetteMetric,
) -> Result<(EmbeddingSet, Vec<f64>)> {
    if !(0.0..1.0).contains(&drop_fraction) {
        return Err(Error::InvalidArgument(format!("drop_fraction must be in [0, 1), got {drop_fraction}")));
    }
    let scores = silhouette_scores(set, metric)?;
    let mut keep = Vec::with_capacity(set.len());
    for (lang, rows) in set.language_groups() {
        let drop = (drop_fraction * rows.len() as f64).floor() as usize;
        let mut ranked = rows.clone();
        ranked.sort_by(|&a, &b| {
            scores[a].total_cmp(&scores[b]).then_with(|| set.records()[a].id.cmp(&set.records()[b].id))
        });
        if drop >= rows.len() {
            return Err(Error::OverFiltered(lang.to_string()));
        }
        keep.extend_from_slice(&ranked[drop..]);
    }
    keep.sort_unstable();
    Ok((set.select(&keep), scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::UtteranceRecord;

    fn set_from(rows: &[(&str, [f32; 2])]) -> EmbeddingSet {
        let recs = rows.iter().enumerate().map(|(i, (l, _))| UtteranceRecord::new(format!("u{i:03}"), *l)).collect();
        EmbeddingSet::new(recs, 2, rows.iter().flat_map(|(_, v)| *v).collect()).unwrap()
    }

    /// Direct O(N²) evaluation of the definition.
    fn brute(set: &EmbeddingSet, dist: impl Fn(&[f32], &[f32]) -> f64) -> Vec<f64> {
        let langs: Vec<&str> = set.records().iter().map(|r| r.language.as_str()).collect();
        let mut uniq = langs.clone();
        uniq.sort();
        uniq.dedup();
        (0..set.len())
            .map(|i| {
                let mean_to = |l: &str| {
                    let ds: Vec<f64> = (0..set.len())
                        .filter(|&j| j != i && langs[j] == l)
                        .map(|j| dist(set.row(i), set.row(j)))
                        .collect();
                    ds.iter().sum::<f64>() / ds.len() as f64
                };
                let a = mean_to(langs[i]);
                let b = uniq.iter().filter(|l| **l != langs[i]).map(|l| mean_to(l)).fold(f64::INFINITY, f64::min);
                (b - a) / a.max(b)
            })
            .collect()
    }

    fn cos(a: &[f32], b: &[f32]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
        1.0 - dot / (na * nb)
    }

    fn euc(a: &[f32], b: &[f32]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).powi(2)).sum::<f64>().sqrt()
    }

    fn mixed() -> EmbeddingSet {
        set_from(&[
            ("aaa", [1.0, 0.1]),
            ("aaa", [0.9, 0.3]),
            ("aaa", [0.2, 1.0]),
            ("bbb", [0.1, 1.0]),
            ("bbb", [-0.3, 0.8]),
            ("bbb", [0.7, 0.6]),
            ("ccc", [-1.0, -0.2]),
            ("ccc", [-0.8, 0.4]),
        ])
    }

    #[test]
    fn matches_definition() {
        let set = mixed();
        for (metric, f) in [(SilhouetteMetric::Cosine, cos as fn(&[f32], &[f32]) -> f64), (SilhouetteMetric::Euclidean, euc)] {
            let got = silhouette_scores(&set, metric).unwrap();
            let want = brute(&set, f);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "{metric:?}: {g} vs {w}");
                assert!((-1.0..=1.0).contains(g));
            }
        }
    }

    #[test]
    fn separated_clusters_score_high() {
        let set = set_from(&[
            ("aaa", [1.0, 0.01]),
            ("aaa", [1.0, 0.02]),
            ("aaa", [1.0, 0.0]),
            ("bbb", [0.01, 1.0]),
            ("bbb", [0.0, 1.0]),
            ("bbb", [0.02, 1.0]),
        ]);
        let s = silhouette_scores(&set, SilhouetteMetric::Cosine).unwrap();
        assert!(s.iter().all(|&v| v > 0.9), "{s:?}");
    }

    #[test]
    fn duplicate_points_score_one() {
        let set = set_from(&[("aaa", [2.0, 0.0]), ("aaa", [2.0, 0.0]), ("bbb", [0.0, 1.0]), ("bbb", [0.1, 1.0])]);
        for metric in [SilhouetteMetric::Cosine, SilhouetteMetric::Euclidean] {
            let s = silhouette_scores(&set, metric).unwrap();
            assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12, "{metric:?} {s:?}");
        }
    }

    #[test]
    fn drops_floor_fraction_per_language() {
        let mut rows = Vec::new();
        for i in 0..20 {
            rows.push(("aaa", [1.0, i as f32 * 0.05]));
            rows.push(("bbb", [i as f32 * 0.05, 1.0]));
        }
        rows.push(("bbb", [0.5, 0.5]));
        let set = set_from(&rows);
        let (out, scores) = silhouette_filter(&set, 0.10, SilhouetteMetric::Cosine).unwrap();
        assert_eq!(scores.len(), 41);
        let g = out.language_groups();
        assert_eq!(g["aaa"].len(), 18);
        assert_eq!(g["bbb"].len(), 19);
        // the ambiguous point goes first
        assert!(out.records().iter().all(|r| r.id != "u040"));
        let (same, _) = silhouette_filter(&set, 0.0, SilhouetteMetric::Cosine).unwrap();
        assert_eq!(same, set);
    }

    #[test]
    fn ties_break_by_id() {
        let set = set_from(&[("aaa", [1.0, 0.0]), ("aaa", [1.0, 0.0]), ("bbb", [0.0, 1.0]), ("bbb", [0.0, 1.0])]);
        let (out, _) = silhouette_filter(&set, 0.5, SilhouetteMetric::Euclidean).unwrap();
        let ids: Vec<&str> = out.records().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["u001", "u003"]);
    }

    #[test]
    fn errors() {
        let single = set_from(&[("aaa", [1.0, 0.0]), ("bbb", [0.0, 1.0]), ("bbb", [0.0, 2.0])]);
        assert!(matches!(silhouette_scores(&single, SilhouetteMetric::Cosine), Err(Error::InsufficientSamples(_))));
        let zero = set_from(&[("aaa", [0.0, 0.0]), ("aaa", [1.0, 0.0]), ("bbb", [0.0, 1.0]), ("bbb", [0.0, 2.0])]);
        assert!(matches!(silhouette_scores(&zero, SilhouetteMetric::Cosine), Err(Error::ZeroVector(_))));
        assert!(silhouette_filter(&mixed(), 1.0, SilhouetteMetric::Cosine).is_err());
    }
}
