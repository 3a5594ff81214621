use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ordering::neighbor_net_order;
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// Taxon indices on the side not containing `circular_order[0]`, ascending.
    pub side: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSystem {
    pub taxa: Vec<String>,
    /// Permutation of taxon indices; every split side is contiguous in it.
    pub circular_order: Vec<usize>,
    pub splits: Vec<Split>,
}

/// Weights below this are dropped from the fitted split system.
pub const DEFAULT_WEIGHT_THRESHOLD: f64 = 1e-9;

/// Flat index of the split with side = order positions `i+1..=j`.
fn sidx(n: usize, i: usize, j: usize) -> usize {
    crate::distance::condensed_index(n, i, j)
}

/// Split-system metric over order positions: `out[(a, b)]` for `a < b`,
/// condensed. `w` is indexed like `sidx`. O(n²).
pub fn circular_metric(n: usize, w: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; w.len()];
    for a in 0..n.saturating_sub(1) {
        let left: f64 = (0..a).map(|i| w[sidx(n, i, a)]).sum();
        let right: f64 = (a + 1..n).map(|j| w[sidx(n, a, j)]).sum();
        d[sidx(n, a, a + 1)] = left + right;
    }
    for gap in 2..n {
        for a in 0..n - gap {
            let b = a + gap;
            let inner = if gap == 2 { 0.0 } else { d[sidx(n, a + 1, b - 1)] };
            d[sidx(n, a, b)] = d[sidx(n, a, b - 1)] + d[sidx(n, a + 1, b)] - inner - 2.0 * w[sidx(n, a, b - 1)];
        }
    }
    d
}

/// Transpose of `circular_metric`: `out[s] = Σ y(a, b)` over position
/// pairs separated by split `s`. O(n²).
pub fn circular_metric_transpose(n: usize, y: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    let at = |a: usize, b: usize| if a < b { y[sidx(n, a, b)] } else { y[sidx(n, b, a)] };
    for i in 0..n.saturating_sub(1) {
        let k = i + 1;
        g[sidx(n, i, k)] = (0..n).filter(|&c| c != k).map(|c| at(k, c)).sum();
    }
    for gap in 2..n {
        for i in 0..n - gap {
            let j = i + gap;
            let inner = if gap == 2 { 0.0 } else { g[sidx(n, i + 1, j - 1)] };
            g[sidx(n, i, j)] = g[sidx(n, i, j - 1)] + g[sidx(n, i + 1, j)] - inner - 2.0 * at(i + 1, j);
        }
    }
    g
}

/// Exact inverse of `circular_metric` (unconstrained least squares).
pub fn circular_inverse(n: usize, d: &[f64]) -> Vec<f64> {
    let at = |a: usize, b: usize| {
        let (a, b) = (a % n, b % n);
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => d[sidx(n, a, b)],
            std::cmp::Ordering::Greater => d[sidx(n, b, a)],
        }
    };
    let mut w = vec![0.0; d.len()];
    for i in 0..n {
        for j in i + 1..n {
            w[sidx(n, i, j)] = (at(i, j) + at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j)) / 2.0;
        }
    }
    w
}

/// Order-position interval `(i, j)` of every split, indexed like `sidx`.
fn split_intervals(n: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); n * n.saturating_sub(1) / 2];
    for i in 0..n {
        for j in i + 1..n {
            out[sidx(n, i, j)] = (i, j);
        }
    }
    out
}

/// `(AᵀA)[s, t]`: number of taxon pairs separated by both splits. Sides are
/// the position intervals `i+1..=j`, so with `p = |S∩T|` the count is
/// `p·|S̄∩T̄| + |S∖T|·|T∖S|`.
fn split_gram(n: usize, s: (usize, usize), t: (usize, usize)) -> f64 {
    let (ls, lt) = (s.1 - s.0, t.1 - t.0);
    let p = s.1.min(t.1).saturating_sub(s.0.max(t.0));
    (p * (n + p - ls - lt) + (ls - p) * (lt - p)) as f64
}

/// Non-negative least squares `min ‖A w − d‖²` with `A` the circular split
/// incidence operator.
///
/// When the exact inverse is feasible it is the answer. Otherwise a
/// Lawson–Hanson active-set method grows the free set from empty, solving
/// the restricted normal equations through a Cholesky factor that is
/// updated as splits enter and leave. Fitted systems are sparse, so the
/// factor stays small even when `A` has thousands of columns.
pub fn circular_nnls(n: usize, d: &[f64]) -> Result<Vec<f64>> {
    let m = d.len();
    let scale = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let neg_tol = 1e-12 * scale;
    let x = circular_inverse(n, d);
    if x.iter().all(|&v| v >= -neg_tol) {
        return Ok(x.into_iter().map(|v| v.max(0.0)).collect());
    }
    let iv = split_intervals(n);
    let b = circular_metric_transpose(n, d);
    let grad_tol = 1e-10 * b.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; m];
    let mut free: Vec<usize> = Vec::new();
    let mut is_free = vec![false; m];
    // Splits refused since the last successful entry (dependent or non-improving).
    let mut refused = vec![false; m];
    let mut chol = Cholesky::new(DMatrix::<f64>::zeros(0, 0)).expect("empty factor");

    let solve = |chol: &Cholesky<f64, nalgebra::Dyn>, free: &[usize]| -> DVector<f64> {
        let rhs = DVector::from_iterator(free.len(), free.iter().map(|&k| b[k]));
        let mut z = chol.solve(&rhs);
        // One step of iterative refinement against the exact Gram entries.
        let resid = DVector::from_iterator(
            free.len(),
            free.iter().map(|&s| b[s] - free.iter().zip(z.iter()).map(|(&t, zt)| split_gram(n, iv[s], iv[t]) * zt).sum::<f64>()),
        );
        z += chol.solve(&resid);
        z
    };

    let max_outer = 3 * m + 100;
    for _ in 0..max_outer {
        let r: Vec<f64> = circular_metric(n, &x).iter().zip(d).map(|(a, b)| b - a).collect();
        let w = circular_metric_transpose(n, &r);
        let Some(t) = (0..m)
            .filter(|&k| !is_free[k] && !refused[k] && w[k] > grad_tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
        else {
            return Ok(x);
        };
        let col = DVector::from_iterator(
            free.len() + 1,
            free.iter().chain(std::iter::once(&t)).map(|&s| split_gram(n, iv[s], iv[t])),
        );
        let grown = chol.insert_column(free.len(), col);
        let pivot = grown.l_dirty()[(free.len(), free.len())];
        if !(pivot.is_finite() && pivot > 1e-10 * split_gram(n, iv[t], iv[t]).sqrt()) {
            refused[t] = true;
            continue;
        }
        chol = grown;
        free.push(t);
        is_free[t] = true;
        let mut first = true;
        loop {
            let z = solve(&chol, &free);
            if z.iter().all(|&v| v > 0.0) {
                free.iter().zip(z.iter()).for_each(|(&k, &v)| x[k] = v);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (p, &k) in free.iter().enumerate() {
                if z[p] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[p]));
                }
            }
            for (p, &k) in free.iter().enumerate() {
                x[k] += alpha * (z[p] - x[k]);
            }
            let mut leaving: Vec<usize> = (0..free.len()).filter(|&p| x[free[p]] <= 1e-15 * scale).collect();
            if leaving.is_empty() {
                // Round-off put alpha on the boundary without reaching it.
                let p = (0..free.len()).filter(|&p| z[p] <= 0.0).min_by(|&a, &b| x[free[a]].total_cmp(&x[free[b]])).expect("some z <= 0");
                leaving.push(p);
            }
            if first && leaving.contains(&(free.len() - 1)) && alpha == 0.0 {
                // The entering split cannot move; refuse it until progress is made.
                refused[t] = true;
            }
            first = false;
            for &p in leaving.iter().rev() {
                x[free[p]] = 0.0;
                is_free[free[p]] = false;
                chol = chol.remove_column(p);
                free.remove(p);
            }
            if free.is_empty() {
                break;
            }
        }
        if !refused[t] {
            refused.iter_mut().for_each(|r| *r = false);
        }
    }
    let residual = circular_metric(n, &x).iter().zip(d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Err(Error::NnlsStalled { iterations: max_outer, residual })
}

/// NeighborNet: circular ordering by agglomeration, then non-negative
/// least-squares weights for all splits compatible with it. Splits with
/// weight below `threshold` are dropped.
pub fn neighbor_net_with(m: &DistanceMatrix, threshold: f64) -> Result<SplitSystem> {
    let n = m.len();
    if n < 2 {
        return Err(Error::TooFewLanguages(format!("NeighborNet needs 2 taxa, got {n}")));
    }
    let sq = m.to_square();
    let order = neighbor_net_order(&sq);
    let mut d = vec![0.0; n * (n - 1) / 2];
    for a in 0..n {
        for b in a + 1..n {
            d[sidx(n, a, b)] = sq[order[a]][order[b]];
        }
    }
    let w = circular_nnls(n, &d)?;
    let mut splits = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let weight = w[sidx(n, i, j)];
            if weight >= threshold {
                let mut side: Vec<usize> = order[i + 1..=j].to_vec();
                side.sort_unstable();
                splits.push(Split { side, weight });
            }
        }
    }
    Ok(SplitSystem { taxa: m.labels().to_vec(), circular_order: order, splits })
}

pub fn neighbor_net(m: &DistanceMatrix) -> Result<SplitSystem> {
    neighbor_net_with(m, DEFAULT_WEIGHT_THRESHOLD)
}

impl SplitSystem {
    /// Sum of weights of the splits separating each taxon pair.
    pub fn metric(&self) -> Result<DistanceMatrix> {
        let n = self.taxa.len();
        let mut sq = vec![vec![0.0; n]; n];
        let mut inside = vec![false; n];
        for s in &self.splits {
            inside.iter_mut().for_each(|v| *v = false);
            s.side.iter().for_each(|&t| inside[t] = true);
            for a in 0..n {
                for b in a + 1..n {
                    if inside[a] != inside[b] {
                        sq[a][b] += s.weight;
                    }
                }
            }
        }
        DistanceMatrix::from_fn(self.taxa.clone(), DistanceKind::Split, |i, j| sq[i][j])
    }

    /// True iff no two splits cross (the system is a tree).
    pub fn is_compatible(&self) -> bool {
        let n = self.taxa.len();
        let sets: Vec<Vec<bool>> = self
            .splits
            .iter()
            .map(|s| {
                let mut v = vec![false; n];
                s.side.iter().for_each(|&t| v[t] = true);
                v
            })
            .collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let mut seen = [false; 4];
                for t in 0..n {
                    seen[usize::from(sets[a][t]) * 2 + usize::from(sets[b][t])] = true;
                }
                if seen.iter().all(|&x| x) {
                    return false;
                }
            }
        }
        true
    }

    /// Nexus TAXA and SPLITS blocks with 1-based taxon numbers.
    pub fn to_nexus(&self) -> String {
        let n = self.taxa.len();
        let mut out = String::from("#NEXUS\n\nBEGIN Taxa;\n");
        let _ = writeln!(out, "DIMENSIONS ntax={n};\nTAXLABELS");
        for (i, t) in self.taxa.iter().enumerate() {
            let _ = writeln!(out, "[{}] '{}'", i + 1, t);
        }
        out.push_str(";\nEND; [Taxa]\n\nBEGIN Splits;\n");
        let _ = writeln!(out, "DIMENSIONS ntax={n} nsplits={};", self.splits.len());
        out.push_str("FORMAT labels=no weights=yes confidences=no intervals=no;\nPROPERTIES cyclic;\nCYCLE");
        for &t in &self.circular_order {
            let _ = write!(out, " {}", t + 1);
        }
        out.push_str(";\nMATRIX\n");
        for (k, s) in self.splits.iter().enumerate() {
            let _ = write!(out, "[{}, size={}]\t{}\t", k + 1, s.side.len(), s.weight);
            let ids: Vec<String> = s.side.iter().map(|t| (t + 1).to_string()).collect();
            let _ = writeln!(out, "{},", ids.join(" "));
        }
        out.push_str(";\nEND; [Splits]\n");
        out
    }
}
