use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};

/// One agglomeration step. Node ids follow the usual linkage convention:
/// leaves are `0..n`, merge `k` creates node `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Child whose smallest leaf index is lower.
    pub left: usize,
    pub right: usize,
    /// Half the average-linkage distance, so cophenetic distance = 2·height.
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

/// Relative tolerance under which two linkage distances count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Average-linkage agglomeration with Lance–Williams updates. Among tied
/// pairs the one whose (smaller, larger) minimum leaf indices sort first wins;
/// leaves are in label order, so ties resolve lexicographically.
pub fn upgma(m: &DistanceMatrix) -> Result<Dendrogram> {
    let n = m.len();
    if n < 2 {
        return Err(Error::TooFewLanguages(format!("UPGMA needs 2 leaves, got {n}")));
    }
    let mut d = m.to_square();
    // Per slot: node id, size, minimum leaf index, height.
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut height = vec![0.0f64; n];
    let mut alive = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in (0..n).filter(|&a| alive[a]) {
            for b in (a + 1..n).filter(|&b| alive[b]) {
                let key = (min_leaf[a].min(min_leaf[b]), min_leaf[a].max(min_leaf[b]));
                let v = d[a][b];
                let better = match best {
                    None => true,
                    Some((bv, bk, ..)) => (v < bv && !ties(v, bv)) || (ties(v, bv) && key < bk),
                };
                if better {
                    best = Some((v, key, a, b));
                }
            }
        }
        let (v, _, a, b) = best.expect("two live clusters");
        let (l, r) = if min_leaf[a] < min_leaf[b] { (a, b) } else { (b, a) };
        let h = (v / 2.0).max(height[a]).max(height[b]);
        merges.push(Merge { left: node[l], right: node[r], height: h, size: size[a] + size[b] });
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in (0..n).filter(|&k| alive[k] && k != a && k != b) {
            let nd = (na * d[a][k] + nb * d[b][k]) / (na + nb);
            d[a][k] = nd;
            d[k][a] = nd;
        }
        alive[b] = false;
        node[a] = n + step;
        size[a] += size[b];
        min_leaf[a] = min_leaf[a].min(min_leaf[b]);
        height[a] = h;
    }
    Ok(Dendrogram { labels: m.labels().to_vec(), merges })
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// Leaf indices under `node`, ascending.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let n = self.n_leaves();
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let m = &self.merges[x - n];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Leaf-label set of each merge, in merge order.
    pub fn clusters(&self) -> Vec<BTreeSet<String>> {
        let n = self.n_leaves();
        let mut sets: Vec<BTreeSet<String>> = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let mut s = BTreeSet::new();
            for c in [m.left, m.right] {
                if c < n {
                    s.insert(self.labels[c].clone());
                } else {
                    s.extend(sets[c - n].iter().cloned());
                }
            }
            sets.push(s);
        }
        sets
    }

    /// Cluster index per leaf after undoing the last `k − 1` merges.
    /// Clusters are numbered by their smallest leaf.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let n = self.n_leaves();
        let k = k.clamp(1, n);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for m in &self.merges[..n - k] {
            let (a, b) = (self.leaves(m.left)[0], self.leaves(m.right)[0]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let distinct: BTreeSet<usize> = roots.iter().copied().collect();
        let ids: Vec<usize> = distinct.into_iter().collect();
        roots.iter().map(|r| ids.binary_search(r).unwrap()).collect()
    }

    /// Newick with branch lengths as height differences; `support`, if
    /// given, annotates merge `k` as `[value]`.
    pub fn to_newick(&self, support: Option<&[f64]>) -> String {
        let n = self.n_leaves();
        let height = |x: usize| if x < n { 0.0 } else { self.merges[x - n].height };
        fn rec(t: &Dendrogram, x: usize, parent_h: f64, support: Option<&[f64]>, h: &dyn Fn(usize) -> f64, out: &mut String) {
            let n = t.n_leaves();
            if x < n {
                out.push_str(&t.labels[x]);
            } else {
                let m = &t.merges[x - n];
                out.push('(');
                rec(t, m.left, m.height, support, h, out);
                out.push(',');
                rec(t, m.right, m.height, support, h, out);
                out.push(')');
                if let Some(s) = support {
                    let _ = write!(out, "[{}]", s[x - n]);
                }
            }
            if parent_h.is_finite() {
                let _ = write!(out, ":{}", parent_h - h(x));
            }
        }
        let mut out = String::new();
        let root = n + self.merges.len() - 1;
        rec(self, root, f64::NAN, support, &height, &mut out);
        out.push(';');
        out
    }

    /// Errors unless both trees have the same leaf-label set.
    pub(crate) fn check_same_leaves(&self, other: &Dendrogram) -> Result<()> {
        let a: BTreeSet<&String> = self.labels.iter().collect();
        let b: BTreeSet<&String> = other.labels.iter().collect();
        if a != b || self.labels.len() != other.labels.len() {
            return Err(Error::LeafSetMismatch);
        }
        Ok(())
    }
}

/// `entry(a, b) = 2 × height` of the lowest merge containing both leaves.
pub fn cophenetic(t: &Dendrogram) -> Result<DistanceMatrix> {
    let n = t.n_leaves();
    let mut sq = vec![vec![0.0; n]; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in &t.merges {
        let (l, r) = (members[m.left].clone(), members[m.right].clone());
        for &a in &l {
            for &b in &r {
                sq[a][b] = 2.0 * m.height;
                sq[b][a] = 2.0 * m.height;
            }
        }
        members.push([l, r].concat());
    }
    DistanceMatrix::from_fn(t.labels.clone(), DistanceKind::Cophenetic, |i, j| sq[i][j])
}
