//! Independent reference implementations used as test oracles.

use std::collections::BTreeMap;

use glem_core::DistanceMatrix;

/// Plain recursive edit distance with memoisation.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut BTreeMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let sub = go(a, b, i + 1, j + 1, memo) + usize::from(a[i] != b[j]);
        let del = go(a, b, i + 1, j, memo) + 1;
        let ins = go(a, b, i, j + 1, memo) + 1;
        let v = sub.min(del).min(ins);
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut BTreeMap::new())
}

pub fn ldn(a: &[char], b: &[char]) -> f64 {
    levenshtein(a, b) as f64 / a.len().max(b.len()) as f64
}

/// LDND with the minimum-over-synonyms rule, languages taken in sorted order.
pub fn ldnd(
    a: &BTreeMap<u32, Vec<Vec<char>>>,
    b: &BTreeMap<u32, Vec<Vec<char>>>,
) -> f64 {
    let syn = |x: &[Vec<char>], y: &[Vec<char>]| {
        x.iter().flat_map(|p| y.iter().map(move |q| ldn(p, q))).fold(f64::INFINITY, f64::min)
    };
    let shared: Vec<u32> = a.keys().filter(|k| b.contains_key(k)).copied().collect();
    let mut num = 0.0;
    for m in &shared {
        num += syn(&a[m], &b[m]);
    }
    let num = num / shared.len() as f64;
    let mut den = 0.0;
    for m in &shared {
        for n in &shared {
            if m != n {
                den += syn(&a[m], &b[n]);
            }
        }
    }
    num / (den / (shared.len() * (shared.len() - 1)) as f64)
}

/// Inverse Vincenty geodesic distance on the WGS84 ellipsoid, in km.
pub fn vincenty_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (a, f) = (6378.137, 1.0 / 298.257223563);
    let b = a * (1.0 - f);
    let l = (lon2 - lon1).to_radians();
    let u1 = ((1.0 - f) * lat1.to_radians().tan()).atan();
    let u2 = ((1.0 - f) * lat2.to_radians().tan()).atan();
    let (su1, cu1, su2, cu2) = (u1.sin(), u1.cos(), u2.sin(), u2.cos());
    let mut lambda = l;
    let (mut ss, mut cs, mut sigma, mut ca2, mut c2sm);
    loop {
        let (sl, cl) = (lambda.sin(), lambda.cos());
        ss = ((cu2 * sl).powi(2) + (cu1 * su2 - su1 * cu2 * cl).powi(2)).sqrt();
        cs = su1 * su2 + cu1 * cu2 * cl;
        sigma = ss.atan2(cs);
        let sa = cu1 * cu2 * sl / ss;
        ca2 = 1.0 - sa * sa;
        c2sm = cs - 2.0 * su1 * su2 / ca2;
        let c = f / 16.0 * ca2 * (4.0 + f * (4.0 - 3.0 * ca2));
        let next = l + (1.0 - c) * f * sa * (sigma + c * ss * (c2sm + c * cs * (-1.0 + 2.0 * c2sm * c2sm)));
        if (next - lambda).abs() < 1e-13 {
            break;
        }
        lambda = next;
    }
    let u_sq = ca2 * (a * a - b * b) / (b * b);
    let big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
    let big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
    let ds = big_b * ss
        * (c2sm + big_b / 4.0 * (cs * (-1.0 + 2.0 * c2sm * c2sm) - big_b / 6.0 * c2sm * (-3.0 + 4.0 * ss * ss) * (-3.0 + 4.0 * c2sm * c2sm)));
    b * big_a * (sigma - ds)
}

/// One merge of the naive agglomeration: (left, right, height, size).
pub type NaiveMerge = (usize, usize, f64, usize);

/// Average linkage by rescanning every cluster pair against the original
/// matrix at each step. Ties within 1e-12 relative go to the pair whose
/// (smaller, larger) minimum leaves sort first.
pub fn naive_upgma(m: &DistanceMatrix) -> Vec<NaiveMerge> {
    let n = m.len();
    // (node id, leaves, height)
    let mut clusters: Vec<(usize, Vec<usize>, f64)> = (0..n).map(|i| (i, vec![i], 0.0)).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (a, b) = (&clusters[x].1, &clusters[y].1);
                let sum: f64 = a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| m.get(i, j)).sum();
                let d = sum / (a.len() * b.len()) as f64;
                let (ma, mb) = (a[0].min(b[0]), a[0].max(b[0]));
                let better = match best {
                    None => true,
                    Some((bd, key, _, _)) => {
                        let tied = (d - bd).abs() <= 1e-12 * d.abs().max(bd.abs());
                        if tied { (ma, mb) < key } else { d < bd }
                    }
                };
                if better {
                    best = Some((d, (ma, mb), x, y));
                }
            }
        }
        let (d, _, x, y) = best.unwrap();
        let (cy, cx) = (clusters.remove(y), clusters.remove(x));
        let (l, r) = if cx.1[0] < cy.1[0] { (cx, cy) } else { (cy, cx) };
        let height = (d / 2.0).max(l.2).max(r.2);
        let mut leaves = [l.1.clone(), r.1.clone()].concat();
        leaves.sort_unstable();
        out.push((l.0, r.0, height, leaves.len()));
        clusters.push((n + step, leaves, height));
    }
    out
}

/// Neumaier-compensated sum.
pub fn ksum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (ksum(x.iter().copied()) / n, ksum(y.iter().copied()) / n);
    let sxy = ksum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = ksum(x.iter().map(|a| (a - mx).powi(2)));
    let syy = ksum(y.iter().map(|b| (b - my).powi(2)));
    sxy / (sxx.sqrt() * syy.sqrt())
}
