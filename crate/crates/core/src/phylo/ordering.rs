//! NeighborNet agglomeration producing a circular ordering of taxa.
//!
//! Nodes are joined into clusters of at most two. Cluster pairs are chosen
//! by the net-divergence criterion on averaged cluster distances, nodes
//! within the chosen clusters by the reduced criterion. A 2-way join links
//! two singletons; 3-way and 4-way joins replace three (four) nodes by two
//! new ones. Expanding the recorded joins in reverse yields the cycle.

/// A join record: `u` replaced `(x, y)` and `v` replaced `(y, z)`.
#[derive(Debug, Clone, Copy)]
struct Join {
    u: usize,
    v: usize,
    x: usize,
    y: usize,
    z: usize,
}

struct State {
    d: Vec<Vec<f64>>,
    /// Active node ids; new nodes go to the front.
    active: Vec<usize>,
    nbr: Vec<Option<usize>>,
    joins: Vec<Join>,
}

impl State {
    fn new_node(&mut self) -> usize {
        let id = self.d.len();
        for row in &mut self.d {
            row.push(0.0);
        }
        self.d.push(vec![0.0; id + 1]);
        self.nbr.push(None);
        id
    }

    /// Replaces the chain `x–y–z` by linked nodes `u = (x, y)`, `v = (y, z)`.
    fn agg3way(&mut self, x: usize, y: usize, z: usize) -> usize {
        let u = self.new_node();
        let v = self.new_node();
        self.active.retain(|&p| p != x && p != y && p != z);
        self.active.insert(0, v);
        self.active.insert(0, u);
        self.nbr[u] = Some(v);
        self.nbr[v] = Some(u);
        for i in 0..self.active.len() {
            let p = self.active[i];
            let du = 2.0 / 3.0 * self.d[x][p] + self.d[y][p] / 3.0;
            let dv = 2.0 / 3.0 * self.d[z][p] + self.d[y][p] / 3.0;
            self.d[u][p] = du;
            self.d[p][u] = du;
            self.d[v][p] = dv;
            self.d[p][v] = dv;
        }
        self.d[u][u] = 0.0;
        self.d[v][v] = 0.0;
        self.joins.push(Join { u, v, x, y, z });
        u
    }

    fn cluster_distance(&self, p: usize, q: usize) -> f64 {
        let a: Vec<usize> = std::iter::once(p).chain(self.nbr[p]).collect();
        let b: Vec<usize> = std::iter::once(q).chain(self.nbr[q]).collect();
        let sum: f64 = a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| self.d[i][j]).sum();
        sum / (a.len() * b.len()) as f64
    }

    fn reduced_r(&self, z: usize, cx: usize, cy: usize) -> f64 {
        let in_pair = |p: usize| p == cx || p == cy || Some(p) == self.nbr[cx] || Some(p) == self.nbr[cy];
        self.active
            .iter()
            .map(|&p| if in_pair(p) || self.nbr[p].is_none() { self.d[z][p] } else { self.d[z][p] / 2.0 })
            .sum()
    }
}

/// Circular ordering of `0..n` for the square distance matrix `d`,
/// rotated to start at 0 and reflected so the second entry is smaller
/// than the last.
pub fn neighbor_net_order(d: &[Vec<f64>]) -> Vec<usize> {
    let n = d.len();
    if n < 4 {
        return (0..n).collect();
    }
    let mut s = State { d: d.to_vec(), active: (0..n).collect(), nbr: vec![None; n], joins: Vec::new() };
    let mut num_active = n;
    let mut num_clusters = n;
    while num_active > 3 {
        if num_active == 4 && num_clusters == 2 {
            let p = s.active[0];
            let q = if Some(s.active[1]) != s.nbr[p] { s.active[1] } else { s.active[2] };
            let (pn, qn) = (s.nbr[p].unwrap(), s.nbr[q].unwrap());
            if s.d[p][q] + s.d[pn][qn] < s.d[p][qn] + s.d[pn][q] {
                s.agg3way(p, q, qn);
            } else {
                s.agg3way(p, qn, q);
            }
            break;
        }
        // One representative per cluster: the node whose partner has a larger id.
        let reps: Vec<usize> = s.active.iter().copied().filter(|&p| s.nbr[p].is_none_or(|q| q > p)).collect();
        let mut sx = vec![0.0; reps.len()];
        for a in 0..reps.len() {
            for b in a + 1..reps.len() {
                let dpq = s.cluster_distance(reps[a], reps[b]);
                sx[a] += dpq;
                sx[b] += dpq;
            }
        }
        let m = num_clusters as f64;
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..reps.len() {
            for b in 0..a {
                let q = (m - 2.0) * s.cluster_distance(reps[a], reps[b]) - sx[a] - sx[b];
                if best.is_none_or(|(bq, ..)| q < bq) {
                    best = Some((q, reps[a], reps[b]));
                }
            }
        }
        let (_, cx, cy) = best.expect("at least two clusters");

        let (mut x, mut y) = (cx, cy);
        if s.nbr[cx].is_some() || s.nbr[cy].is_some() {
            let mut candidates = vec![cx];
            candidates.extend(s.nbr[cx]);
            let mut ys = vec![cy];
            ys.extend(s.nbr[cy]);
            // Cx and Cy count as their separate nodes.
            let mp = m + (candidates.len() - 1 + ys.len() - 1) as f64;
            let rx: Vec<f64> = candidates.iter().map(|&z| s.reduced_r(z, cx, cy)).collect();
            let ry: Vec<f64> = ys.iter().map(|&z| s.reduced_r(z, cx, cy)).collect();
            let mut best = f64::INFINITY;
            for (i, &a) in candidates.iter().enumerate() {
                for (j, &b) in ys.iter().enumerate() {
                    let q = (mp - 2.0) * s.d[a][b] - rx[i] - ry[j];
                    if q < best {
                        best = q;
                        x = a;
                        y = b;
                    }
                }
            }
        }

        match (s.nbr[x], s.nbr[y]) {
            (None, None) => {
                s.nbr[x] = Some(y);
                s.nbr[y] = Some(x);
                num_clusters -= 1;
            }
            (None, Some(yn)) => {
                s.agg3way(x, y, yn);
                num_active -= 1;
                num_clusters -= 1;
            }
            (Some(xn), None) => {
                s.agg3way(y, x, xn);
                num_active -= 1;
                num_clusters -= 1;
            }
            (Some(xn), Some(_)) if num_active == 4 => {
                s.agg3way(y, x, xn);
                num_active -= 1;
                num_clusters -= 1;
            }
            (Some(xn), Some(yn)) => {
                // Chain xn–x–y–yn collapses in two 3-way steps.
                let u = s.agg3way(xn, x, y);
                let v = s.nbr[u].unwrap();
                s.agg3way(u, v, yn);
                num_active -= 2;
                num_clusters -= 1;
            }
        }
    }
    expand(&s, n)
}

fn expand(s: &State, n: usize) -> Vec<usize> {
    let mut cycle: Vec<usize> = s.active.clone();
    for j in s.joins.iter().rev() {
        let len = cycle.len();
        let pu = cycle.iter().position(|&p| p == j.u).expect("u in cycle");
        let pv = cycle.iter().position(|&p| p == j.v).expect("v in cycle");
        let (first, replacement) = if (pu + 1) % len == pv {
            (pu, [j.x, j.y, j.z])
        } else {
            debug_assert_eq!((pv + 1) % len, pu, "joined nodes adjacent in the cycle");
            (pv, [j.z, j.y, j.x])
        };
        // Rotate so the pair sits at the front, then splice.
        cycle.rotate_left(first);
        cycle.splice(0..2, replacement);
    }
    debug_assert_eq!(cycle.len(), n);
    canonical_cycle(&cycle)
}

/// Rotates to start at taxon 0 and reflects so `c[1] < c[n−1]`.
pub fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    let start = cycle.iter().position(|&t| t == 0).unwrap_or(0);
    let mut out: Vec<usize> = (0..n).map(|k| cycle[(start + k) % n]).collect();
    if n > 2 && out[1] > out[n - 1] {
        out[1..].reverse();
    }
    out
}
