//! Pair tables generated from a known interaction model.

use glem_core::stats::{PairRow, PairTable};
use rand::Rng;

use super::{normal, rng};

/// Rows `(embedding, lexical, geographic)` with synthetic pair labels.
pub fn table(points: &[(f64, f64, f64)]) -> PairTable {
    PairTable {
        rows: points
            .iter()
            .enumerate()
            .map(|(i, &(e, l, g))| PairRow {
                l1: format!("a{i:04}"),
                l2: format!("b{i:04}"),
                embedding: e,
                lexical: Some(l),
                geographic: g,
                same_family: i % 3 == 0,
            })
            .collect(),
    }
}

pub const BETA: [f64; 4] = [1.0, 0.5, -0.3, 0.2];

/// Planted interaction data: `exp(e) = β·(1, √g, exp(l), √g·exp(l)) + noise`.
pub fn planted(seed: u64, n: usize, sigma: f64) -> PairTable {
    let mut r = rng(seed);
    let pts: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let (g, l): (f64, f64) = (r.random_range(0.0..4.0), r.random_range(0.0..1.0));
            let (s, x) = (g.sqrt(), l.exp());
            let y = BETA[0] + BETA[1] * s + BETA[2] * x + BETA[3] * s * x + sigma * normal(&mut r);
            (y.max(1e-6).ln(), l, g)
        })
        .collect();
    table(&pts)
}
