mod common;

use common::oracle;
use common::planted::*;
use common::*;
use glem_core::corpus::{EmbeddingSet, LanguageMeta, LanguageTable, UtteranceRecord};
use glem_core::embedspace::{fit_lda, lda_language_distances, LdaOptions};
use glem_core::stats::{
    build_pair_table, cumulative_dimension_curve, distance_correlations, fit_interaction_model, fit_model,
    ks_two_sample, loess_smooth, pearson, residual_outliers, ModelSpec, ModelTerms,
};
use glem_core::{DistanceKind, DistanceMatrix};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pearson_matches_two_pass_oracle() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..50).map(|_| normal(&mut r) * 1e3 + 1e4).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + 500.0 * normal(&mut r)).collect();
        let (got, want) = (pearson(&x, &y).unwrap(), oracle::pearson(&x, &y));
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn ks_hand_walk() {
    assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).d, 0.5);
    assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).d, 0.0);
    assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).d, 1.0);
}

#[test]
fn noiseless_planted_model_is_recovered() {
    let fit = fit_interaction_model(&planted(1, 200, 0.0)).unwrap();
    for (c, b) in fit.ols.coefficients.iter().zip(BETA) {
        assert!((c - b).abs() < 1e-8, "{c} vs {b}");
    }
    assert!((fit.ols.adjusted_r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn prediction_reproduces_the_planted_surface() {
    let fit = fit_interaction_model(&planted(2, 100, 0.0)).unwrap();
    for (g, l) in [(0.0, 0.0), (1.0, 0.5), (3.5, 0.9)] {
        let (s, x): (f64, f64) = (f64::sqrt(g), f64::exp(l));
        let truth = BETA[0] + BETA[1] * s + BETA[2] * x + BETA[3] * s * x;
        assert!((fit.predict(g, l) - truth).abs() < 1e-8);
    }
}

#[test]
fn noisy_planted_t_signs_match() {
    let hits = (0..100)
        .filter(|&s| {
            let fit = fit_interaction_model(&planted(1000 + s, 300, 0.1)).unwrap();
            fit.ols.t_values.iter().zip(BETA).all(|(t, b)| t.signum() == b.signum())
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn full_model_beats_single_predictors() {
    for seed in 0..10 {
        let t = planted(seed, 150, 0.05);
        let adj = |terms| fit_model(&t, &ModelSpec { terms, ..ModelSpec::default() }).unwrap().ols.adjusted_r_squared;
        let full = adj(ModelTerms::Interaction);
        assert!(full >= adj(ModelTerms::Geographic) && full >= adj(ModelTerms::Lexical));
    }
}

#[test]
fn outliers_match_sort_oracle() {
    for seed in 0..10 {
        let t = planted(seed, 60, 0.2);
        let fit = fit_interaction_model(&t).unwrap();
        let (pos, neg) = residual_outliers(&fit, &t, 7).unwrap();
        let mut all: Vec<(f64, String, String)> = fit
            .rows
            .iter()
            .zip(&fit.ols.residuals)
            .map(|(&i, &r)| (r, t.rows[i].l1.clone(), t.rows[i].l2.clone()))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then((&a.1, &a.2).cmp(&(&b.1, &b.2))));
        let top: Vec<f64> = all[..7].iter().map(|x| x.0).collect();
        assert_eq!(pos.iter().map(|o| o.residual).collect::<Vec<_>>(), top);
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then((&a.1, &a.2).cmp(&(&b.1, &b.2))));
        let bottom: Vec<f64> = all[..7].iter().map(|x| x.0).collect();
        assert_eq!(neg.iter().map(|o| o.residual).collect::<Vec<_>>(), bottom);
    }
}

#[test]
fn loess_full_span_denoises_a_line() {
    let mut better = 0;
    for seed in 0..100 {
        let mut r = rng(seed);
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 4.0).collect();
        let truth: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let ys: Vec<f64> = truth.iter().map(|t| t + normal(&mut r)).collect();
        let sm = loess_smooth(&xs, &ys, 1.0).unwrap();
        let rmse = |v: &[f64]| (v.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 40.0).sqrt();
        better += usize::from(rmse(&sm) < rmse(&ys));
    }
    assert_eq!(better, 100);
}

/// Languages spaced around a circle in embedding space and along the
/// equator geographically, with angle equal to longitude.
struct Ring {
    set: EmbeddingSet,
    meta: LanguageTable,
    lex: DistanceMatrix,
    geo: DistanceMatrix,
}

fn ring(seed: u64, k: usize, dim: usize) -> Ring {
    let mut r = rng(seed);
    let mut recs = Vec::new();
    let mut data = Vec::new();
    let mut meta = Vec::new();
    for c in 0..k {
        let theta = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
        let iso = format!("r{c:02}");
        for u in 0..150 {
            recs.push(UtteranceRecord::new(format!("{iso}-{u}"), iso.clone()));
            for d in 0..dim {
                let mu = match d {
                    0 => 10.0 * theta.cos(),
                    1 => 10.0 * theta.sin(),
                    _ => 0.0,
                };
                data.push((mu + 0.5 * normal(&mut r)) as f32);
            }
        }
        let lon = theta.to_degrees();
        meta.push(LanguageMeta {
            iso,
            name: format!("Ring {c}"),
            family: format!("f{}", c % 3),
            subfamily: None,
            latitude: 0.0,
            longitude: if lon > 180.0 { lon - 360.0 } else { lon },
            in_lid_training: true,
        });
    }
    let set = EmbeddingSet::new(recs, dim, data).unwrap();
    let geo = glem_core::refdist::geographic_distance_matrix(&meta).unwrap();
    let labels: Vec<String> = meta.iter().map(|m| m.iso.clone()).collect();
    let vals: Vec<f64> = (0..k * (k - 1) / 2).map(|_| r.random_range(0.5..1.0)).collect();
    let lex = DistanceMatrix::new(labels, vals, DistanceKind::Lexical).unwrap();
    Ring { set, meta: LanguageTable::new(meta).unwrap(), lex, geo }
}

#[test]
fn curve_tracks_geography_when_geography_determines_embeddings() {
    let g = ring(2, 12, 6);
    let proj = fit_lda(&g.set, LdaOptions::default()).unwrap();
    let ns: Vec<usize> = (2..=proj.output_dim()).collect();
    let curve = cumulative_dimension_curve(&g.set, &proj, &g.lex, &g.geo, &g.meta, &ns, &ModelSpec::default()).unwrap();
    for p in &curve.points {
        assert!(p.correlations.r_geographic > 0.95, "n = {}: {}", p.n, p.correlations.r_geographic);
    }
}

#[test]
fn curve_end_point_equals_full_dimension_path() {
    let g = ring(8, 10, 12);
    let spec = ModelSpec::default();
    let proj = fit_lda(&g.set, LdaOptions::default()).unwrap();
    let top = proj.output_dim();
    let curve = cumulative_dimension_curve(&g.set, &proj, &g.lex, &g.geo, &g.meta, &[2, top], &spec).unwrap();
    let emb = lda_language_distances(&g.set, LdaOptions::default()).unwrap().2;
    let direct = distance_correlations(&emb, &g.lex, &g.geo, &g.meta, &spec).unwrap();
    let last = curve.points.last().unwrap();
    assert_eq!(last.n, top);
    assert_eq!(last.correlations, direct);
}

#[test]
fn pair_table_ignores_label_order() {
    let g = ring(4, 8, 4);
    let emb = lda_language_distances(&g.set, LdaOptions::default()).unwrap().2;
    let base = build_pair_table(&emb, Some(&g.lex), &g.geo, &g.meta).unwrap();
    let mut labels = emb.labels().to_vec();
    labels.reverse();
    let n = labels.len();
    let rev = |m: &DistanceMatrix| {
        DistanceMatrix::from_fn(labels.clone(), m.kind(), |i, j| m.get(n - 1 - i, n - 1 - j)).unwrap()
    };
    let again = build_pair_table(&rev(&emb), Some(&rev(&g.lex)), &rev(&g.geo), &g.meta).unwrap();
    assert_eq!(base, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pearson_is_affine_invariant(seed in any::<u64>(), a in 0.01f64..100.0, b in -1e3f64..1e3, c in 0.01f64..100.0, d in -1e3f64..1e3) {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..30).map(|_| normal(&mut r)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + normal(&mut r)).collect();
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let y2: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        prop_assert!((pearson(&x, &y).unwrap() - pearson(&x2, &y2).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn ks_is_symmetric(a in prop::collection::vec(-5.0f64..5.0, 1..40), b in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let (x, y) = (ks_two_sample(&a, &b), ks_two_sample(&b, &a));
        prop_assert_eq!(x.d, y.d);
        prop_assert_eq!(x.p_value, y.p_value);
        prop_assert!((0.0..=1.0).contains(&x.d) && (0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn residuals_sum_to_zero(seed in any::<u64>(), sigma in 0.0f64..0.5) {
        let fit = fit_interaction_model(&planted(seed, 50, sigma)).unwrap();
        let s: f64 = fit.ols.residuals.iter().sum();
        prop_assert!(s.abs() < 1e-9, "{}", s);
    }
}
