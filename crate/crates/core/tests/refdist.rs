mod common;

use common::oracle;
use common::*;
use glem_core::corpus::{LanguageMeta, WordList};
use glem_core::refdist::{
    geographic_distance_matrix, haversine_km, ldn_pair, ldnd, levenshtein, lexical_distance_matrix, GeoPoint,
    LexicalConfig, SynonymRule,
};
use proptest::prelude::*;

fn langs(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("w{i}")).collect()
}

#[test]
fn ldnd_matches_oracle_on_random_lists() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let ls = langs(2);
        let wl = random_wordlists(&mut r, &ls, 40, 0.2);
        let got = ldnd(&wl, "w0", "w1", LexicalConfig::default()).unwrap();
        let want = oracle::ldnd(wl.language("w0").unwrap(), wl.language("w1").unwrap());
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn unrelated_vocabularies_score_near_one() {
    let mean = (0..100)
        .map(|seed| {
            let wl = random_wordlists(&mut rng(500 + seed), &langs(2), 40, 0.0);
            ldnd(&wl, "w0", "w1", LexicalConfig::default()).unwrap()
        })
        .sum::<f64>()
        / 100.0;
    assert!((mean - 1.0).abs() < 0.1, "{mean}");
}

#[test]
fn matrix_matches_pairwise_calls() {
    let mut r = rng(12);
    let ls = langs(5);
    let wl = random_wordlists(&mut r, &ls, 40, 0.3);
    let m = lexical_distance_matrix(&wl, &ls, LexicalConfig::default()).unwrap().matrix;
    for i in 0..5 {
        for j in i + 1..5 {
            let want = oracle::ldnd(wl.language(&ls[i]).unwrap(), wl.language(&ls[j]).unwrap());
            assert_eq!(m.get(i, j), want);
        }
    }
}

#[test]
fn helsinki_tallinn_agrees_with_geodesic() {
    let d = haversine_km(GeoPoint::new(60.1699, 24.9384), GeoPoint::new(59.437, 24.7536));
    let g = oracle::vincenty_km(60.1699, 24.9384, 59.437, 24.7536);
    assert!((d - g).abs() < 1.0, "{d} vs {g}");
    assert!((d - 82.0).abs() < 1.0);
    let antipodal = haversine_km(GeoPoint::new(90.0, 0.0), GeoPoint::new(-90.0, 0.0));
    assert!((antipodal - 20015.1).abs() < 0.1);
}

#[test]
fn geographic_matrix_matches_pairwise_haversine() {
    let mut r = rng(6);
    let meta: Vec<LanguageMeta> = (0..6)
        .map(|i| LanguageMeta {
            iso: format!("g{}", 5 - i),
            name: String::new(),
            family: "f".into(),
            subfamily: None,
            latitude: r.random_range(-89.0..89.0),
            longitude: r.random_range(-179.0..180.0),
            in_lid_training: false,
        })
        .collect();
    let m = geographic_distance_matrix(&meta).unwrap();
    for (a, p) in meta.iter().enumerate() {
        for q in &meta[a + 1..] {
            let want = haversine_km(GeoPoint::new(p.latitude, p.longitude), GeoPoint::new(q.latitude, q.longitude));
            assert_eq!(m.lookup(&p.iso, &q.iso), Some(want));
        }
    }
}

use rand::Rng;

fn word() -> impl Strategy<Value = Vec<char>> {
    prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c', 'd']), 0..8)
}

/// Every form listed twice, as synonyms of the same meaning.
fn doubled(wl: &WordList, ls: &[String]) -> WordList {
    let mut out = WordList::new();
    for l in ls {
        for (m, forms) in wl.language(l).unwrap() {
            for f in forms.iter().chain(forms) {
                out.push(l, *m, f.clone());
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn levenshtein_is_a_metric(a in word(), b in word(), c in word()) {
        prop_assert_eq!(levenshtein(&a, &b), oracle::levenshtein(&a, &b));
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }

    #[test]
    fn ldn_is_a_fraction(a in word(), b in word()) {
        prop_assume!(!(a.is_empty() && b.is_empty()));
        let v = ldn_pair(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn ldnd_symmetric_nonnegative_and_synonym_doubling_invariant(seed in any::<u64>(), rate in 0.0f64..0.5) {
        let ls = langs(2);
        let wl = random_wordlists(&mut rng(seed), &ls, 12, rate);
        let d2 = doubled(&wl, &ls);
        for rule in [SynonymRule::Min, SynonymRule::Mean, SynonymRule::First] {
            let cfg = LexicalConfig { synonym_rule: rule, ..LexicalConfig::default() };
            let (Ok(x), Ok(y)) = (ldnd(&wl, "w0", "w1", cfg), ldnd(&wl, "w1", "w0", cfg)) else { continue };
            prop_assert_eq!(x.to_bits(), y.to_bits());
            prop_assert!(x >= 0.0);
            if rule != SynonymRule::First {
                let z = ldnd(&d2, "w0", "w1", cfg).unwrap();
                prop_assert!((x - z).abs() <= 1e-12 * x.max(1.0), "{} vs {}", x, z);
            }
        }
    }

    #[test]
    fn haversine_symmetric_and_triangular(
        a in (-90.0f64..90.0, -179.9f64..180.0),
        b in (-90.0f64..90.0, -179.9f64..180.0),
        c in (-90.0f64..90.0, -179.9f64..180.0),
    ) {
        let p = |x: (f64, f64)| GeoPoint::new(x.0, x.1);
        let (ab, ba) = (haversine_km(p(a), p(b)), haversine_km(p(b), p(a)));
        prop_assert!((ab - ba).abs() <= 1e-9);
        let (ac, bc) = (haversine_km(p(a), p(c)), haversine_km(p(b), p(c)));
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(ab <= std::f64::consts::PI * glem_core::refdist::EARTH_RADIUS_KM + 1e-9);
    }
}
