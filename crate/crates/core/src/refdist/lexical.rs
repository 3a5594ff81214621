use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Segments, WordList};
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::par;

/// Minimum number of insertions, deletions and substitutions turning `a`
/// into `b`.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.len() < b.len() {
        return levenshtein(b, a);
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance normalised by the longer form.
pub fn ldn_pair<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return Err(Error::EmptyPair);
    }
    Ok(levenshtein(a, b) as f64 / longest as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynonymRule {
    /// Smallest LDN over all synonym cross-pairs.
    #[default]
    Min,
    /// First listed form of each language.
    First,
    /// Mean LDN over all synonym cross-pairs.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexicalVariant {
    Ldn,
    #[default]
    Ldnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexicalConfig {
    pub synonym_rule: SynonymRule,
    pub variant: LexicalVariant,
}

fn synonym_ldn(a: &[Segments], b: &[Segments], rule: SynonymRule) -> Result<f64> {
    match rule {
        SynonymRule::First => ldn_pair(&a[0], &b[0]),
        SynonymRule::Min | SynonymRule::Mean => {
            let mut best = f64::INFINITY;
            let mut sum = 0.0;
            for x in a {
                for y in b {
                    let v = ldn_pair(x, y)?;
                    best = best.min(v);
                    sum += v;
                }
            }
            Ok(if rule == SynonymRule::Min { best } else { sum / (a.len() * b.len()) as f64 })
        }
    }
}

/// LDN of meanings shared by both languages, and (for LDND) its ratio to
/// the mean LDN over ordered pairs of distinct shared meanings.
///
/// The pair is evaluated in canonical (sorted) order so the result is
/// bit-for-bit symmetric.
pub fn ldnd(lists: &WordList, l1: &str, l2: &str, cfg: LexicalConfig) -> Result<f64> {
    let (l1, l2) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
    let missing = |l: &str| Error::MissingMetadata(format!("{l} (no word list)"));
    let a = lists.language(l1).ok_or_else(|| missing(l1))?;
    let b = lists.language(l2).ok_or_else(|| missing(l2))?;
    ldnd_between(a, b, cfg).map_err(|e| match e {
        Error::TooFewSharedMeanings(..) => Error::TooFewSharedMeanings(l1.into(), l2.into()),
        Error::DegenerateDenominator(..) => Error::DegenerateDenominator(l1.into(), l2.into()),
        other => other,
    })
}

fn ldnd_between(
    a: &BTreeMap<u32, Vec<Segments>>,
    b: &BTreeMap<u32, Vec<Segments>>,
    cfg: LexicalConfig,
) -> Result<f64> {
    let shared: Vec<u32> = a.keys().filter(|m| b.contains_key(m)).copied().collect();
    if shared.len() < 2 {
        return Err(Error::TooFewSharedMeanings(String::new(), String::new()));
    }
    let mut same = 0.0;
    for m in &shared {
        same += synonym_ldn(&a[m], &b[m], cfg.synonym_rule)?;
    }
    let numerator = same / shared.len() as f64;
    if cfg.variant == LexicalVariant::Ldn {
        return Ok(numerator);
    }
    let mut cross = 0.0;
    for m in &shared {
        for n in &shared {
            if m != n {
                cross += synonym_ldn(&a[m], &b[n], cfg.synonym_rule)?;
            }
        }
    }
    let denominator = cross / (shared.len() * (shared.len() - 1)) as f64;
    if denominator <= 0.0 {
        return Err(Error::DegenerateDenominator(String::new(), String::new()));
    }
    Ok(numerator / denominator)
}

/// Lexical distances between the requested languages that have word lists.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalMatrix {
    pub matrix: DistanceMatrix,
    /// Requested languages without a word list, excluded from `matrix`.
    pub missing: Vec<String>,
}

pub fn lexical_distance_matrix(lists: &WordList, languages: &[String], cfg: LexicalConfig) -> Result<LexicalMatrix> {
    let mut present: Vec<String> = languages.iter().filter(|l| lists.contains(l)).cloned().collect();
    present.sort();
    present.dedup();
    let mut missing: Vec<String> = languages.iter().filter(|l| !lists.contains(l)).cloned().collect();
    missing.sort();
    missing.dedup();
    if present.len() < 2 {
        return Err(Error::TooFewLanguages(format!("only {} language(s) have word lists", present.len())));
    }
    let n = present.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values = par::map_slice(&pairs, |&(i, j)| ldnd(lists, &present[i], &present[j], cfg))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let matrix = DistanceMatrix::new(present, values, DistanceKind::Lexical)?;
    Ok(LexicalMatrix { matrix, missing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Segments {
        x.chars().collect()
    }

    #[test]
    fn levenshtein_cases() {
        assert_eq!(levenshtein(&s("kat"), &s("kat")), 0);
        assert_eq!(levenshtein(&s(""), &s("abc")), 3);
        assert_eq!(levenshtein(&s("kitten"), &s("sitting")), 3);
        assert_eq!(levenshtein(&s("flaw"), &s("lawn")), 2);
    }

    #[test]
    fn ldn_cases() {
        assert_eq!(ldn_pair(&s("ab"), &s("ab")).unwrap(), 0.0);
        assert_eq!(ldn_pair(&s("ab"), &s("cd")).unwrap(), 1.0);
        assert!((ldn_pair(&s("abc"), &s("abd")).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(ldn_pair::<char>(&[], &[]), Err(Error::EmptyPair)));
    }

    fn lists(rows: &[(&str, u32, &str)]) -> WordList {
        let mut wl = WordList::new();
        for (l, m, f) in rows {
            wl.push(l, *m, s(f));
        }
        wl
    }

    #[test]
    fn hand_case() {
        let wl = lists(&[("aaa", 1, "ab"), ("aaa", 2, "cd"), ("bbb", 1, "ab"), ("bbb", 2, "ce")]);
        let cfg = LexicalConfig::default();
        assert_eq!(ldnd(&wl, "aaa", "bbb", cfg).unwrap(), 0.25);
        let ldn_only = LexicalConfig { variant: LexicalVariant::Ldn, ..cfg };
        assert_eq!(ldnd(&wl, "bbb", "aaa", ldn_only).unwrap(), 0.25);
    }

    #[test]
    fn identical_lists_are_zero() {
        let wl = lists(&[("aaa", 1, "ab"), ("aaa", 2, "cd"), ("bbb", 1, "ab"), ("bbb", 2, "cd")]);
        assert_eq!(ldnd(&wl, "aaa", "bbb", LexicalConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn synonym_rules() {
        let wl = lists(&[
            ("aaa", 1, "ab"),
            ("aaa", 1, "xy"),
            ("aaa", 2, "cd"),
            ("bbb", 1, "xy"),
            ("bbb", 2, "cd"),
        ]);
        let ldn = |rule| LexicalConfig { synonym_rule: rule, variant: LexicalVariant::Ldn };
        assert_eq!(ldnd(&wl, "aaa", "bbb", ldn(SynonymRule::Min)).unwrap(), 0.0);
        assert_eq!(ldnd(&wl, "aaa", "bbb", ldn(SynonymRule::First)).unwrap(), 0.5);
        assert_eq!(ldnd(&wl, "aaa", "bbb", ldn(SynonymRule::Mean)).unwrap(), 0.25);
    }

    #[test]
    fn degenerate_and_sparse_lists() {
        let wl = lists(&[("aaa", 1, "ab"), ("aaa", 2, "ab"), ("bbb", 1, "ab"), ("bbb", 2, "ab")]);
        assert!(matches!(ldnd(&wl, "aaa", "bbb", LexicalConfig::default()), Err(Error::DegenerateDenominator(..))));
        let wl = lists(&[("aaa", 1, "ab"), ("bbb", 1, "ab"), ("bbb", 2, "ab")]);
        assert!(matches!(ldnd(&wl, "aaa", "bbb", LexicalConfig::default()), Err(Error::TooFewSharedMeanings(..))));
    }

    #[test]
    fn matrix_reports_missing() {
        let wl = lists(&[
            ("aaa", 1, "ab"),
            ("aaa", 2, "cd"),
            ("bbb", 1, "ab"),
            ("bbb", 2, "cd"),
            ("ccc", 1, "ab"),
            ("ccc", 2, "cd"),
        ]);
        let langs: Vec<String> = ["ccc", "aaa", "zzz", "bbb"].iter().map(|s| s.to_string()).collect();
        let lm = lexical_distance_matrix(&wl, &langs, LexicalConfig::default()).unwrap();
        assert_eq!(lm.missing, vec!["zzz".to_string()]);
        assert_eq!(lm.matrix.len(), 3);
        assert!(lm.matrix.values().iter().all(|&v| v == 0.0));
        assert_eq!(lm.matrix.kind(), DistanceKind::Lexical);
        assert!(lexical_distance_matrix(&wl, &langs[2..3], LexicalConfig::default()).is_err());
    }
}
