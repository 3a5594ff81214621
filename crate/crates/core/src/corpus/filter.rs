use rand::seq::index;

use super::{EmbeddingSet, LanguageTable};
use crate::error::{Error, Result};
use crate::rng;

/// Drops languages with fewer than `min_per_language` rows and subsamples
/// languages with more than `max_per_language` rows, uniformly without
/// replacement. Surviving rows keep their original relative order.
pub fn filter_by_count(
    set: &EmbeddingSet,
    min_per_language: usize,
    max_per_language: usize,
    seed: u64,
) -> Result<EmbeddingSet> {
    if min_per_language == 0 || max_per_language < min_per_language {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= min ({min_per_language}) <= max ({max_per_language})"
        )));
    }
    let mut keep = Vec::with_capacity(set.len());
    for (lang, rows) in set.language_groups() {
        if rows.len() < min_per_language {
            continue;
        }
        if rows.len() <= max_per_language {
            keep.extend(rows);
            continue;
        }
        let mut r = rng::stream(seed, lang, 0);
        let mut picked = index::sample(&mut r, rows.len(), max_per_language).into_vec();
        picked.sort_unstable();
        keep.extend(picked.into_iter().map(|k| rows[k]));
    }
    if keep.is_empty() {
        return Err(Error::EmptyResult);
    }
    keep.sort_unstable();
    Ok(set.select(&keep).with_seed(Some(seed)))
}

/// Fraction of records whose predicted language equals the labelled one.
///
/// Records without a prediction are not counted. With `restrict_to_training`
/// only languages flagged `in_lid_training` in `meta` are considered.
pub fn lid_accuracy(set: &EmbeddingSet, meta: &LanguageTable, restrict_to_training: bool) -> Result<f64> {
    let (mut hits, mut total) = (0usize, 0usize);
    for r in set.records() {
        let Some(pred) = &r.predicted else { continue };
        if restrict_to_training && !meta.get(&r.language).is_some_and(|m| m.in_lid_training) {
            continue;
        }
        total += 1;
        hits += usize::from(*pred == r.language);
    }
    if total == 0 {
        return Err(Error::NoPredictions);
    }
    Ok(hits as f64 / total as f64)
}
