//! Planted-structure synthetic corpora: families of languages with
//! Gaussian embedding clusters, clustered coordinates and word lists
//! mutated from per-family proto-forms.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{write_embeddings, EmbeddingFormat, EmbeddingSet, Gender, LanguageMeta, LanguageTable, UtteranceRecord, WordList, ASJP_MEANINGS};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub families: usize,
    pub languages_per_family: usize,
    pub utterances_per_language: usize,
    pub dim: usize,
    /// Standard deviation of family means around the origin.
    pub family_spread: f64,
    /// Standard deviation of language offsets around their family mean.
    pub language_spread: f64,
    /// Per-utterance noise standard deviation.
    pub noise: f64,
    /// Fraction of utterances drawn with five times the noise.
    pub outlier_rate: f64,
    /// Shift of female utterances along the first coordinate.
    pub gender_shift: f64,
    /// Probability that the simulated LID prediction is correct.
    pub lid_accuracy: f64,
    /// Per-segment substitution probability from the family proto-form.
    pub mutation_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            families: 4,
            languages_per_family: 5,
            utterances_per_language: 200,
            dim: 32,
            family_spread: 3.0,
            language_spread: 1.0,
            noise: 1.0,
            outlier_rate: 0.02,
            gender_shift: 0.0,
            lid_accuracy: 0.9,
            mutation_rate: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub embeddings: EmbeddingSet,
    pub meta: LanguageTable,
    pub wordlists: WordList,
}

impl SynthCorpus {
    /// Family index of each language, in ISO order.
    pub fn family_index(&self) -> Vec<usize> {
        self.meta.iter().map(|m| m.family.trim_start_matches("fam").parse().unwrap_or(0)).collect()
    }

    /// Writes `embeddings.bin`, `languages.tsv` and `wordlists.tsv` into
    /// `dir`, the file names a default pipeline config expects.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_embeddings(&self.embeddings, &dir.join("embeddings.bin"), EmbeddingFormat::Binary)?;
        self.meta.write_tsv(std::fs::File::create(dir.join("languages.tsv"))?)?;
        self.wordlists.write_tsv(std::fs::File::create(dir.join("wordlists.tsv"))?)?;
        Ok(())
    }
}

pub fn language_code(family: usize, language: usize) -> String {
    format!("l{family:02}{language:02}")
}

const ALPHABET: &[char] = &['p', 'b', 't', 'd', 'k', 'g', 'm', 'n', 's', 'l', 'r', 'w', 'y', 'h', 'a', 'e', 'i', 'o', 'u', 'E'];

/// Deterministic in `seed`: each family and language draws from its own
/// labelled stream.
pub fn generate(cfg: &SynthConfig, seed: u64) -> Result<SynthCorpus> {
    if cfg.families == 0 || cfg.languages_per_family == 0 || cfg.dim == 0 || cfg.utterances_per_language == 0 {
        return Err(Error::InvalidArgument("synthetic corpus sizes must be positive".into()));
    }
    let normal = |sd: f64| Normal::new(0.0, sd.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()));
    let (fam_n, lang_n, noise_n) = (normal(cfg.family_spread)?, normal(cfg.language_spread)?, normal(cfg.noise)?);
    let mut meta = Vec::new();
    let mut words = WordList::new();
    let mut records = Vec::new();
    let mut data = Vec::with_capacity(cfg.families * cfg.languages_per_family * cfg.utterances_per_language * cfg.dim);
    for f in 0..cfg.families {
        let mut fr = rng::stream(seed, &format!("family{f}"), 1);
        let family_mean: Vec<f64> = (0..cfg.dim).map(|_| fam_n.sample(&mut fr)).collect();
        let (clat, clon) = (fr.random_range(-60.0..60.0), fr.random_range(-170.0..170.0));
        let proto: Vec<Vec<char>> = ASJP_MEANINGS
            .iter()
            .map(|_| (0..fr.random_range(3..7)).map(|_| ALPHABET[fr.random_range(0..ALPHABET.len())]).collect())
            .collect();
        for l in 0..cfg.languages_per_family {
            let iso = language_code(f, l);
            let mut lr = rng::stream(seed, &iso, 2);
            let mean: Vec<f64> = family_mean.iter().map(|m| m + lang_n.sample(&mut lr)).collect();
            meta.push(LanguageMeta {
                iso: iso.clone(),
                name: format!("Language {f}-{l}"),
                family: format!("fam{f}"),
                subfamily: None,
                latitude: (clat + lr.random_range(-8.0..8.0f64)).clamp(-89.0, 89.0),
                longitude: clon + lr.random_range(-8.0..8.0),
                in_lid_training: l % 4 != 3,
            });
            for (k, &m) in ASJP_MEANINGS.iter().enumerate() {
                let form: Vec<char> = proto[k]
                    .iter()
                    .map(|&c| if lr.random_bool(cfg.mutation_rate) { ALPHABET[lr.random_range(0..ALPHABET.len())] } else { c })
                    .collect();
                words.push(&iso, m, form);
            }
            for u in 0..cfg.utterances_per_language {
                let gender = if lr.random_bool(0.5) { Gender::Female } else { Gender::Male };
                let scale = if lr.random_bool(cfg.outlier_rate.clamp(0.0, 1.0)) { 5.0 } else { 1.0 };
                for (j, m) in mean.iter().enumerate() {
                    let shift = if j == 0 && gender == Gender::Female { cfg.gender_shift } else { 0.0 };
                    data.push((m + shift + scale * noise_n.sample(&mut lr)) as f32);
                }
                let predicted = if lr.random_bool(cfg.lid_accuracy.clamp(0.0, 1.0)) {
                    iso.clone()
                } else {
                    language_code(lr.random_range(0..cfg.families), lr.random_range(0..cfg.languages_per_family))
                };
                records.push(UtteranceRecord {
                    id: format!("{iso}-{u:05}"),
                    language: iso.clone(),
                    speaker: Some(format!("{iso}-s{}", u % 10)),
                    gender: Some(gender),
                    predicted: Some(predicted),
                });
            }
        }
    }
    Ok(SynthCorpus {
        embeddings: EmbeddingSet::new(records, cfg.dim, data)?.with_seed(Some(seed)),
        meta: LanguageTable::new(meta)?,
        wordlists: words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let cfg = SynthConfig { utterances_per_language: 10, ..Default::default() };
        let a = generate(&cfg, 3).unwrap();
        let b = generate(&cfg, 3).unwrap();
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.embeddings.len(), 200);
        assert_eq!(a.meta.len(), 20);
        assert_eq!(a.wordlists.languages().count(), 20);
        assert_eq!(a.family_index()[5], 1);
        assert_ne!(generate(&cfg, 4).unwrap().embeddings, a.embeddings);
    }
}
