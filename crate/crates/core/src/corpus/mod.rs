//! Ingest, validation, filtering and persistence of utterance embeddings,
//! language metadata and word lists.

mod embeddings;
mod filter;
mod meta;
mod wordlist;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{load_embeddings, read_embeddings, read_input, write_embeddings, EmbeddingFormat};
pub use filter::{filter_by_count, lid_accuracy};
pub use meta::{load_language_meta, parse_language_meta, LanguageMeta, LanguageTable};
pub use wordlist::{
    load_wordlists, load_wordlists_with, parse_wordlists, strip_modifiers, Segments, WordList,
    ASJP_MEANINGS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            "unspecified" | "other" => Some(Gender::Unspecified),
            _ => None,
        }
    }
}

/// Metadata for one utterance. Record `i` of an [`EmbeddingSet`] describes
/// row `i` of its matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, rename = "pred", skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
}

impl UtteranceRecord {
    pub fn new(id: impl Into<String>, language: impl Into<String>) -> Self {
        UtteranceRecord {
            id: id.into(),
            language: language.into(),
            speaker: None,
            gender: None,
            predicted: None,
        }
    }
}

pub fn is_valid_language_code(code: &str) -> bool {
    !code.is_empty()
        && code.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

/// Row-major f32 embedding matrix with one [`UtteranceRecord`] per row.
///
/// Immutable after construction; every constructor validates that rows are
/// finite, ids are unique and language codes are well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    data: Vec<f32>,
    records: Vec<UtteranceRecord>,
    seed: Option<u64>,
}

impl EmbeddingSet {
    pub fn new(records: Vec<UtteranceRecord>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("embedding dimension is zero".into()));
        }
        if data.len() != records.len() * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} records × {dim} dims needs {} values, got {}",
                records.len(),
                records.len() * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: pos / dim, col: pos % dim });
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateUtteranceId(r.id.clone()));
            }
            if !is_valid_language_code(&r.language) {
                return Err(Error::InvalidLanguage(r.language.clone()));
            }
            if let Some(p) = &r.predicted {
                if !is_valid_language_code(p) {
                    return Err(Error::InvalidLanguage(p.clone()));
                }
            }
        }
        Ok(EmbeddingSet { dim, data, records, seed: None })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn records(&self) -> &[UtteranceRecord] {
        &self.records
    }

    /// Seed of the sampling step that produced this set, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// Row indices per language, languages in ascending order and rows in
    /// file order.
    pub fn language_groups(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            groups.entry(r.language.as_str()).or_default().push(i);
        }
        groups
    }

    pub fn languages(&self) -> Vec<String> {
        self.language_groups().keys().map(|s| s.to_string()).collect()
    }

    /// New set holding the given rows in the given order.
    pub fn select(&self, rows: &[usize]) -> EmbeddingSet {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        let mut records = Vec::with_capacity(rows.len());
        for &i in rows {
            data.extend_from_slice(self.row(i));
            records.push(self.records[i].clone());
        }
        EmbeddingSet { dim: self.dim, data, records, seed: self.seed }
    }

    /// Same records, new matrix (e.g. after a projection).
    pub fn with_matrix(&self, dim: usize, data: Vec<f32>) -> Result<EmbeddingSet> {
        let set = EmbeddingSet::new(self.records.clone(), dim, data)?;
        Ok(set.with_seed(self.seed))
    }
}
