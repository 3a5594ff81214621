use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTable;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    /// `l1 < l2` lexicographically.
    pub l1: String,
    pub l2: String,
    pub embedding: f64,
    pub lexical: Option<f64>,
    pub geographic: f64,
    pub same_family: bool,
}

/// One row per unordered pair of languages common to the embedding and
/// geographic matrices and the metadata table, in `(l1, l2)` order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairTable {
    pub rows: Vec<PairRow>,
}

impl PairTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn languages(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().flat_map(|r| [r.l1.as_str(), r.l2.as_str()]).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Rows whose both endpoints satisfy `keep`.
    pub fn filter(&self, keep: impl Fn(&PairRow) -> bool) -> PairTable {
        PairTable { rows: self.rows.iter().filter(|r| keep(r)).cloned().collect() }
    }

    pub fn embedding(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.embedding).collect()
    }

    pub fn geographic(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.geographic).collect()
    }

    /// Rows with a lexical distance, as `(row index, row)`.
    pub fn with_lexical(&self) -> impl Iterator<Item = (usize, &PairRow)> {
        self.rows.iter().enumerate().filter(|(_, r)| r.lexical.is_some())
    }

    pub fn write_tsv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "l1\tl2\tembedding\tlexical\tgeographic\tsame_family")?;
        for r in &self.rows {
            let lex = r.lexical.map(|v| v.to_string()).unwrap_or_else(|| "NA".into());
            writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.l1, r.l2, r.embedding, lex, r.geographic, u8::from(r.same_family))?;
        }
        Ok(())
    }
}

pub fn build_pair_table(
    emb: &DistanceMatrix,
    lex: Option<&DistanceMatrix>,
    geo: &DistanceMatrix,
    meta: &LanguageTable,
) -> Result<PairTable> {
    let common: Vec<&String> = emb
        .labels()
        .iter()
        .filter(|l| geo.index_of(l).is_some() && meta.get(l).is_some())
        .collect();
    if common.len() < 3 {
        return Err(Error::TooFewLanguages(format!(
            "embedding, geographic and metadata labels share only {} language(s)",
            common.len()
        )));
    }
    let mut rows = Vec::with_capacity(common.len() * (common.len() - 1) / 2);
    for (a, l1) in common.iter().enumerate() {
        for l2 in &common[a + 1..] {
            let family = |l: &str| meta.get(l).map(|m| m.family.as_str());
            rows.push(PairRow {
                l1: (*l1).clone(),
                l2: (*l2).clone(),
                embedding: emb.lookup(l1, l2).expect("label present"),
                lexical: lex.and_then(|m| m.lookup(l1, l2)),
                geographic: geo.lookup(l1, l2).expect("label present"),
                same_family: family(l1) == family(l2),
            });
        }
    }
    Ok(PairTable { rows })
}
