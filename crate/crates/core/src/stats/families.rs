use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::correlation::pearson;
use super::pairs::{PairRow, PairTable};
use super::regression::{fit_model, ModelSpec};
use crate::corpus::LanguageTable;
use crate::error::Result;

/// Correlations within one group of language pairs. Entries are `None`
/// when the group is too small or degenerate for the statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub group: String,
    pub languages: usize,
    pub pairs: usize,
    pub embedding_geographic: Option<f64>,
    pub embedding_lexical: Option<f64>,
    pub model: Option<f64>,
    pub lexical_geographic: Option<f64>,
}

fn row(group: String, t: &PairTable, spec: &ModelSpec) -> CorrelationRow {
    let lex: Vec<&PairRow> = t.with_lexical().map(|(_, r)| r).collect();
    let e: Vec<f64> = lex.iter().map(|r| r.embedding).collect();
    let l: Vec<f64> = lex.iter().map(|r| r.lexical.unwrap()).collect();
    let g: Vec<f64> = lex.iter().map(|r| r.geographic).collect();
    CorrelationRow {
        group,
        languages: t.languages().len(),
        pairs: t.len(),
        embedding_geographic: pearson(&t.embedding(), &t.geographic()).ok(),
        embedding_lexical: pearson(&e, &l).ok(),
        model: fit_model(t, spec).ok().map(|f| f.model_correlation()),
        lexical_geographic: pearson(&l, &g).ok(),
    }
}

/// Rows for every family and subfamily with more than `min_languages`
/// languages in the table (pairs inside the group), followed by
/// `overall-related`, `overall-nonrelated` and `overall`.
pub fn family_correlations(
    t: &PairTable,
    meta: &LanguageTable,
    min_languages: usize,
    spec: &ModelSpec,
) -> Vec<CorrelationRow> {
    let langs = t.languages();
    let mut families: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut subfamilies: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for l in &langs {
        if let Some(m) = meta.get(l) {
            families.entry(m.family.as_str()).or_default().insert(l);
            if let Some(s) = &m.subfamily {
                subfamilies.entry(s.as_str()).or_default().insert(l);
            }
        }
    }
    let mut out = Vec::new();
    for groups in [&families, &subfamilies] {
        for (name, members) in groups.iter().filter(|(_, m)| m.len() > min_languages) {
            let sub = t.filter(|r| members.contains(r.l1.as_str()) && members.contains(r.l2.as_str()));
            out.push(row(name.to_string(), &sub, spec));
        }
    }
    out.push(row("overall-related".into(), &t.filter(|r| r.same_family), spec));
    out.push(row("overall-nonrelated".into(), &t.filter(|r| !r.same_family), spec));
    out.push(row("overall".into(), t, spec));
    out
}

pub fn write_correlation_tsv(rows: &[CorrelationRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "group\tlanguages\tpairs\tembedding_geographic\tembedding_lexical\tmodel\tlexical_geographic")?;
    let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into());
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.group,
            r.languages,
            r.pairs,
            f(r.embedding_geographic),
            f(r.embedding_lexical),
            f(r.model),
            f(r.lexical_geographic)
        )?;
    }
    Ok(())
}
