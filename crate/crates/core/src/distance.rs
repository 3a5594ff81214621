//! Labelled, symmetric, zero-diagonal distance matrices in condensed form.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::container::{self, Container};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Embedding,
    Lexical,
    Geographic,
    /// Tree-induced distances of a dendrogram.
    Cophenetic,
    /// Distances induced by a weighted split system.
    Split,
}

impl DistanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Embedding => "embedding",
            DistanceKind::Lexical => "lexical",
            DistanceKind::Geographic => "geographic",
            DistanceKind::Cophenetic => "cophenetic",
            DistanceKind::Split => "split",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "embedding" => DistanceKind::Embedding,
            "lexical" => DistanceKind::Lexical,
            "geographic" => DistanceKind::Geographic,
            "cophenetic" => DistanceKind::Cophenetic,
            "split" => DistanceKind::Split,
            other => return Err(Error::MalformedHeader(format!("unknown distance kind {other:?}"))),
        })
    }
}

/// Position of pair `(i, j)`, `i < j`, in the condensed upper triangle.
#[inline]
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Labels are kept in ascending order; constructors permute values to match.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    /// Builds from labels in any order and the condensed values in that order.
    pub fn new(labels: Vec<String>, values: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{n} labels need {} condensed values, got {}",
                n * n.saturating_sub(1) / 2,
                values.len()
            )));
        }
        Self::from_fn(labels, kind, |i, j| values[condensed_index(n, i, j)])
    }

    /// Builds by evaluating `f(i, j)` for `i < j` indices into `labels`.
    pub fn from_fn(
        labels: Vec<String>,
        kind: DistanceKind,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let n = labels.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        if let Some(w) = order.windows(2).find(|w| labels[w[0]] == labels[w[1]]) {
            return Err(Error::DuplicateLanguage(labels[w[0]].clone()));
        }
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                let (i, j) = (order[a], order[b]);
                let v = if i < j { f(i, j) } else { f(j, i) };
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NonFiniteDistance(labels[i].clone(), labels[j].clone()));
                }
                values.push(v);
            }
        }
        let labels = order.iter().map(|&i| labels[i].clone()).collect();
        Ok(DistanceMatrix { labels, values, kind })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: DistanceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[condensed_index(self.len(), i, j)],
            std::cmp::Ordering::Greater => self.values[condensed_index(self.len(), j, i)],
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn lookup(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    /// Iterates `(i, j, value)` over `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn to_square(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Sub-matrix on the given labels; unknown labels are an error.
    pub fn restrict(&self, labels: &[String]) -> Result<DistanceMatrix> {
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| self.index_of(l).ok_or_else(|| Error::MissingMetadata(l.clone())))
            .collect::<Result<_>>()?;
        DistanceMatrix::from_fn(labels.to_vec(), self.kind, |i, j| self.get(idx[i], idx[j]))
    }

    /// Square labelled CSV. `order`, when given, permutes rows and columns.
    pub fn write_csv(&self, out: impl Write, order: Option<&[usize]>) -> Result<()> {
        let default: Vec<usize> = (0..self.len()).collect();
        let order = order.unwrap_or(&default);
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut head = vec![String::new()];
        head.extend(order.iter().map(|&i| self.labels[i].clone()));
        w.write_record(&head).map_err(err)?;
        for &i in order {
            let mut row = vec![self.labels[i].clone()];
            row.extend(order.iter().map(|&j| self.get(i, j).to_string()));
            w.write_record(&row).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(bytes: &[u8], kind: DistanceKind) -> Result<DistanceMatrix> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let head = rdr.headers().map_err(|e| Error::MalformedHeader(e.to_string()))?.clone();
        let labels: Vec<String> = head.iter().skip(1).map(str::to_string).collect();
        let n = labels.len();
        let mut square = Vec::with_capacity(n);
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::MalformedRecord { line: k + 2, msg: e.to_string() })?;
            if rec.len() != n + 1 || rec[0] != labels[k.min(n.saturating_sub(1))] {
                return Err(Error::DimensionMismatch(format!("row {k} does not match header")));
            }
            let row: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedRecord { line: k + 2, msg: e.to_string() })?;
            square.push(row);
        }
        if square.len() != n {
            return Err(Error::DimensionMismatch(format!("{} rows for {n} labels", square.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if square[i][j] != square[j][i] {
                    return Err(Error::DimensionMismatch(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        DistanceMatrix::from_fn(labels, kind, |i, j| square[i][j])
    }

    /// Condensed f64 payload in a GLEM1 container.
    pub fn write_binary(&self, out: &mut impl Write, seed: Option<u64>) -> Result<()> {
        let mut header = json!({
            "version": 1,
            "kind": "distance_matrix",
            "distance": self.kind.as_str(),
            "labels": self.labels,
            "layout": "condensed-upper",
        });
        if let Some(s) = seed {
            header["seed"] = json!(s);
        }
        container::write_f64(out, header, &self.values)
    }

    pub fn read_binary(bytes: &[u8]) -> Result<DistanceMatrix> {
        let c = Container::parse(bytes)?;
        if c.str_field("kind")? != "distance_matrix" {
            return Err(Error::MalformedHeader("not a distance matrix container".into()));
        }
        let kind = DistanceKind::parse(c.str_field("distance")?)?;
        let labels: Vec<String> = serde_json::from_value(c.header["labels"].clone())
            .map_err(|e| Error::MalformedHeader(e.to_string()))?;
        let n = labels.len();
        let values = c.values_f64(n * n.saturating_sub(1) / 2)?;
        DistanceMatrix::new(labels, values, kind)
    }

    /// `l1<TAB>l2<TAB>value` audit listing, one line per unordered pair.
    pub fn write_pairs_tsv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "l1\tl2\tvalue")?;
        for (i, j, v) in self.pairs() {
            writeln!(out, "{}\t{}\t{}", self.labels[i], self.labels[j], v)?;
        }
        Ok(())
    }

    /// Map from label to index.
    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }
}
