use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::tree::Dendrogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusTree {
    pub reference: Dendrogram,
    /// Percentage of input trees containing each reference merge's clade,
    /// indexed like `reference.merges`.
    pub support: Vec<f64>,
    pub n_trees: usize,
}

impl ConsensusTree {
    pub fn to_newick(&self) -> String {
        self.reference.to_newick(Some(&self.support))
    }
}

pub fn consensus(trees: &[Dendrogram], reference: &Dendrogram) -> Result<ConsensusTree> {
    if trees.is_empty() {
        return Err(Error::InvalidArgument("consensus needs at least one tree".into()));
    }
    for t in trees {
        t.check_same_leaves(reference)?;
    }
    let clade_sets: Vec<HashSet<BTreeSet<String>>> = trees.iter().map(|t| t.clusters().into_iter().collect()).collect();
    let support = reference
        .clusters()
        .iter()
        .map(|c| {
            let hits = clade_sets.iter().filter(|s| s.contains(c)).count();
            100.0 * hits as f64 / trees.len() as f64
        })
        .collect();
    Ok(ConsensusTree { reference: reference.clone(), support, n_trees: trees.len() })
}
