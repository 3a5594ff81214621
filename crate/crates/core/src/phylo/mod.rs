//! UPGMA dendrograms, NeighborNet split networks, clade-support consensus
//! and the replicate experiments built on them.

mod consensus;
mod experiments;
mod ordering;
mod splits;
mod tree;

pub use consensus::{consensus, ConsensusTree};
pub use experiments::{
    consensus_experiment, replicate_correlation, robustness_experiment, ConsensusExperiment, RobustnessCurve,
};
pub use ordering::{canonical_cycle, neighbor_net_order};
pub use splits::{
    circular_inverse, circular_metric, circular_metric_transpose, circular_nnls, neighbor_net, neighbor_net_with,
    Split, SplitSystem, DEFAULT_WEIGHT_THRESHOLD,
};
pub use tree::{cophenetic, upgma, Dendrogram, Merge, TIE_TOLERANCE};
