//! Quantitative language-relationship analyses over per-utterance speech
//! embeddings: discriminant projections, centroid language embeddings,
//! embedding/lexical/geographic distance matrices, their statistical
//! comparison, and phylogenetic summaries (UPGMA trees, NeighborNet split
//! networks, consensus trees).
//!
//! Heavy inner loops run on rayon when the `parallel` feature is enabled
//! (the default); all reductions use a fixed chunking so results do not
//! depend on the thread count.

pub mod container;
pub mod corpus;
pub mod distance;
pub mod embedspace;
pub mod error;
pub mod par;
pub mod phylo;
pub mod pipeline;
pub mod refdist;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;

pub use distance::{DistanceKind, DistanceMatrix};
pub use error::{Error, Result};
