//! Dimensionality reduction (PCA, LDA), silhouette outlier filtering,
//! centroid language embeddings and cosine distances between them.

mod language;
mod projection;
mod silhouette;

pub use language::{
    cosine_distance_matrix, gender_component_test, language_centroids, neighbor_profile,
    LanguageEmbedding, NeighborProfile,
};
pub use projection::{
    class_scatter, fit_lda, fit_lda_from_scatter, fit_pca, project, project_rows, LdaOptions, Projection,
    ProjectionKind, Ridge, Scatter,
};
pub use silhouette::{silhouette_filter, silhouette_scores, SilhouetteMetric};

use crate::corpus::EmbeddingSet;
use crate::distance::DistanceMatrix;
use crate::error::Result;

/// LDA fit → projection → centroids → cosine distances over all
/// discriminant dimensions. Returns the projection, centroids and matrix.
pub fn lda_language_distances(
    set: &EmbeddingSet,
    opts: LdaOptions,
) -> Result<(Projection, Vec<LanguageEmbedding>, DistanceMatrix)> {
    let proj = fit_lda(set, opts)?;
    let centroids = language_centroids(&project(set, &proj)?)?;
    let dims = proj.output_dim();
    let m = if dims >= 2 {
        cosine_distance_matrix(&centroids, dims)?
    } else {
        // A single discriminant (two languages): cosine degenerates to sign agreement.
        let padded: Vec<LanguageEmbedding> = centroids
            .iter()
            .map(|c| LanguageEmbedding { vector: vec![c.vector[0], 0.0], ..c.clone() })
            .collect();
        cosine_distance_matrix(&padded, 2)?
    };
    Ok((proj, centroids, m))
}
