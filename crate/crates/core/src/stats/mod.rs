//! Comparison of distance matrices: correlations, KS tests, OLS with an
//! interaction term, cumulative-dimension curves and LOESS smoothing.

mod correlation;
mod curve;
mod families;
mod ks;
mod loess;
mod pairs;
mod regression;

pub use correlation::{mean_std, pearson, ranks, spearman};
pub use curve::{cumulative_dimension_curve, distance_correlations, CumulativeCurve, CurvePoint, DistanceCorrelations};
pub use families::{family_correlations, write_correlation_tsv, CorrelationRow};
pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use loess::loess_smooth;
pub use pairs::{build_pair_table, PairRow, PairTable};
pub use regression::{
    fit_interaction_model, fit_model, ols, residual_outliers, ModelSpec, ModelTerms, OlsFit, Outlier, RegressionFit,
    Transform, MIN_REGRESSION_ROWS,
};
