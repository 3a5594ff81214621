//! Figure-equivalent emitters: GeoJSON map edges, family-sorted heatmap,
//! discriminant scatter and curve charts (SVG plus tabular data).

mod curves;
mod heatmap;
mod map;
mod svg;

pub use curves::{emit_curves, plotted_series, CurveTable};
pub use heatmap::{emit_heatmap, emit_scatter_lda, heatmap_order, scatter_bounds, Heatmap};
pub use map::{emit_map_edges, map_edges, nearest_rank_threshold, MapEdge};
pub use svg::PALETTE;
