//! Reference distances: lexical (LDN/LDND over core-vocabulary word lists)
//! and geographic (great-circle between language coordinates).

mod geo;
mod lexical;

pub use geo::{geographic_distance_matrix, haversine_km, GeoPoint, EARTH_RADIUS_KM};
pub use lexical::{
    ldn_pair, ldnd, levenshtein, lexical_distance_matrix, LexicalConfig, LexicalMatrix, LexicalVariant,
    SynonymRule,
};
