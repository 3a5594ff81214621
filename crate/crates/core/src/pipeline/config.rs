use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingFormat;
use crate::embedspace::{LdaOptions, Ridge, SilhouetteMetric};
use crate::error::{Error, Result};
use crate::refdist::LexicalConfig;
use crate::stats::{ModelSpec, ModelTerms, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub embeddings: PathBuf,
    /// Inferred from the extension when absent.
    pub format: Option<EmbeddingFormat>,
    pub metadata: PathBuf,
    /// Lexical analyses are skipped when absent.
    pub wordlists: Option<PathBuf>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            embeddings: "embeddings.bin".into(),
            format: None,
            metadata: "languages.tsv".into(),
            wordlists: Some("wordlists.tsv".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_per_language: usize,
    pub max_per_language: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { min_per_language: 20, max_per_language: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SilhouetteConfig {
    /// Fraction of lowest-scoring utterances removed per language; 0 disables.
    pub drop_fraction: f64,
    pub metric: SilhouetteMetric,
}

impl Default for SilhouetteConfig {
    fn default() -> Self {
        SilhouetteConfig { drop_fraction: 0.05, metric: SilhouetteMetric::Cosine }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    /// Fixed ridge on the within-class scatter; automatic when absent.
    pub ridge: Option<f64>,
    pub max_components: Option<usize>,
}

impl LdaConfig {
    pub fn options(&self) -> LdaOptions {
        LdaOptions { ridge: self.ridge.map_or(Ridge::Auto, Ridge::Fixed), max_components: self.max_components }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    pub response: Transform,
    pub geographic: Transform,
    pub lexical: Transform,
    /// Pairs listed per sign in the residual outlier table.
    pub outliers: usize,
    /// Families and subfamilies need more languages than this for their own row.
    pub family_min_languages: usize,
    /// Raw lexical distances at which fitted lines over geographic
    /// distance are tabulated.
    pub line_lexical_values: Vec<f64>,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        let m = ModelSpec::default();
        RegressionConfig {
            response: m.response,
            geographic: m.geographic,
            lexical: m.lexical,
            outliers: 100,
            family_min_languages: 5,
            line_lexical_values: vec![1.40, 1.95, 2.50],
        }
    }
}

impl RegressionConfig {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            response: self.response,
            geographic: self.geographic,
            lexical: self.lexical,
            terms: ModelTerms::Interaction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Largest discriminant count; capped at the fitted output dimension.
    pub max_dim: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { max_dim: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeighborsConfig {
    pub ks: Vec<usize>,
}

impl Default for NeighborsConfig {
    fn default() -> Self {
        NeighborsConfig { ks: vec![1, 2, 3, 5, 10] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub percentile: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { percentile: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub enabled: bool,
    pub weight_threshold: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { enabled: true, weight_threshold: crate::phylo::DEFAULT_WEIGHT_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    pub enabled: bool,
    pub n_per_language: usize,
    pub n_trees: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig { enabled: false, n_per_language: 50, n_trees: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    pub enabled: bool,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    /// LOESS span applied when plotting; the TSV holds raw values.
    pub loess_span: f64,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig {
            enabled: false,
            sizes: vec![5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
            replicates: 10,
            loess_span: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenderConfig {
    /// Leading discriminants tested for a male/female difference.
    pub components: usize,
}

impl Default for GenderConfig {
    fn default() -> Self {
        GenderConfig { components: 3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Distance matrices are always written as CSV; `binary` adds a GLEM1 copy.
    pub matrix_format: EmbeddingFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub input: InputConfig,
    pub filter: FilterConfig,
    pub silhouette: SilhouetteConfig,
    pub lda: LdaConfig,
    pub lexical: LexicalConfig,
    pub regression: RegressionConfig,
    pub curve: CurveConfig,
    pub neighbors: NeighborsConfig,
    pub map: MapConfig,
    pub network: NetworkConfig,
    pub consensus: ConsensusConfig,
    pub robustness: RobustnessConfig,
    pub gender: GenderConfig,
    pub output: OutputConfig,
    /// Directory relative input paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            input: InputConfig::default(),
            filter: FilterConfig::default(),
            silhouette: SilhouetteConfig::default(),
            lda: LdaConfig::default(),
            lexical: LexicalConfig::default(),
            regression: RegressionConfig::default(),
            curve: CurveConfig::default(),
            neighbors: NeighborsConfig::default(),
            map: MapConfig::default(),
            network: NetworkConfig::default(),
            consensus: ConsensusConfig::default(),
            robustness: RobustnessConfig::default(),
            gender: GenderConfig::default(),
            output: OutputConfig::default(),
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::BadConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = crate::corpus::read_input(path)?;
        let text = String::from_utf8(bytes).map_err(|e| Error::BadConfig(e.to_string()))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadConfig(m));
        if self.filter.min_per_language == 0 || self.filter.max_per_language < self.filter.min_per_language {
            return bad("filter: need 1 <= min_per_language <= max_per_language".into());
        }
        if !(0.0..1.0).contains(&self.silhouette.drop_fraction) {
            return bad("silhouette.drop_fraction must be in [0, 1)".into());
        }
        if self.lda.ridge.is_some_and(|r| !(r >= 0.0 && r.is_finite())) {
            return bad("lda.ridge must be a finite value >= 0".into());
        }
        if self.regression.line_lexical_values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("regression.line_lexical_values must be finite and >= 0".into());
        }
        if self.curve.max_dim < 2 {
            return bad("curve.max_dim must be >= 2".into());
        }
        if !(self.map.percentile > 0.0 && self.map.percentile < 1.0) {
            return bad("map.percentile must be in (0, 1)".into());
        }
        if self.neighbors.ks.contains(&0) {
            return bad("neighbors.ks entries must be >= 1".into());
        }
        if self.robustness.enabled && (self.robustness.replicates < 2 || self.robustness.sizes.is_empty()) {
            return bad("robustness needs replicates >= 2 and at least one size".into());
        }
        if !(self.robustness.loess_span > 0.0 && self.robustness.loess_span <= 1.0) {
            return bad("robustness.loess_span must be in (0, 1]".into());
        }
        if self.consensus.enabled && (self.consensus.n_trees == 0 || self.consensus.n_per_language < 2) {
            return bad("consensus needs n_trees >= 1 and n_per_language >= 2".into());
        }
        Ok(())
    }
}
