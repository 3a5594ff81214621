//! End-to-end run: ingest, filter, silhouette, LDA, centroids, distances,
//! statistics, phylogeny, figure emitters and the optional replicate
//! experiments, each stage writing its artifacts into one directory along
//! with a [`RunManifest`].

mod config;
mod manifest;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{
    ConsensusConfig, CurveConfig, FilterConfig, GenderConfig, InputConfig, LdaConfig, MapConfig, NeighborsConfig,
    NetworkConfig, OutputConfig, PipelineConfig, RegressionConfig, RobustnessConfig, SilhouetteConfig,
};
pub use manifest::{sha256_hex, FileDigest, RunManifest, MANIFEST_FILE};

use crate::corpus::{
    filter_by_count, lid_accuracy, parse_language_meta, parse_wordlists, read_embeddings, read_input, EmbeddingFormat,
    EmbeddingSet, LanguageTable, WordList, ASJP_MEANINGS,
};
use crate::distance::DistanceMatrix;
use crate::embedspace::{gender_component_test, lda_language_distances, neighbor_profile, silhouette_filter};
use crate::error::{Error, Result};
use crate::phylo::{consensus_experiment, neighbor_net_with, robustness_experiment, upgma};
use crate::refdist::{geographic_distance_matrix, lexical_distance_matrix};
use crate::report::{emit_curves, emit_heatmap, emit_map_edges, emit_scatter_lda, CurveTable};
use crate::stats::{
    build_pair_table, cumulative_dimension_curve, family_correlations, fit_model, residual_outliers,
    write_correlation_tsv, PairTable, RegressionFit, MIN_REGRESSION_ROWS,
};

/// A failure tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {}: {} [{}]", self.stage, self.error, self.error.code())
    }
}

impl std::error::Error for StageError {}

trait AtStage<T> {
    fn at(self, stage: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Artifact directory that records a digest for every file written.
pub struct ArtifactDir {
    dir: PathBuf,
    written: Vec<FileDigest>,
}

impl ArtifactDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.written.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV always; a binary container copy as well when `format` is binary.
    pub fn write_matrix(&mut self, stem: &str, m: &DistanceMatrix, format: EmbeddingFormat, seed: u64) -> Result<()> {
        let mut csv = Vec::new();
        m.write_csv(&mut csv, None)?;
        self.write(&format!("{stem}.csv"), &csv)?;
        if format == EmbeddingFormat::Binary {
            let mut bin = Vec::new();
            m.write_binary(&mut bin, Some(seed))?;
            self.write(&format!("{stem}.bin"), &bin)?;
        }
        Ok(())
    }

    pub fn into_outputs(self) -> Vec<FileDigest> {
        self.written
    }
}

/// Parsed inputs plus the digest of every file consumed.
pub struct Inputs {
    pub embeddings: EmbeddingSet,
    pub meta: LanguageTable,
    pub wordlists: Option<WordList>,
    pub digests: Vec<FileDigest>,
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Inputs> {
    let mut digests = Vec::new();
    let mut read = |p: &Path| -> Result<Vec<u8>> {
        let path = cfg.resolve(p);
        let bytes = read_input(&path)?;
        digests.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    };
    let format = cfg.input.format.unwrap_or_else(|| EmbeddingFormat::from_path(&cfg.input.embeddings));
    let embeddings = read_embeddings(&read(&cfg.input.embeddings)?, format)?;
    let meta = parse_language_meta(&read(&cfg.input.metadata)?)?;
    let wordlists = match &cfg.input.wordlists {
        Some(p) => {
            let bytes = read(p)?;
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::MalformedRecord { line: 0, msg: e.to_string() })?;
            Some(parse_wordlists(text, &ASJP_MEANINGS)?)
        }
        None => None,
    };
    Ok(Inputs { embeddings, meta, wordlists, digests })
}

fn tsv_f64(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "NA".into()
    }
}

/// Runs every configured stage, writing artifacts and `manifest.json` into
/// `out_dir`. `command` is recorded verbatim in the manifest.
/// Grid intervals of the tabulated regression lines.
const LINE_POINTS: usize = 50;

/// Fitted response over an evenly spaced geographic grid from 0 to the
/// largest observed distance, one column per raw lexical value.
pub fn regression_lines_tsv(fit: &RegressionFit, pairs: &PairTable, lexical_values: &[f64]) -> String {
    let g_max = pairs.rows.iter().map(|r| r.geographic).fold(0.0, f64::max);
    let mut tsv = String::from("geographic");
    for l in lexical_values {
        let _ = write!(tsv, "\tlexical={l}");
    }
    tsv.push('\n');
    for k in 0..=LINE_POINTS {
        let g = g_max * k as f64 / LINE_POINTS as f64;
        let _ = write!(tsv, "{g}");
        for &l in lexical_values {
            let _ = write!(tsv, "\t{}", fit.predict(g, l));
        }
        tsv.push('\n');
    }
    tsv
}

/// The `k` largest positive and negative residuals as TSV.
pub fn outliers_tsv(fit: &RegressionFit, pairs: &PairTable, k: usize) -> Result<String> {
    let (pos, neg) = residual_outliers(fit, pairs, k)?;
    let mut tsv = String::from("sign\tl1\tl2\tresidual\n");
    for (sign, rows) in [("positive", &pos), ("negative", &neg)] {
        for o in rows {
            let _ = writeln!(tsv, "{sign}\t{}\t{}\t{}", o.l1, o.l2, o.residual);
        }
    }
    Ok(tsv)
}

pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path, command: &str) -> std::result::Result<RunManifest, StageError> {
    cfg.validate().at("config")?;
    let mut out = ArtifactDir::create(out_dir).at("output")?;
    let mut manifest = RunManifest::new(command, cfg);
    let fmt = cfg.output.matrix_format;

    let inputs = ingest(cfg).at("ingest")?;
    manifest.inputs = inputs.digests;
    let meta = inputs.meta;
    let lid = serde_json::json!({
        "accuracy": lid_accuracy(&inputs.embeddings, &meta, false).ok(),
        "accuracy_lid_training": lid_accuracy(&inputs.embeddings, &meta, true).ok(),
    });
    out.write_json("lid.json", &lid).at("ingest")?;

    let set = filter_by_count(&inputs.embeddings, cfg.filter.min_per_language, cfg.filter.max_per_language, cfg.seed)
        .at("filter")?;

    let set = if cfg.silhouette.drop_fraction > 0.0 {
        let (kept, scores) = silhouette_filter(&set, cfg.silhouette.drop_fraction, cfg.silhouette.metric).at("silhouette")?;
        let ids: HashSet<&str> = kept.records().iter().map(|r| r.id.as_str()).collect();
        let mut tsv = String::from("id\tlanguage\tscore\tkept\n");
        for (r, s) in set.records().iter().zip(&scores) {
            let _ = writeln!(tsv, "{}\t{}\t{}\t{}", r.id, r.language, s, ids.contains(r.id.as_str()));
        }
        out.write("silhouette.tsv", tsv.as_bytes()).at("silhouette")?;
        kept
    } else {
        set
    };

    let languages = set.languages();
    let lang_meta = meta.subset(&languages).at("metadata")?;

    let (proj, centroids, emb) = lda_language_distances(&set, cfg.lda.options()).at("lda")?;
    let mut bin = Vec::new();
    proj.write_binary(&mut bin).at("lda")?;
    out.write("lda.bin", &bin).at("lda")?;
    let mut tsv = String::from("iso\tsamples");
    for k in 0..proj.output_dim() {
        let _ = write!(tsv, "\tLD{}", k + 1);
    }
    tsv.push('\n');
    for c in &centroids {
        let _ = write!(tsv, "{}\t{}", c.iso, c.sample_count);
        for v in &c.vector {
            let _ = write!(tsv, "\t{v}");
        }
        tsv.push('\n');
    }
    out.write("centroids.tsv", tsv.as_bytes()).at("centroids")?;

    if set.records().iter().any(|r| r.gender.is_some()) {
        let k = cfg.gender.components.min(proj.output_dim());
        match gender_component_test(&set, &proj, k) {
            Ok(tests) => {
                let mut tsv = String::from("component\td\tp_value\tn_male\tn_female\n");
                for (c, t) in tests.iter().enumerate() {
                    let _ = writeln!(tsv, "LD{}\t{}\t{}\t{}\t{}", c + 1, t.d, t.p_value, t.n1, t.n2);
                }
                out.write("gender_ks.tsv", tsv.as_bytes()).at("centroids")?;
            }
            Err(Error::MissingGroup(_)) | Err(Error::InvalidArgument(_)) => {}
            Err(e) => return Err(StageError { stage: "centroids", error: e }),
        }
    }

    let geo = geographic_distance_matrix(&lang_meta).at("distances")?;
    let lex = match &inputs.wordlists {
        Some(lists) => Some(lexical_distance_matrix(lists, &languages, cfg.lexical).at("distances")?.matrix),
        None => None,
    };
    out.write_matrix("dist_embedding", &emb, fmt, cfg.seed).at("distances")?;
    out.write_matrix("dist_geographic", &geo, fmt, cfg.seed).at("distances")?;
    if let Some(lex) = &lex {
        out.write_matrix("dist_lexical", lex, fmt, cfg.seed).at("distances")?;
    }

    let pairs = build_pair_table(&emb, lex.as_ref(), &geo, &meta).at("stats")?;
    let mut buf = Vec::new();
    pairs.write_tsv(&mut buf).at("stats")?;
    out.write("pairs.tsv", &buf).at("stats")?;
    let spec = cfg.regression.spec();
    if pairs.with_lexical().count() >= MIN_REGRESSION_ROWS {
        let fit = fit_model(&pairs, &spec).at("stats")?;
        out.write_json("regression.json", &fit).at("stats")?;
        if !cfg.regression.line_lexical_values.is_empty() {
            let tsv = regression_lines_tsv(&fit, &pairs, &cfg.regression.line_lexical_values);
            out.write("regression_lines.tsv", tsv.as_bytes()).at("stats")?;
        }
        let k = cfg.regression.outliers.min(fit.rows.len() / 2);
        if k > 0 {
            let tsv = outliers_tsv(&fit, &pairs, k).at("stats")?;
            out.write("outliers.tsv", tsv.as_bytes()).at("stats")?;
        }
        let rows = family_correlations(&pairs, &meta, cfg.regression.family_min_languages, &spec);
        let mut buf = Vec::new();
        write_correlation_tsv(&rows, &mut buf).at("stats")?;
        out.write("correlations.tsv", &buf).at("stats")?;
    }
    if let Some(lex) = &lex {
        let top = cfg.curve.max_dim.min(proj.output_dim());
        if top >= 2 && pairs.with_lexical().count() >= MIN_REGRESSION_ROWS {
            let ns: Vec<usize> = (2..=top).collect();
            let curve = cumulative_dimension_curve(&set, &proj, lex, &geo, &meta, &ns, &spec).at("stats")?;
            let table = CurveTable::from(&curve);
            out.write("curve.tsv", table.to_tsv().as_bytes()).at("stats")?;
            let (svg, _) = emit_curves(&table, None, None).at("report")?;
            out.write("curve.svg", svg.as_bytes()).at("report")?;
        }
    }
    let ks: Vec<usize> = cfg.neighbors.ks.iter().copied().filter(|&k| k < emb.len()).collect();
    if !ks.is_empty() {
        let profile = neighbor_profile(&emb, &ks).at("stats")?;
        let mut tsv = String::from("iso");
        for k in &ks {
            let _ = write!(tsv, "\tk{k}");
        }
        tsv.push('\n');
        for p in &profile {
            tsv.push_str(&p.iso);
            for v in &p.means {
                let _ = write!(tsv, "\t{}", tsv_f64(*v));
            }
            tsv.push('\n');
        }
        out.write("neighbors.tsv", tsv.as_bytes()).at("stats")?;
    }

    let tree = upgma(&emb).at("phylo")?;
    out.write("tree.nwk", format!("{}\n", tree.to_newick(None)).as_bytes()).at("phylo")?;
    out.write_json("tree.json", &tree).at("phylo")?;
    if cfg.network.enabled && emb.len() >= 3 {
        let net = neighbor_net_with(&emb, cfg.network.weight_threshold).at("phylo")?;
        out.write("network.nex", net.to_nexus().as_bytes()).at("phylo")?;
        out.write_json("network.json", &net).at("phylo")?;
    }

    if emb.len() >= 2 {
        let geojson = emit_map_edges(&emb, &meta, cfg.map.percentile).at("report")?;
        out.write_json("map_edges.geojson", &geojson).at("report")?;
    }
    let heat = emit_heatmap(&emb, &meta).at("report")?;
    out.write("heatmap.svg", heat.svg.as_bytes()).at("report")?;
    out.write("heatmap.csv", heat.csv.as_bytes()).at("report")?;
    if proj.output_dim() >= 2 {
        let svg = emit_scatter_lda(&centroids, &meta).at("report")?;
        out.write("scatter.svg", svg.as_bytes()).at("report")?;
    }

    if cfg.consensus.enabled {
        let exp = consensus_experiment(&set, cfg.consensus.n_per_language, cfg.consensus.n_trees, cfg.seed, cfg.lda.options())
            .at("experiments")?;
        out.write("consensus.nwk", format!("{}\n", exp.consensus.to_newick()).as_bytes()).at("experiments")?;
        out.write_json("consensus.json", &exp).at("experiments")?;
    }
    if cfg.robustness.enabled {
        let curve = robustness_experiment(&set, &cfg.robustness.sizes, cfg.robustness.replicates, cfg.seed, cfg.lda.options())
            .at("experiments")?;
        let table = CurveTable::from(&curve);
        out.write("robustness.tsv", table.to_tsv().as_bytes()).at("experiments")?;
        let (svg, _) = emit_curves(&table, Some(cfg.robustness.loess_span), Some(&["mean"])).at("report")?;
        out.write("robustness.svg", svg.as_bytes()).at("report")?;
        out.write_json("robustness.json", &curve).at("experiments")?;
    }

    manifest.outputs = out.into_outputs();
    manifest.write(out_dir).at("output")?;
    Ok(manifest)
}
