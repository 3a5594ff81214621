use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use glem_core::corpus::{
    filter_by_count, lid_accuracy, parse_language_meta, parse_wordlists, read_embeddings, read_input, write_embeddings,
    EmbeddingFormat, EmbeddingSet, LanguageTable, WordList, ASJP_MEANINGS,
};
use glem_core::embedspace::{
    cosine_distance_matrix, fit_lda, fit_pca, lda_language_distances, neighbor_profile, project, silhouette_filter,
    LanguageEmbedding, Projection,
};
use glem_core::phylo::{consensus_experiment, neighbor_net_with, robustness_experiment, upgma};
use glem_core::pipeline::{
    outliers_tsv, regression_lines_tsv, run_pipeline, sha256_hex, ArtifactDir, FileDigest, PipelineConfig,
    RunManifest, StageError,
};
use glem_core::refdist::{geographic_distance_matrix, lexical_distance_matrix};
use glem_core::report::{emit_curves, emit_heatmap, emit_map_edges, emit_scatter_lda, CurveTable};
use glem_core::stats::{
    build_pair_table, cumulative_dimension_curve, family_correlations, fit_model, write_correlation_tsv, PairTable,
};
use glem_core::synth::{generate, SynthConfig};
use glem_core::{DistanceKind, DistanceMatrix, Error, Result};

use crate::{Cli, Command, ConfigAction, DistKind, PairInputs};

/// Per-invocation state: resolved config, artifact directory and the
/// manifest collecting input digests.
struct Ctx {
    cfg: PipelineConfig,
    fmt: EmbeddingFormat,
    out: ArtifactDir,
    manifest: RunManifest,
}

impl Ctx {
    fn new(cfg: PipelineConfig, out_dir: &Path, command: &str) -> Result<Ctx> {
        let fmt = cfg.output.matrix_format;
        let manifest = RunManifest::new(command, &cfg);
        Ok(Ctx { cfg, fmt, out: ArtifactDir::create(out_dir)?, manifest })
    }

    fn read(&mut self, p: &Path) -> Result<Vec<u8>> {
        let bytes = read_input(p)?;
        self.manifest.inputs.push(FileDigest { path: p.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    fn embeddings(&mut self, p: &Path) -> Result<EmbeddingSet> {
        read_embeddings(&self.read(p)?, EmbeddingFormat::from_path(p))
    }

    fn meta(&mut self, p: &Path) -> Result<LanguageTable> {
        parse_language_meta(&self.read(p)?)
    }

    fn wordlists(&mut self, p: &Path) -> Result<WordList> {
        let bytes = self.read(p)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::MalformedRecord { line: 0, msg: e.to_string() })?;
        parse_wordlists(text, &ASJP_MEANINGS)
    }

    fn matrix(&mut self, p: &Path, kind: DistanceKind) -> Result<DistanceMatrix> {
        let bytes = self.read(p)?;
        match EmbeddingFormat::from_path(p) {
            EmbeddingFormat::Csv => DistanceMatrix::read_csv(&bytes, kind),
            EmbeddingFormat::Binary => DistanceMatrix::read_binary(&bytes),
        }
    }

    fn write_matrix(&mut self, stem: &str, m: &DistanceMatrix) -> Result<()> {
        self.out.write_matrix(stem, m, self.fmt, self.cfg.seed)
    }

    fn write_embeddings(&mut self, stem: &str, set: &EmbeddingSet) -> Result<()> {
        let ext = if self.fmt == EmbeddingFormat::Csv { "csv" } else { "bin" };
        let name = format!("{stem}.{ext}");
        let path = self.out.path().join(&name);
        write_embeddings(set, &path, self.fmt)?;
        let bytes = std::fs::read(&path)?;
        self.out.write(&name, &bytes)
    }

    fn write_projection(&mut self, name: &str, p: &Projection) -> Result<()> {
        let mut bin = Vec::new();
        p.write_binary(&mut bin)?;
        self.out.write(name, &bin)
    }

    fn finish(mut self) -> Result<()> {
        let dir = self.out.path().to_path_buf();
        self.manifest.outputs = self.out.into_outputs();
        self.manifest.write(&dir)
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.output.matrix_format = f.into();
    }
    Ok(cfg)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest { .. } => "ingest",
        Command::Filter { .. } => "filter",
        Command::Silhouette { .. } => "silhouette",
        Command::Pca { .. } => "pca",
        Command::Lda { .. } => "lda",
        Command::Dist { .. } => "dist",
        Command::Correlate(_) => "correlate",
        Command::Regress(_) => "regress",
        Command::Curve { .. } => "curve",
        Command::Neighbors { .. } => "neighbors",
        Command::Tree { .. } => "tree",
        Command::Network { .. } => "network",
        Command::Consensus { .. } => "consensus",
        Command::Robustness { .. } => "robustness",
        Command::MapEdges { .. } => "map-edges",
        Command::Heatmap { .. } => "heatmap",
        Command::Scatter { .. } => "scatter",
        Command::Pipeline => "pipeline",
        Command::Config { .. } => "config",
        Command::Synth { .. } => "synth",
        Command::Verify { .. } => "verify",
    }
}

pub fn run(cli: Cli) -> std::result::Result<(), StageError> {
    let name = command_name(&cli.command);
    let at = |error: Error| StageError { stage: name, error };
    let cfg = load_config(&cli).map_err(|error| StageError { stage: "config", error })?;
    match &cli.command {
        Command::Pipeline => {
            if cli.config.is_none() {
                return Err(StageError { stage: "config", error: Error::BadConfig("pipeline needs --config".into()) });
            }
            let line: Vec<String> = std::env::args().collect();
            run_pipeline(&cfg, &cli.out_dir, &line.join(" ")).map(|_| ())
        }
        Command::Config { action: ConfigAction::Init } => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Verify { dir } => verify(dir).map_err(at),
        Command::Synth { families, languages_per_family, utterances, dim } => {
            let sc = SynthConfig {
                families: *families,
                languages_per_family: *languages_per_family,
                utterances_per_language: *utterances,
                dim: *dim,
                ..SynthConfig::default()
            };
            synth(&sc, cfg, &cli.out_dir).map_err(at)
        }
        cmd => {
            let line: Vec<String> = std::env::args().collect();
            let mut ctx = Ctx::new(cfg, &cli.out_dir, &line.join(" ")).map_err(at)?;
            dispatch(&mut ctx, cmd).map_err(at)?;
            ctx.finish().map_err(at)
        }
    }
}

fn synth(sc: &SynthConfig, mut cfg: PipelineConfig, out_dir: &Path) -> Result<()> {
    let corpus = generate(sc, cfg.seed)?;
    corpus.write_files(out_dir)?;
    cfg.filter.min_per_language = cfg.filter.min_per_language.min(sc.utterances_per_language);
    std::fs::write(out_dir.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

fn verify(dir: &Path) -> Result<()> {
    let manifest = RunManifest::load(dir)?;
    let bad = manifest.verify(dir);
    if bad.is_empty() {
        println!("ok: {} inputs, {} outputs", manifest.inputs.len(), manifest.outputs.len());
        Ok(())
    } else {
        Err(Error::MalformedHeader(format!("digest mismatch: {}", bad.join(", "))))
    }
}

fn pair_table(ctx: &mut Ctx, p: &PairInputs) -> Result<(PairTable, LanguageTable)> {
    let emb = ctx.matrix(&p.embedding, DistanceKind::Embedding)?;
    let geo = ctx.matrix(&p.geographic, DistanceKind::Geographic)?;
    let lex = match &p.lexical {
        Some(l) => Some(ctx.matrix(l, DistanceKind::Lexical)?),
        None => None,
    };
    let meta = ctx.meta(&p.meta.metadata)?;
    Ok((build_pair_table(&emb, lex.as_ref(), &geo, &meta)?, meta))
}

fn centroids_tsv(centroids: &[LanguageEmbedding]) -> String {
    let dims = centroids.first().map_or(0, |c| c.vector.len());
    let mut tsv = String::from("iso\tsamples");
    for k in 0..dims {
        let _ = write!(tsv, "\tLD{}", k + 1);
    }
    tsv.push('\n');
    for c in centroids {
        let _ = write!(tsv, "{}\t{}", c.iso, c.sample_count);
        for v in &c.vector {
            let _ = write!(tsv, "\t{v}");
        }
        tsv.push('\n');
    }
    tsv
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Result<()> {
    let opts = ctx.cfg.lda.options();
    match cmd {
        Command::Ingest { emb, metadata } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let counts: BTreeMap<&str, usize> =
                set.language_groups().into_iter().map(|(l, rows)| (l, rows.len())).collect();
            let mut summary = serde_json::json!({
                "utterances": set.len(),
                "dim": set.dim(),
                "languages": counts,
            });
            if let Some(m) = metadata {
                let meta = ctx.meta(m)?;
                meta.subset(&set.languages())?;
                summary["lid_accuracy"] = serde_json::json!(lid_accuracy(&set, &meta, false).ok());
                summary["lid_accuracy_training"] = serde_json::json!(lid_accuracy(&set, &meta, true).ok());
            }
            ctx.out.write_json("ingest.json", &summary)?;
            ctx.write_embeddings("embeddings", &set)
        }
        Command::Filter { emb, min, max } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let (lo, hi) = (min.unwrap_or(ctx.cfg.filter.min_per_language), max.unwrap_or(ctx.cfg.filter.max_per_language));
            let kept = filter_by_count(&set, lo, hi, ctx.cfg.seed)?;
            ctx.write_embeddings("filtered", &kept)
        }
        Command::Silhouette { emb, drop_fraction } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let frac = drop_fraction.unwrap_or(ctx.cfg.silhouette.drop_fraction);
            let (kept, scores) = silhouette_filter(&set, frac, ctx.cfg.silhouette.metric)?;
            let mut tsv = String::from("id\tlanguage\tscore\n");
            for (r, s) in set.records().iter().zip(&scores) {
                let _ = writeln!(tsv, "{}\t{}\t{}", r.id, r.language, s);
            }
            ctx.out.write("silhouette.tsv", tsv.as_bytes())?;
            ctx.write_embeddings("silhouette_kept", &kept)
        }
        Command::Pca { emb, components } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let proj = fit_pca(&set, *components)?;
            ctx.write_projection("pca.bin", &proj)?;
            ctx.write_embeddings("pca_projected", &project(&set, &proj)?)
        }
        Command::Lda { emb } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let (proj, centroids, m) = lda_language_distances(&set, opts)?;
            ctx.write_projection("lda.bin", &proj)?;
            ctx.out.write("centroids.tsv", centroids_tsv(&centroids).as_bytes())?;
            ctx.write_matrix("dist_embedding", &m)
        }
        Command::Dist { kind } => match kind {
            DistKind::Embed { emb, dims } => {
                let set = ctx.embeddings(&emb.embeddings)?;
                let m = match dims {
                    None => lda_language_distances(&set, opts)?.2,
                    Some(n) => {
                        let proj = fit_lda(&set, opts)?;
                        let centroids = glem_core::embedspace::language_centroids(&project(&set, &proj)?)?;
                        cosine_distance_matrix(&centroids, *n)?
                    }
                };
                ctx.write_matrix("dist_embedding", &m)
            }
            DistKind::Lex { wordlists, languages } => {
                let lists = ctx.wordlists(wordlists)?;
                let langs = languages.clone().unwrap_or_else(|| lists.languages().map(String::from).collect());
                let lex = lexical_distance_matrix(&lists, &langs, ctx.cfg.lexical)?;
                if !lex.missing.is_empty() {
                    eprintln!("warning: no word list for {}", lex.missing.join(", "));
                }
                ctx.write_matrix("dist_lexical", &lex.matrix)
            }
            DistKind::Geo { meta } => {
                let table = ctx.meta(&meta.metadata)?;
                let rows: Vec<_> = table.iter().cloned().collect();
                ctx.write_matrix("dist_geographic", &geographic_distance_matrix(&rows)?)
            }
        },
        Command::Correlate(p) => {
            let (t, meta) = pair_table(ctx, p)?;
            let mut buf = Vec::new();
            t.write_tsv(&mut buf)?;
            ctx.out.write("pairs.tsv", &buf)?;
            let rows = family_correlations(&t, &meta, ctx.cfg.regression.family_min_languages, &ctx.cfg.regression.spec());
            let mut buf = Vec::new();
            write_correlation_tsv(&rows, &mut buf)?;
            ctx.out.write("correlations.tsv", &buf)
        }
        Command::Regress(p) => {
            let (t, _) = pair_table(ctx, p)?;
            let fit = fit_model(&t, &ctx.cfg.regression.spec())?;
            ctx.out.write_json("regression.json", &fit)?;
            if !ctx.cfg.regression.line_lexical_values.is_empty() {
                let tsv = regression_lines_tsv(&fit, &t, &ctx.cfg.regression.line_lexical_values);
                ctx.out.write("regression_lines.tsv", tsv.as_bytes())?;
            }
            let k = ctx.cfg.regression.outliers.min(fit.rows.len() / 2);
            if k > 0 {
                ctx.out.write("outliers.tsv", outliers_tsv(&fit, &t, k)?.as_bytes())?;
            }
            Ok(())
        }
        Command::Curve { emb, lexical, meta, max_dim } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let lex = ctx.matrix(lexical, DistanceKind::Lexical)?;
            let table = ctx.meta(&meta.metadata)?;
            let geo = geographic_distance_matrix(&table.subset(&set.languages())?)?;
            let proj = fit_lda(&set, opts)?;
            let top = max_dim.unwrap_or(ctx.cfg.curve.max_dim).min(proj.output_dim());
            let ns: Vec<usize> = (2..=top.max(2)).collect();
            let curve = cumulative_dimension_curve(&set, &proj, &lex, &geo, &table, &ns, &ctx.cfg.regression.spec())?;
            let t = CurveTable::from(&curve);
            ctx.out.write("curve.tsv", t.to_tsv().as_bytes())?;
            let (svg, _) = emit_curves(&t, None, None)?;
            ctx.out.write("curve.svg", svg.as_bytes())
        }
        Command::Neighbors { m, ks } => {
            let d = ctx.matrix(&m.matrix, DistanceKind::Embedding)?;
            let ks = ks.clone().unwrap_or_else(|| ctx.cfg.neighbors.ks.clone());
            let profile = neighbor_profile(&d, &ks)?;
            let mut tsv = String::from("iso");
            for k in &ks {
                let _ = write!(tsv, "\tk{k}");
            }
            tsv.push('\n');
            for p in &profile {
                tsv.push_str(&p.iso);
                for v in &p.means {
                    let _ = write!(tsv, "\t{v}");
                }
                tsv.push('\n');
            }
            ctx.out.write("neighbors.tsv", tsv.as_bytes())
        }
        Command::Tree { m } => {
            let d = ctx.matrix(&m.matrix, DistanceKind::Embedding)?;
            let tree = upgma(&d)?;
            ctx.out.write("tree.nwk", format!("{}\n", tree.to_newick(None)).as_bytes())?;
            ctx.out.write_json("tree.json", &tree)
        }
        Command::Network { m } => {
            let d = ctx.matrix(&m.matrix, DistanceKind::Embedding)?;
            let net = neighbor_net_with(&d, ctx.cfg.network.weight_threshold)?;
            ctx.out.write("network.nex", net.to_nexus().as_bytes())?;
            ctx.out.write_json("network.json", &net)
        }
        Command::Consensus { emb } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let c = &ctx.cfg.consensus;
            let exp = consensus_experiment(&set, c.n_per_language, c.n_trees, ctx.cfg.seed, opts)?;
            if !exp.excluded.is_empty() {
                eprintln!("warning: too few samples, excluded {}", exp.excluded.join(", "));
            }
            ctx.out.write("consensus.nwk", format!("{}\n", exp.consensus.to_newick()).as_bytes())?;
            ctx.out.write_json("consensus.json", &exp)
        }
        Command::Robustness { emb } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let r = ctx.cfg.robustness.clone();
            let curve = robustness_experiment(&set, &r.sizes, r.replicates, ctx.cfg.seed, opts)?;
            let t = CurveTable::from(&curve);
            ctx.out.write("robustness.tsv", t.to_tsv().as_bytes())?;
            let (svg, _) = emit_curves(&t, Some(r.loess_span), Some(&["mean"]))?;
            ctx.out.write("robustness.svg", svg.as_bytes())?;
            ctx.out.write_json("robustness.json", &curve)
        }
        Command::MapEdges { m, meta, percentile } => {
            let d = ctx.matrix(&m.matrix, DistanceKind::Embedding)?;
            let table = ctx.meta(&meta.metadata)?;
            let g = emit_map_edges(&d, &table, percentile.unwrap_or(ctx.cfg.map.percentile))?;
            ctx.out.write_json("map_edges.geojson", &g)
        }
        Command::Heatmap { m, meta } => {
            let d = ctx.matrix(&m.matrix, DistanceKind::Embedding)?;
            let table = ctx.meta(&meta.metadata)?;
            let h = emit_heatmap(&d, &table)?;
            ctx.out.write("heatmap.svg", h.svg.as_bytes())?;
            ctx.out.write("heatmap.csv", h.csv.as_bytes())
        }
        Command::Scatter { emb, meta } => {
            let set = ctx.embeddings(&emb.embeddings)?;
            let table = ctx.meta(&meta.metadata)?;
            let (_, centroids, _) = lda_language_distances(&set, opts)?;
            ctx.out.write("scatter.svg", emit_scatter_lda(&centroids, &table)?.as_bytes())
        }
        Command::Pipeline | Command::Config { .. } | Command::Synth { .. } | Command::Verify { .. } => {
            unreachable!("handled before dispatch")
        }
    }
}
