//! `glem`: command-line front end. Every subcommand writes its artifacts
//! and a `manifest.json` into `--out-dir`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glem_core::corpus::EmbeddingFormat;
use glem_core::error::Category;

#[derive(Parser, Debug)]
#[command(name = "glem", version, about = "Language-relationship analyses over speech embeddings")]
pub struct Cli {
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config; `glem config init` prints every key with its default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Format of embedding and matrix outputs (matrices always get a CSV copy).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Binary,
}

impl From<Format> for EmbeddingFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => EmbeddingFormat::Csv,
            Format::Binary => EmbeddingFormat::Binary,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct EmbIn {
    /// Utterance embeddings (`.csv`, otherwise the binary container).
    #[arg(long)]
    pub embeddings: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MatrixIn {
    /// Distance matrix (`.csv`, otherwise the binary container).
    #[arg(long)]
    pub matrix: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MetaIn {
    /// Language metadata TSV.
    #[arg(long)]
    pub metadata: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PairInputs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub geographic: PathBuf,
    #[arg(long)]
    pub lexical: Option<PathBuf>,
    #[command(flatten)]
    pub meta: MetaIn,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate inputs, report LID accuracy and re-save embeddings in `--format`.
    Ingest {
        #[command(flatten)]
        emb: EmbIn,
        #[arg(long)]
        metadata: Option<PathBuf>,
    },
    /// Drop sparse languages and subsample large ones.
    Filter {
        #[command(flatten)]
        emb: EmbIn,
        #[arg(long)]
        min: Option<usize>,
        #[arg(long)]
        max: Option<usize>,
    },
    /// Remove the lowest-silhouette utterances per language.
    Silhouette {
        #[command(flatten)]
        emb: EmbIn,
        #[arg(long)]
        drop_fraction: Option<f64>,
    },
    /// Fit PCA and save the projection and projected embeddings.
    Pca {
        #[command(flatten)]
        emb: EmbIn,
        #[arg(long)]
        components: usize,
    },
    /// Fit LDA; save the projection, centroids and embedding distances.
    Lda {
        #[command(flatten)]
        emb: EmbIn,
    },
    /// Distance matrices.
    Dist {
        #[command(subcommand)]
        kind: DistKind,
    },
    /// Pair table and per-family correlation table.
    Correlate(PairInputs),
    /// Interaction regression and residual outliers.
    Regress(PairInputs),
    /// Correlations against the number of leading discriminants.
    Curve {
        #[command(flatten)]
        emb: EmbIn,
        #[arg(long)]
        lexical: PathBuf,
        #[command(flatten)]
        meta: MetaIn,
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Mean distance to the k nearest languages.
    Neighbors {
        #[command(flatten)]
        m: MatrixIn,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
    },
    /// UPGMA tree (Newick and JSON).
    Tree {
        #[command(flatten)]
        m: MatrixIn,
    },
    /// NeighborNet split network (Nexus and JSON).
    Network {
        #[command(flatten)]
        m: MatrixIn,
    },
    /// Clade support over trees from disjoint subsamples.
    Consensus {
        #[command(flatten)]
        emb: EmbIn,
    },
    /// Replicate correlation against sample size.
    Robustness {
        #[command(flatten)]
        emb: EmbIn,
    },
    /// GeoJSON edges between the closest language pairs.
    MapEdges {
        #[command(flatten)]
        m: MatrixIn,
        #[command(flatten)]
        meta: MetaIn,
        #[arg(long)]
        percentile: Option<f64>,
    },
    /// Family-sorted heatmap (SVG and reordered CSV).
    Heatmap {
        #[command(flatten)]
        m: MatrixIn,
        #[command(flatten)]
        meta: MetaIn,
    },
    /// Language centroids on the first two discriminants.
    Scatter {
        #[command(flatten)]
        emb: EmbIn,
        #[command(flatten)]
        meta: MetaIn,
    },
    /// Every stage end to end, as configured by `--config`.
    Pipeline,
    /// Config helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Write a planted-structure synthetic corpus and a matching config.
    Synth {
        #[arg(long, default_value_t = 4)]
        families: usize,
        #[arg(long, default_value_t = 5)]
        languages_per_family: usize,
        #[arg(long, default_value_t = 200)]
        utterances: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
    },
    /// Re-check the digests recorded in `<dir>/manifest.json`.
    Verify {
        dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum DistKind {
    /// Cosine distances between LDA centroids.
    Embed {
        #[command(flatten)]
        emb: EmbIn,
        /// Leading discriminants used; all when absent.
        #[arg(long)]
        dims: Option<usize>,
    },
    /// LDN/LDND between word lists.
    Lex {
        #[arg(long)]
        wordlists: PathBuf,
        /// Restrict to these languages; all with word lists when absent.
        #[arg(long, value_delimiter = ',')]
        languages: Option<Vec<String>>,
    },
    /// Great-circle distances between language coordinates.
    Geo {
        #[command(flatten)]
        meta: MetaIn,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConfigAction {
    /// Print the default config.
    Init,
}

fn exit_code(c: Category) -> u8 {
    match c {
        Category::Config => 2,
        Category::Input => 3,
        Category::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: stage {}: {} [{}]", e.stage, e.error, e.error.code());
            ExitCode::from(exit_code(e.error.category()))
        }
    }
}
