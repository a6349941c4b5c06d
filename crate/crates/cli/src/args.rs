use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use semtax::eval::FeatureMode;
use semtax::semcla::GroupMode;
use semtax::{Disambiguation, Measure, SampleLevel};

#[derive(Debug, Parser)]
#[command(name = "semtax", version, about = "Taxonomy-driven text categorization and classification")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute background document frequencies from a corpus.
    BuildIndex(BuildIndexArgs),
    /// Rank taxonomy categories for every corpus document.
    Categorize(CategorizeArgs),
    /// Train a classifier on a labeled corpus and save the model.
    Train(TrainArgs),
    /// Classify corpus documents with a saved model.
    Classify(ClassifyArgs),
    /// Run an experiment config and report precision per method.
    Evaluate(EvaluateArgs),
    /// Choose the extension constant that best separates labeled groups.
    CalibrateAlpha(CalibrateArgs),
    /// Generate the synthetic semantic-gap benchmark.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TextArgs {
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    /// Background frequencies from `build-index`; computed from the corpus if absent.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Drop terms with background document frequency below this.
    #[arg(long, default_value_t = 2)]
    pub min_df: u32,
    /// Drop terms in more than this fraction of background documents.
    #[arg(long, default_value_t = 0.5)]
    pub max_df_ratio: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SemCatArgs {
    #[arg(long = "disambig", alias = "method", default_value = "nearest")]
    pub disambig: Disambiguation,
    #[arg(long, default_value = "lin")]
    pub measure: Measure,
    /// Top tf-idf terms fed to the categorizer (0 keeps all).
    #[arg(long, default_value_t = 10)]
    pub top_terms: usize,
    /// Match labels after folding diacritics and punctuation.
    #[arg(long)]
    pub folded: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Taxonomy whose labels are detected as phrases.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CategorizeArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub semcat: SemCatArgs,
    /// Categories printed per document.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMethod {
    Nb,
    Winnow,
    Llda,
    Semcla,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub method: TrainMethod,
    #[command(flatten)]
    pub text: TextArgs,
    #[arg(long = "disambig", default_value = "nearest")]
    pub disambig: Disambiguation,
    #[arg(long, default_value = "lin")]
    pub measure: Measure,
    #[arg(long, default_value_t = 10)]
    pub top_terms: usize,
    #[arg(long)]
    pub folded: bool,
    /// Feature mode of the classical classifiers.
    #[arg(long, default_value = "terms")]
    pub features: FeatureMode,
    #[arg(long, default_value_t = semtax::semcla::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value = "average")]
    pub mode: GroupMode,
    /// Required for llda.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample level used with `--sample-size` (1, 2 or inf).
    #[arg(long)]
    pub level: Option<SampleLevel>,
    /// Train on at most this many documents per class, drawn with `--seed`.
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Model written by `train`; its header selects the classifier type
    /// and the text pipeline settings.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Overrides the background file recorded in the model.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Experiment TOML file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Machine-readable report (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub semcat: SemCatArgs,
    /// Comma-separated alpha values (default 0, 0.05, ..., 0.5).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Documents kept per group before computing pairwise cosines.
    #[arg(long, default_value_t = 200)]
    pub max_per_group: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 70)]
    pub docs_per_class: usize,
}
