use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dialkit",
    version,
    about = "Dialogue corpus compiler and evaluation harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest dialogues and write prompt-formatted training records.
    Compile(CompileArgs),
    /// Score a prediction file against gold dialogues.
    Evaluate(EvaluateArgs),
    /// Per-bucket metric tables over dialogue aspects.
    Analyze(AnalyzeArgs),
    /// Draw a low-resource, per-intent or domain-transfer split manifest.
    Split(SplitArgs),
    /// Corpus statistics and per-task annotation coverage.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum AdapterArg {
    Canonical,
    Wizard,
    IntentTable,
    SummPair,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input dialogue file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Record layout of the input file.
    #[arg(long, value_enum, default_value = "canonical")]
    pub adapter: AdapterArg,
    /// Dataset name for adapters whose records do not carry one
    /// (defaults to the input file stem).
    #[arg(long)]
    pub dataset: Option<String>,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    /// Split manifest restricting which dialogues or turns are used.
    #[arg(long, value_name = "FILE", requires = "partition")]
    pub manifest: Option<PathBuf>,
    /// Manifest partition to keep.
    #[arg(long, requires = "manifest")]
    pub partition: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output record file (line-delimited JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Comma-separated tasks: nlg,dst,pol,ic,mcqa,nup,summ or `all`.
    #[arg(long, default_value = "all")]
    pub tasks: String,
    /// Template file with `<task>.source` / `<task>.target` lines.
    #[arg(long, value_name = "FILE")]
    pub templates: Option<PathBuf>,
    /// Negative candidates per positive next-utterance example.
    #[arg(long, default_value_t = 1)]
    pub neg_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the ingest rejection log.
    #[arg(long, value_name = "FILE")]
    pub rejections: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum EvalTask {
    Nlg,
    Dst,
    Ic,
    Summ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ConstraintArg {
    /// The goal's own constraints.
    Goal,
    /// The final gold dialogue state.
    Gold,
    /// The final state parsed from `--dst-pred`.
    Generated,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum)]
    pub task: EvalTask,
    /// Gold dialogues (canonical format).
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Prediction file (line-delimited JSON).
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Entity database for Inform (one entity per line).
    #[arg(long, value_name = "FILE")]
    pub db: Option<PathBuf>,
    /// Source of the constraints used for the database lookup.
    #[arg(long, value_enum, default_value = "goal")]
    pub db_constraints: ConstraintArg,
    /// State predictions used when `--db-constraints generated`.
    #[arg(long, value_name = "FILE")]
    pub dst_pred: Option<PathBuf>,
    /// Write the report as JSON here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub manifest: ManifestArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub task: EvalTask,
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Comma-separated aspects: sp1_len, sp2_len, utr_num, refe_len.
    #[arg(long)]
    pub aspects: Option<String>,
    /// Bucket file with `aspect = b0, b1, ...` lines.
    #[arg(long, value_name = "FILE")]
    pub buckets: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub db: Option<PathBuf>,
    /// Write the table as CSV here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write the report as JSON here.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ProtocolArg {
    Percent,
    PerIntent,
    DomainTransfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum UnitArg {
    Dialogue,
    Turn,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    /// Percentage kept by `percent`.
    #[arg(long)]
    pub pct: Option<f64>,
    /// Examples per intent kept by `per_intent`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Held-out domain for `domain_transfer`.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub seed: u64,
    /// Sampling unit for `percent`.
    #[arg(long, value_enum, default_value = "dialogue")]
    pub unit: UnitArg,
    /// Source dialogues (canonical format).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Manifest output (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
}
