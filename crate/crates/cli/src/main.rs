//! `specialty` command-line tool.
//!
//! Exit codes: 0 success, 1 pipeline error, 2 input or schema error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use specialty::keys::AuthorScope;
use specialty::YearWindow;

#[derive(Parser, Debug)]
#[command(name = "specialty", version, about = "Approximate the research specialty of a publication record")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Validate a JSON-lines corpus and report rejected lines.
    Ingest(IngestArgs),
    /// Build the seed record.
    Seed(SeedCmd),
    /// Build the seed record and select key values per field.
    Keys(KeysCmd),
    /// Run seed, key values and approximation end to end.
    Approx(ApproxCmd),
    /// Rank prominent authors and compute mutual coverage for candidates.
    Reviewers(ReviewersArgs),
    /// Coverage of a publication record by the key values of a run.
    Coverage(CoverageArgs),
    /// Generate a synthetic corpus with planted specialties.
    Generate(GenerateArgs),
    /// Precision and recall of a run against ground-truth labels.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug, Serialize)]
struct OutArg {
    /// Run directory for all outputs and the manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Stop at the first malformed line.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize, Clone)]
struct SeedArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// File with one publication id per line ('#' starts a comment).
    #[arg(long)]
    ids: Option<PathBuf>,
    /// Initial publication id; may be repeated.
    #[arg(long = "id")]
    id: Vec<String>,
    /// Add publications referenced by the initial record.
    #[arg(long)]
    extend: bool,
    /// Keep only these document types (comma separated).
    #[arg(long, value_delimiter = ',')]
    doc_types: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum ScopeArg {
    Auto,
    All,
    Reprint,
}

impl From<ScopeArg> for AuthorScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Auto => AuthorScope::Auto,
            ScopeArg::All => AuthorScope::AllAuthors,
            ScopeArg::Reprint => AuthorScope::ReprintOnly,
        }
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

#[derive(Args, Debug, Serialize, Clone)]
struct KeyArgs {
    #[arg(long, default_value_t = 0.8, value_parser = unit_interval)]
    threshold_cell: f64,
    #[arg(long, default_value_t = 0.8, value_parser = unit_interval)]
    threshold_title: f64,
    #[arg(long, default_value_t = 0.8, value_parser = unit_interval)]
    threshold_author: f64,
    #[arg(long, default_value_t = 0.8, value_parser = unit_interval)]
    threshold_ref: f64,
    /// Minimum title-word length in characters.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    min_word_len: u32,
    /// Key title words a title needs to count as covered.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    title_words_required: u32,
    #[arg(long, value_enum, default_value_t = ScopeArg::Auto)]
    author_scope: ScopeArg,
    /// Count only DOI-form references.
    #[arg(long)]
    doi_only_refs: bool,
}

#[derive(Args, Debug, Serialize, Clone)]
struct ApproxArgs {
    /// Publication years, inclusive: "2010-2012" or "2012".
    #[arg(long)]
    window: YearWindow,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=4))]
    min_fields: u8,
    /// Also re-derive key values with the approximation as seed.
    #[arg(long)]
    rederive: bool,
}

#[derive(Args, Debug, Serialize)]
struct SeedCmd {
    #[command(flatten)]
    #[serde(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct KeysCmd {
    #[command(flatten)]
    #[serde(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(flatten)]
    keys: KeyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct ApproxCmd {
    #[command(flatten)]
    #[serde(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(flatten)]
    keys: KeyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    approx: ApproxArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct ReviewersArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Directory of an `approx` run.
    #[arg(long)]
    run: PathBuf,
    /// Focal author as "SURNAME I".
    #[arg(long)]
    focal: Option<String>,
    /// Co-publication years that disqualify a candidate; defaults to the five
    /// years ending with the approximation window.
    #[arg(long)]
    conflict_window: Option<YearWindow>,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct CoverageArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    run: PathBuf,
    /// File with the record's publication ids.
    #[arg(long)]
    record: PathBuf,
    /// Label for the record in the report.
    #[arg(long, default_value = "record")]
    subject: String,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    /// Generator config as JSON; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's rng_seed.
    #[arg(long)]
    rng_seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long)]
    target: String,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::dispatch(cli.command) as u8)
}
