mod bundle;
mod dataset;
mod serve;
mod walk;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Turns assembly-step text into highlighted, animated scene instructions.
#[derive(Debug, Parser)]
#[command(name = "vigen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP gateway for one training session.
    Serve(ServeArgs),
    /// Run every step headlessly and write (or check) scene snapshots.
    Walk(WalkArgs),
    /// Generate a seeded SFT corpus from the lexicon and templates.
    Dataset(DatasetArgs),
    /// Check an SFT dataset file against the rule-based extractor.
    CheckDataset(CheckDatasetArgs),
    /// Validate a component manifest.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtractorKind {
    Rule,
    Remote,
}

#[derive(Debug, Args)]
struct SessionArgs {
    #[arg(long, default_value = "data/pneumatic/manifest.json")]
    manifest: PathBuf,
    #[arg(long, default_value = "data/pneumatic/steps.txt")]
    steps: PathBuf,
    #[arg(long, default_value = "data/pneumatic/lexicon.json")]
    lexicon: PathBuf,
    /// Verb, preposition and template configuration for the rule extractor.
    #[arg(long, default_value = "data/pneumatic/extractor.json")]
    rules: PathBuf,
    #[arg(long, value_enum, default_value_t = ExtractorKind::Rule)]
    extractor: ExtractorKind,
    /// URL of the remote extractor; required with `--extractor remote`.
    #[arg(long, required_if_eq("extractor", "remote"))]
    endpoint: Option<String>,
    /// Remote extractor timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long, default_value_t = 8844)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
}

#[derive(Debug, Args)]
struct WalkArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long, default_value = "data/pneumatic/golden")]
    golden_dir: PathBuf,
    /// Compare against the existing snapshots instead of writing them.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long, default_value = "data/pneumatic/lexicon.json")]
    lexicon: PathBuf,
    #[arg(long, default_value = "data/pneumatic/extractor.json")]
    rules: PathBuf,
    #[arg(long, default_value_t = 420, allow_negative_numbers = true)]
    n: i64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckDatasetArgs {
    #[arg(long, default_value = "data/pneumatic/lexicon.json")]
    lexicon: PathBuf,
    #[arg(long, default_value = "data/pneumatic/extractor.json")]
    rules: PathBuf,
    dataset: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value = "data/pneumatic/manifest.json")]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve::run(args),
        Command::Walk(args) => walk::run(args),
        Command::Dataset(args) => dataset::generate(args),
        Command::CheckDataset(args) => dataset::check(args),
        Command::Validate(args) => bundle::validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
