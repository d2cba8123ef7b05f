//! `ipricing`: turn pricing pages into pricing documents, check and analyze
//! those documents, and score extractions.
//!
//! Exit codes: 0 success (warnings allowed), 1 unmatched score inputs,
//! 2 ERROR diagnostics or an unreadable document, 3 pipeline failure,
//! 64 usage error.

mod analyze;
mod score;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNMATCHED: u8 = 1;
pub const EXIT_DIAGNOSTICS: u8 = 2;
pub const EXIT_PIPELINE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "ipricing", version, about = "SaaS pricing page extraction and evaluation toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a pricing document from a page.
    Transform(transform::TransformArgs),
    /// Parse and validate a pricing document, printing its diagnostics.
    Validate {
        file: PathBuf,
    },
    /// Print element counts and the configuration space of a pricing document.
    Analyze(analyze::AnalyzeArgs),
    /// Score predictions against gold annotations and write a metrics report.
    Score(score::ScoreArgs),
    /// Run the extraction passes against a live provider and save its replies as replay fixtures.
    RecordFixtures(transform::RecordArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Http,
    Replay,
    Null,
}

/// Exactly one page source.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Fetch with a plain HTTP GET.
    #[arg(long)]
    pub url: Option<String>,
    /// Render through a WebDriver endpoint so script-built content is included.
    #[arg(long)]
    pub rendered_url: Option<String>,
    /// Read a local HTML file.
    #[arg(long)]
    pub file: Option<String>,
    /// Manifest with one locator per line, optionally prefixed by `http`, `rendered` or `file`.
    #[arg(long)]
    pub batch: Option<PathBuf>,
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Transform(args) => transform::run(args),
        Command::Validate { file } => analyze::validate(&file),
        Command::Analyze(args) => analyze::run(args),
        Command::Score(args) => score::run(args),
        Command::RecordFixtures(args) => transform::record(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            });
        }
    };
    ExitCode::from(run(cli))
}
