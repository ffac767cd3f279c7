use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use driftlab::analyze::AnalyzeOptions;
use driftlab::score::{ScoreArgs, ScoreOptions};
use driftlab::{analyze, report, score, simulate};
use driftlab_core::depmetrics::{MddOptions, RootHandling};
use driftlab_core::stats::PValueMethod;
use driftlab_core::textmetrics::CountingProfile;
use tracing_subscriber::EnvFilter;

/// Simulate CEFR-prompted Spanish tutoring dialogues and measure how tutor
/// output tracks the prompted level.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured model × level × chat.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overwrite an existing run instead of resuming it.
        #[arg(long)]
        force: bool,
    },
    /// Compute per-message metrics for tutor messages.
    Score {
        /// Directory of transcript `.jsonl` files.
        #[arg(long)]
        transcripts: PathBuf,
        /// CoNLL-U file or directory with dependency parses.
        #[arg(long)]
        conllu: Option<PathBuf>,
        /// TOML file describing the surprisal scorer.
        #[arg(long)]
        scorer: Option<PathBuf>,
        #[arg(long, default_value = "metrics.csv")]
        out: PathBuf,
        /// Counting rules for the readability formulas: native or textstat.
        #[arg(long, default_value = "native")]
        profile: CountingProfile,
        /// Leave punctuation out of dependency distances.
        #[arg(long)]
        exclude_punct: bool,
        /// Count the root as a zero-length arc.
        #[arg(long)]
        root_in_denominator: bool,
    },
    /// Fit mixed models and compute curves, densities and drift.
    Analyze {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
        /// Bonferroni family size; defaults to two contrasts per fit.
        #[arg(long)]
        bonferroni_m: Option<usize>,
        /// normal or between-groups-t.
        #[arg(long, default_value = "normal")]
        p_value: PValueMethod,
        /// Round raw p-values to N decimals before adjusting.
        #[arg(long, value_name = "N")]
        round_raw_p: Option<u32>,
    },
    /// Render `report.md` from an analysis directory.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, force } => simulate::run(&config, force),
        Command::Score { transcripts, conllu, scorer, out, profile, exclude_punct, root_in_denominator } => {
            let root = if root_in_denominator { RootHandling::ZeroInDenominator } else { RootHandling::Exclude };
            score::run(ScoreArgs {
                transcripts: &transcripts,
                conllu: conllu.as_deref(),
                scorer: scorer.as_deref(),
                out: &out,
                opts: ScoreOptions { profile, mdd: MddOptions { exclude_punct, root } },
            })
        }
        Command::Analyze { metrics, out, bonferroni_m, p_value, round_raw_p } => {
            analyze::run(&metrics, &out, AnalyzeOptions { bonferroni_m, p_method: p_value, round_raw_p })
        }
        Command::Report { dir } => report::run(&dir),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
