use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commlang::pipeline::{run, PipelineConfig, PipelineError, Stage};

/// Style and topic models of online community language.
#[derive(Parser)]
#[command(name = "commlang", version)]
struct Cli {
    /// Pipeline config (JSON). Defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Workspace directory; overrides `paths.workspace`.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    /// Replace every seed in the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Parse dumps and assemble threads.
    Ingest,
    /// Split threads into train and test; build the distractor.
    Split,
    /// Train the POS tagger on the pre-tagged corpus.
    TrainTagger,
    /// Build the word-only, hybrid and tag-only vocabularies.
    BuildVocab,
    /// Train one trigram model per community and vocabulary.
    TrainStyle,
    /// Compute tf-idf and train the LDA models.
    TrainTopic,
    /// Cluster training threads into community topic profiles.
    Profile,
    /// Score, classify and evaluate test documents.
    Classify,
    /// Correlate normalized scores with karma and k-index.
    Correlate,
    /// Write summary tables, histograms and topic words.
    Report,
    /// Every stage in order.
    All,
}

impl From<Command> for Stage {
    fn from(c: Command) -> Stage {
        match c {
            Command::Ingest => Stage::Ingest,
            Command::Split => Stage::Split,
            Command::TrainTagger => Stage::TrainTagger,
            Command::BuildVocab => Stage::BuildVocab,
            Command::TrainStyle => Stage::TrainStyle,
            Command::TrainTopic => Stage::TrainTopic,
            Command::Profile => Stage::Profile,
            Command::Classify => Stage::Classify,
            Command::Correlate => Stage::Correlate,
            Command::Report => Stage::Report,
            Command::All => Stage::All,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(ws) = &cli.workspace {
        // relative to the invocation directory, not the config file
        config.paths.workspace = Some(std::env::current_dir().map(|d| d.join(ws)).unwrap_or_else(|_| ws.clone()));
    }
    if let Some(seed) = cli.seed_override {
        config.override_seeds(seed);
    }
    for outcome in run(cli.command.into(), &config)? {
        eprintln!("{}: {}", outcome.stage, outcome.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
