//! The `sre` command line: one binary with a subcommand per stage.

mod config;
mod stages;

pub use config::{parse_config, ConfigError, EventFilter, RunConfig, TrainSplit};
pub use stages::{
    run_dump, run_eval, run_extract, run_pipeline, run_score, run_synth, run_train, synth_spec, train_options, StageError,
};

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::backend::ScorerKind;
use crate::frontend::NumberFormat;

#[derive(Debug, Parser)]
#[command(name = "sre", version, about = "Speaker verification on short trivial events with deep speaker features")]
#[command(after_help = defaults_help())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file of `key=value` lines; `#` starts a comment.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key (repeatable), applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[arg(long, global = true, value_name = "cough|laugh|wei|all")]
    pub event: Option<EventFilter>,
    #[arg(long, global = true, value_name = "cosine|lda|plda")]
    pub scorer: Option<ScorerKind>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (`paths.out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic corpus: WAV files plus a manifest.
    Synth,
    /// Train the network on the manifest and write the model.
    Train,
    /// Write one d-vector per utterance.
    Extract,
    /// Build trials per event and score them.
    Score,
    /// Compute EER and DET points from the score files.
    Eval,
    /// Run every stage in order.
    Pipeline,
    /// Write per-frame speaker features labelled with speaker and event.
    DumpFeatures {
        /// Output file.
        path: PathBuf,
        /// Write exact hexadecimal floats instead of decimals.
        #[arg(long)]
        hex: bool,
    },
    /// Print the effective configuration.
    ShowConfig,
}

fn defaults_help() -> String {
    let mut s = String::from("Config keys and defaults:\n");
    for (k, v) in RunConfig::default().entries() {
        let v = if v.is_empty() { "(derived from paths.out_dir)".to_string() } else { v };
        s.push_str(&format!("  {k}={v}\n"));
    }
    s
}

/// Merges flags into the parsed config.
pub fn resolve_config(cli: &Cli) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let (mut cfg, warnings) = parse_config(cli.config.as_deref(), &cli.overrides)?;
    if let Some(e) = cli.event {
        cfg.event = e;
    }
    if let Some(s) = cli.scorer {
        cfg.backend.kind = s;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok((cfg, warnings))
}

/// Runs a parsed command line and returns the process exit code: 0 on
/// success, 1 for a stage failure, 2 for a config error.
pub fn run(cli: Cli) -> i32 {
    let (cfg, warnings) = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return 2;
        }
    };
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let result = match &cli.command {
        Command::Synth => run_synth(&cfg).map(|_| ()),
        Command::Train => run_train(&cfg).map(|_| ()),
        Command::Extract => run_extract(&cfg).map(|_| ()),
        Command::Score => run_score(&cfg).map(|_| ()),
        Command::Eval => run_eval(&cfg).map(|_| ()),
        Command::Pipeline => run_pipeline(&cfg).map(|_| ()),
        Command::DumpFeatures { path, hex } => {
            let format = if *hex { NumberFormat::Hex } else { NumberFormat::Decimal };
            run_dump(&cfg, path, format).map(|n| eprintln!("dump: {n} rows -> {}", path.display()))
        }
        Command::ShowConfig => {
            print!("{}", cfg.to_text());
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
