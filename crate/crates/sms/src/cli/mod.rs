pub mod commands;
pub mod config;
pub mod manifest;
pub mod presets;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Result, SmsError};
use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "sms", about = "Spiking marching scheme: train spiking networks as time integrators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Round-trip encoding error of the three spike codecs on a fixed signal
    BenchEncoding {
        /// Output directory for the error table
        #[arg(long, default_value = "runs/bench")]
        out: PathBuf,
    },
    /// Solve the reference problem and write trajectories
    GenData {
        /// Preset name or config file path
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a network on the generated trajectory
    Train {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint: one-step and cascade error series
    Evaluate {
        #[arg(long)]
        config: String,
        /// Checkpoint path; defaults to <out_dir>/<name>.ckpt
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in experiment presets
    Presets,
}

/// A config argument is either a built-in preset name or a path to a config
/// file in the same text format `presets` prints.
pub fn resolve_config(arg: &str, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = match presets::by_name(arg) {
        Some(cfg) => cfg,
        None => {
            let text = std::fs::read_to_string(arg).map_err(|e| {
                SmsError::InvalidConfig(format!("{arg} is not a preset and cannot be read: {e}"))
            })?;
            ExperimentConfig::from_text(&text)?
        }
    };
    if let Some(s) = seed {
        cfg.train.seed = s;
    }
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BenchEncoding { out } => {
            commands::cmd_bench_encoding(&out)?;
        }
        Command::GenData { config, seed, out } => {
            let cfg = resolve_config(&config, seed, out)?;
            let files = commands::cmd_gen_data(&cfg)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Train { config, seed, out } => {
            let cfg = resolve_config(&config, seed, out)?;
            let outcome = commands::cmd_train(&cfg)?;
            if let (Some(first), Some(last)) = (outcome.history.first(), outcome.history.last()) {
                println!("loss {first:.6} -> {last:.6} over {} epochs", outcome.history.len());
            }
            println!("wrote {}", outcome.checkpoint.display());
        }
        Command::Evaluate { config, checkpoint, seed, out } => {
            let cfg = resolve_config(&config, seed, out)?;
            let ckpt = checkpoint.unwrap_or_else(|| commands::checkpoint_path(&cfg));
            let outcome = commands::cmd_evaluate(&cfg, &ckpt)?;
            for f in outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Presets => {
            print!("{}", commands::cmd_presets());
        }
    }
    Ok(())
}

/// 0 on success, 2 for configuration or parse problems, 1 otherwise.
pub fn exit_code(err: &SmsError) -> i32 {
    match err {
        SmsError::InvalidConfig(_) | SmsError::Parse(_) => 2,
        _ => 1,
    }
}
