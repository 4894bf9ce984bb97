//! `rlforge` — drive the radar auto-annotation pipeline from one TOML file.
//!
//! Five subcommands mirror the five stages; each reads the same
//! configuration and the files earlier stages wrote under the output
//! directory:
//!
//! ```text
//! rlforge simulate --config campaign.toml
//! rlforge process  --config campaign.toml
//! rlforge fuse     --config campaign.toml
//! rlforge evaluate --config campaign.toml
//! rlforge report   --config campaign.toml
//! ```
//!
//! Diagnostics go to stderr; set `RLFORGE_LOG=info` (or `debug`) for more.
//! Exit codes: 0 success, 2 configuration error, 3 missing input file,
//! 4 I/O or file-format error, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rlforge_core::pipeline::{
    run_evaluate, run_fuse, run_process, run_report, run_simulate, PipelineConfig,
};

#[derive(Parser)]
#[command(name = "rlforge", version, about = "Auto-annotate radar data from aerial labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline configuration file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the worker-pool size.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the scene seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the emitted artifact formats
    /// (comma-separated from: rd, rda, targets, features).
    #[arg(long)]
    formats: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize raw radar cubes, ground truth, and aerial label frames.
    Simulate(StageArgs),
    /// Run the radar chain: raw cubes to range-Doppler-azimuth cubes.
    Process(StageArgs),
    /// Pair frames, project labels onto the ground grid, emit the dataset.
    Fuse(StageArgs),
    /// Score the emitted annotations against the simulated ground truth.
    Evaluate(StageArgs),
    /// Summarize the campaign: appearances, detections, drops, recall.
    Report(StageArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Process(_) => "process",
            Command::Fuse(_) => "fuse",
            Command::Evaluate(_) => "evaluate",
            Command::Report(_) => "report",
        }
    }
}

fn load(args: &StageArgs) -> rlforge_core::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    cfg.apply_overrides(
        args.out.as_deref(),
        args.jobs,
        args.seed,
        args.formats.as_deref(),
    );
    Ok(cfg)
}

fn run(command: &Command) -> rlforge_core::Result<()> {
    match command {
        Command::Simulate(args) => {
            let summary = run_simulate(&load(args)?)?;
            println!(
                "simulated {} radar frames and {} camera frames",
                summary.radar_frames, summary.camera_frames
            );
        }
        Command::Process(args) => {
            let summary = run_process(&load(args)?)?;
            println!("processed {} frames", summary.frames);
        }
        Command::Fuse(args) => {
            let outcome = run_fuse(&load(args)?)?;
            println!(
                "paired {} of {} radar frames; {} of {} detected instances mapped; \
                 {} files under {}",
                outcome.summary.paired_frames,
                outcome.summary.radar_frames,
                outcome.summary.mapped_instances,
                outcome.summary.detected_instances,
                outcome.files_written,
                outcome
                    .manifest_path
                    .parent()
                    .unwrap_or(&outcome.manifest_path)
                    .display(),
            );
        }
        Command::Evaluate(args) => print!("{}", run_evaluate(&load(args)?)?.text),
        Command::Report(args) => print!("{}", run_report(&load(args)?)?.text),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RLFORGE_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rlforge {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code().clamp(1, 255) as u8)
        }
    }
}
