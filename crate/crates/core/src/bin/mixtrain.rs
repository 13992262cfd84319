use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mixtrain::pipeline::{
    run_noise_experiment, run_stage, run_table4_experiment, Artifacts, NoiseModel, PipelineConfig,
};

#[derive(Parser)]
#[command(
    name = "mixtrain",
    version,
    about = "Multi-task mixture training, ensembling and evaluation on toy corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Load dataset manifests into the run directory.
    Ingest(Common),
    /// Relevance-score transform and negative sampling.
    Transform(Common),
    /// Dev merges, reshuffles and cross-validation folds.
    Split(Common),
    /// Write every member's epoch plans.
    Schedule(Common),
    /// Multi-task training of every member.
    Train(Common),
    /// Per-task fine-tuning from the best multi-task checkpoint.
    Finetune(Common),
    /// Member predictions on each task's evaluation split.
    Predict(Common),
    /// Threshold selection and majority voting.
    Ensemble(Common),
    /// Per-question answer ranking.
    Rank(Common),
    /// Accuracy, precision, MRR and Spearman reports.
    Evaluate(Common),
    /// All stages in order.
    Run(Common),
    /// Single-source versus mixed-source ensemble comparison.
    #[command(name = "experiment-table4")]
    ExperimentTable4 {
        #[command(flatten)]
        common: Common,
        /// Use the synthetic noise model instead of trained members.
        #[arg(long)]
        synthetic: bool,
        /// Trial count; defaults to the config's table4.trials.
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn load(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&common.config).context("loading config")?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn stage(name: &str, common: &Common) -> Result<()> {
    let cfg = load(common)?;
    run_stage(name, &cfg, &Artifacts::new(&common.out))?;
    Ok(())
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(c) => stage("ingest", &c),
        Command::Transform(c) => stage("transform", &c),
        Command::Split(c) => stage("split", &c),
        Command::Schedule(c) => stage("schedule", &c),
        Command::Train(c) => stage("train", &c),
        Command::Finetune(c) => stage("finetune", &c),
        Command::Predict(c) => stage("predict", &c),
        Command::Ensemble(c) => stage("ensemble", &c),
        Command::Rank(c) => stage("rank", &c),
        Command::Evaluate(c) => {
            stage("evaluate", &c)?;
            print!("{}", fs::read_to_string(c.out.join("reports/summary.txt"))?);
            Ok(())
        }
        Command::Run(c) => {
            let cfg = load(&c)?;
            let reports = mixtrain::pipeline::run_pipeline(&cfg, &c.out)?;
            for r in reports {
                print!("{}", r.to_table());
            }
            Ok(())
        }
        Command::ExperimentTable4 {
            common,
            synthetic,
            trials,
        } => {
            let cfg = load(&common)?;
            let trials = trials.unwrap_or(cfg.table4.trials);
            let report = if synthetic {
                run_noise_experiment(&NoiseModel::default(), trials, cfg.seed)
            } else {
                let mut cfg = cfg;
                cfg.table4.trials = trials;
                run_table4_experiment(&cfg, &common.out)
            }
            .map_err(|e| e.in_stage("experiment-table4"))?;
            let dir = common.out.join("table4");
            write(&dir.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
            write(&dir.join("report.txt"), &report.to_table())?;
            print!("{}", report.to_table());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let top = e.to_string();
            eprintln!("error: {top}");
            for cause in e.chain().skip(1).map(|c| c.to_string()) {
                if !top.contains(&cause) {
                    eprintln!("  caused by: {cause}");
                }
            }
            ExitCode::FAILURE
        }
    }
}
