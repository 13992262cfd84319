//! Single-source versus mixed-source ensembles under the synthetic noise
//! model; pass a config path to compare trained toy members instead.
//!
//!     cargo run -p mixtrain --example table4_experiment
//!     cargo run -p mixtrain --example table4_experiment -- crates/core/configs/toy.toml

use anyhow::Result;
use mixtrain::pipeline::{run_noise_experiment, run_table4_experiment, NoiseModel, PipelineConfig};

fn main() -> Result<()> {
    let report = match std::env::args().nth(1) {
        Some(path) => {
            let cfg = PipelineConfig::load(path)?;
            let out = std::env::temp_dir().join("mixtrain-table4");
            run_table4_experiment(&cfg, out)?
        }
        None => run_noise_experiment(&NoiseModel::default(), 20, 2019)?,
    };
    let last = report.trials.last().map(|t| t.rows.clone()).unwrap_or_default();
    println!("{:<48} {:>8} {:>8}", "Model", "Avg Acc", "Esm Acc");
    for r in &last {
        println!("{:<48} {:>8.2} {:>8.2}", r.label(), r.avg_acc, r.esm_acc);
    }
    println!(
        "\nmixed groupings beat their average in {}/{} trials",
        report.mixed_wins,
        report.trials.len()
    );
    println!(
        "mean improvement: single-source {:+.2}, mixed-source {:+.2}",
        report.single_mean_improvement, report.mixed_mean_improvement
    );
    Ok(())
}
