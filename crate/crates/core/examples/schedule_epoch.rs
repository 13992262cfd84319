//! One epoch of the mixture schedule: every in-domain batch plus a
//! fraction alpha of external batches, in shuffled order.
//!
//!     cargo run -p mixtrain --example schedule_epoch -- 0.5

use anyhow::Result;
use mixtrain::scheduler::{plan_epoch, MixtureConfig};
use mixtrain::synth::{nli_triples, question_pairs};

fn main() -> Result<()> {
    let alpha: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(0.5);
    let mednli = nli_triples("mednli", 20, false, 0.0, 1);
    let rqe = question_pairs("rqe", 40, 0.0, 1);
    let mnli = nli_triples("mnli", 60, true, 0.0, 1);
    let cfg = MixtureConfig {
        alpha,
        batch_size: 8,
        ..MixtureConfig::default()
    };
    for epoch in 1..=2 {
        let plan = plan_epoch(&[&mednli, &rqe, &mnli], &cfg, epoch)?;
        println!(
            "epoch {epoch}: N = {}, external = {}, L = {}",
            plan.in_domain_count,
            plan.external_count,
            plan.len()
        );
        let order: Vec<String> = plan
            .batches
            .iter()
            .map(|b| format!("{}#{}", b.dataset_name, b.index))
            .collect();
        println!("  {}", order.join(" "));
    }
    Ok(())
}
