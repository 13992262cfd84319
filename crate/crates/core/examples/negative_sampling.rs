//! Same-page negatives for positive-only FAQ pairs, then the train/eval split.
//!
//!     cargo run -p mixtrain --example negative_sampling

use anyhow::Result;
use mixtrain::corpus::{medquad_negative_sample, medquad_train_eval_split, MedquadSplit};
use mixtrain::synth::faq_pages;

fn main() -> Result<()> {
    let positives = faq_pages("medquad", 3, 3, 1);
    let out = medquad_negative_sample(&positives, 2, 42)?;
    println!(
        "{} positives -> {} pairs ({} positives short of negatives)",
        positives.len(),
        out.dataset.len(),
        out.deficient_positives
    );
    for s in out.dataset.samples.iter().take(6) {
        println!(
            "{:+.0}  {:<22} {} | {}",
            s.target_score.unwrap_or_default(),
            s.id,
            s.text_b,
            s.text_a
        );
    }

    let split = MedquadSplit { train: 21, eval: 6 };
    let (train, eval) = medquad_train_eval_split(&out.dataset, split, 42);
    println!("\nsplit: {} train / {} eval", train.len(), eval.len());
    Ok(())
}
