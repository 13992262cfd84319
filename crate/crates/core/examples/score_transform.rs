//! Relevance levels and gold ranks to shifted regression targets.
//!
//!     cargo run -p mixtrain --example score_transform

use anyhow::Result;
use mixtrain::corpus::{apply_qa_scores, qa_modified_score};
use mixtrain::synth::ranked_answers;

fn main() -> Result<()> {
    println!("relevance  rank/group  score");
    for (s, i, m) in [(4, 1, 25), (4, 25, 25), (3, 1, 4), (3, 4, 4), (2, 1, 5), (1, 3, 3)] {
        println!("{s:>9}  {i:>4}/{m:<5}  {:+.4}", qa_modified_score(s, i, m)?);
    }

    let mut qa = ranked_answers("qa", 2, 5, 0, 1);
    let updated = apply_qa_scores(&mut qa)?;
    println!("\n{updated} answers rescored:");
    for s in &qa.samples {
        println!(
            "{:<10} relevance {} rank {} -> {:+.3}",
            s.id,
            s.gold_relevance.unwrap_or_default(),
            s.gold_rank.unwrap_or_default(),
            s.target_score.unwrap_or_default()
        );
    }
    Ok(())
}
