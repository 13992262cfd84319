//! Ranking answers (predicted positives first) and scoring the ranking.
//!
//!     cargo run -p mixtrain --example rank_and_evaluate

use anyhow::Result;
use mixtrain::corpus::apply_qa_scores;
use mixtrain::inference::{rank_questions, EnsembleRow, RankedAnswer};
use mixtrain::metrics::evaluate;
use mixtrain::synth::ranked_answers;

fn main() -> Result<()> {
    let mut gold = ranked_answers("qa", 3, 5, 0, 4);
    apply_qa_scores(&mut gold)?;
    // A noisy system: the gold score plus a deterministic wobble.
    let rows: Vec<(String, RankedAnswer)> = gold
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let score = s.target_score.unwrap_or_default() + if i % 3 == 0 { -0.6 } else { 0.2 };
            (
                s.question_id.clone().unwrap_or_default(),
                RankedAnswer {
                    answer_id: s.id.clone(),
                    positive: score >= 0.0,
                    score,
                },
            )
        })
        .collect();
    let mut out = Vec::new();
    for list in rank_questions(rows) {
        println!("{}:", list.question_id);
        for (i, a) in list.answers.iter().enumerate() {
            println!(
                "  {}. {:<10} {:+.2} {}",
                i + 1,
                a.answer_id,
                a.score,
                if a.positive { "+" } else { "-" }
            );
            out.push(EnsembleRow {
                sample_id: a.answer_id.clone(),
                label: usize::from(a.positive),
                score: a.score,
                rank: Some(i + 1),
            });
        }
    }
    print!("\n{}", evaluate(&gold, &out)?.to_table());
    Ok(())
}
