use std::collections::BTreeMap;

use super::Dataset;
use crate::error::{Error, Result};

/// Relevance level from which an answer counts as correct.
pub const GOLD_POSITIVE_RELEVANCE: u8 = 3;

/// Shift applied after spreading scores so that the sign encodes correctness.
pub const QA_SCORE_SHIFT: f64 = -2.0;

/// Modified relevance score of the `rank`-th answer (1-based) among the
/// `group_size` answers sharing relevance `relevance`, already shifted.
///
/// Unshifted values are spread uniformly over `(s-1, s]`; the result lies
/// in `(s-3, s-2]`.
pub fn qa_modified_score(relevance: u8, rank: u32, group_size: u32) -> Result<f64> {
    if !(1..=4).contains(&relevance) {
        return Err(Error::OutOfRange(format!("relevance {relevance} not in 1..=4")));
    }
    if group_size == 0 || rank == 0 || rank > group_size {
        return Err(Error::OutOfRange(format!("rank {rank} not in 1..={group_size}")));
    }
    let spread = f64::from(rank - 1) / f64::from(group_size);
    Ok(f64::from(relevance) - spread + QA_SCORE_SHIFT)
}

/// Rewrites `target_score` of every sample that carries `question_id`,
/// `gold_relevance` and `gold_rank`.
///
/// Within each (question, relevance) group the answers are ordered by
/// `gold_rank`, so both group-local and question-wide ranks work. Samples
/// without relevance metadata keep their score. Returns the number of
/// rewritten samples.
pub fn apply_qa_scores(dataset: &mut Dataset) -> Result<usize> {
    let mut groups: BTreeMap<(String, u8), Vec<(u32, usize)>> = BTreeMap::new();
    for (idx, s) in dataset.samples.iter().enumerate() {
        if let (Some(q), Some(rel), Some(rank)) = (&s.question_id, s.gold_relevance, s.gold_rank) {
            groups.entry((q.clone(), rel)).or_default().push((rank, idx));
        }
    }

    let mut rewritten = 0;
    for ((question, rel), mut members) in groups {
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::OutOfRange(format!(
                "gold_rank {} repeated within question `{question}` relevance {rel}",
                w[0].0
            )));
        }
        let m = members.len() as u32;
        for (position, &(_, idx)) in members.iter().enumerate() {
            let score = qa_modified_score(rel, position as u32 + 1, m)?;
            let sample = &mut dataset.samples[idx];
            sample.target_score = Some(score);
            sample.label = None;
            rewritten += 1;
        }
    }
    Ok(rewritten)
}
