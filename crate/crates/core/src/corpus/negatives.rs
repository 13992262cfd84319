use std::collections::HashMap;

use rand::seq::{index, SliceRandom};

use super::{Dataset, SamplePair, TaskKind};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

/// Target score given to sampled negatives.
pub const NEGATIVE_TARGET: f64 = -1.0;
/// Target score for positives that carry no relevance metadata.
pub const POSITIVE_TARGET: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct NegativeSampling {
    pub dataset: Dataset,
    /// Positives whose page had fewer than `k` other answers.
    pub deficient_positives: usize,
}

/// Adds up to `k` same-page negatives after every positive pair.
///
/// A negative pairs the positive's question (`text_b`) with a different
/// distinct answer (`text_a`) from the same `page_id`, drawn uniformly
/// without replacement. Output order is positive, then its negatives.
/// Each positive's draw uses its own derived seed, so the result does not
/// depend on how pages are interleaved in the input.
pub fn medquad_negative_sample(positives: &Dataset, k: usize, seed: u64) -> Result<NegativeSampling> {
    let mut pages: HashMap<&str, Vec<&str>> = HashMap::new();
    for s in &positives.samples {
        let page = s
            .page_id
            .as_deref()
            .ok_or_else(|| Error::OutOfRange(format!("positive `{}` has no page_id", s.id)))?;
        let answers = pages.entry(page).or_default();
        if !answers.contains(&s.text_a.as_str()) {
            answers.push(&s.text_a);
        }
    }

    let mut out = Vec::with_capacity(positives.len() * (k + 1));
    let mut deficient = 0;
    for s in &positives.samples {
        let page = s.page_id.as_deref().unwrap_or_default();
        let others: Vec<&str> = pages[page].iter().copied().filter(|a| *a != s.text_a).collect();
        let take = k.min(others.len());
        if take < k {
            deficient += 1;
        }

        let mut positive = s.clone();
        if positive.gold_relevance.is_none() || positive.target_score.is_none() {
            positive.target_score = Some(POSITIVE_TARGET);
        }
        positive.label = None;
        out.push(positive);

        let mut rng = rng_from(derive_seed(seed, &["negative", page, s.id.as_str()]));
        for (j, pick) in index::sample(&mut rng, others.len(), take).into_iter().enumerate() {
            out.push(SamplePair {
                id: format!("{}#neg{}", s.id, j + 1),
                text_a: others[pick].to_string(),
                text_b: s.text_b.clone(),
                label: None,
                target_score: Some(NEGATIVE_TARGET),
                question_id: s.question_id.clone(),
                page_id: s.page_id.clone(),
                premise_group: None,
                gold_relevance: None,
                gold_rank: None,
                source_tag: s.source_tag.clone(),
            });
        }
    }

    let mut dataset = positives.derive(out);
    dataset.task_kind = TaskKind::Regression;
    Ok(NegativeSampling {
        dataset,
        deficient_positives: deficient,
    })
}

/// Train/eval pair counts for the sampled answer-relevance corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MedquadSplit {
    pub train: usize,
    pub eval: usize,
}

impl Default for MedquadSplit {
    fn default() -> Self {
        MedquadSplit {
            train: 27_391,
            eval: 2_936,
        }
    }
}

impl MedquadSplit {
    /// Eval size for a corpus of `total` pairs: the configured count when the
    /// counts add up to `total`, otherwise the same proportion rounded.
    pub fn eval_count(&self, total: usize) -> usize {
        let configured = self.train + self.eval;
        if configured == total || configured == 0 {
            return self.eval.min(total);
        }
        let scaled = (total as f64 * self.eval as f64 / configured as f64).round() as usize;
        scaled.min(total)
    }
}

/// Random pair-level split; both sides keep input order.
pub fn medquad_train_eval_split(pairs: &Dataset, split: MedquadSplit, seed: u64) -> (Dataset, Dataset) {
    let n = pairs.len();
    let n_eval = split.eval_count(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(derive_seed(seed, &["medquad-split"])));
    let mut is_eval = vec![false; n];
    for &i in &order[..n_eval] {
        is_eval[i] = true;
    }
    let (eval, train): (Vec<_>, Vec<_>) = pairs.samples.iter().cloned().zip(is_eval).partition(|(_, e)| *e);
    (
        pairs.derive(train.into_iter().map(|(s, _)| s).collect()),
        pairs.derive(eval.into_iter().map(|(s, _)| s).collect()),
    )
}
