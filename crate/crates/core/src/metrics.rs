//! Leaderboard metrics.
//!
//! Undefined values (precision with no predicted positives, Spearman with no
//! qualifying question) are `None`, never zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::inference::EnsembleRow;

pub fn accuracy<T: PartialEq>(predicted: &[T], gold: &[T]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::OutOfRange("accuracy of zero samples".into()));
    }
    let hits = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// `TP / (TP + FP)` for the positive class.
pub fn precision_positive(predicted: &[bool], gold: &[bool]) -> Result<Option<f64>> {
    if predicted.len() != gold.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    for (&p, &g) in predicted.iter().zip(gold) {
        if p {
            if g {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok((tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64))
}

pub fn reciprocal_rank(correct_in_order: &[bool]) -> f64 {
    correct_in_order
        .iter()
        .position(|&c| c)
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Mean reciprocal rank. Each inner slice is the gold correctness of one
/// question's answers in system order; questions without a correct answer
/// contribute 0. An empty input gives 0.
pub fn mrr(questions: &[Vec<bool>]) -> f64 {
    if questions.is_empty() {
        return 0.0;
    }
    questions.iter().map(|q| reciprocal_rank(q)).sum::<f64>() / questions.len() as f64
}

/// 1-based ranks, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation as the Pearson correlation of average ranks.
/// `None` for fewer than two points or a constant side.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// One ranked answer as seen by [`spearman_on_positives`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedGold {
    pub predicted_positive: bool,
    /// Lower is more relevant.
    pub gold_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanSummary {
    pub value: Option<f64>,
    pub qualifying_questions: usize,
    pub per_question: Vec<Option<f64>>,
}

/// Per question (answers in system order), Spearman between system position
/// and gold rank over predicted-positive answers only; averaged over
/// questions with at least two predicted positives and a defined
/// correlation.
pub fn spearman_on_positives(questions: &[Vec<RankedGold>]) -> SpearmanSummary {
    let per_question: Vec<Option<f64>> = questions
        .iter()
        .map(|answers| {
            let gold: Vec<f64> = answers
                .iter()
                .filter(|a| a.predicted_positive)
                .map(|a| a.gold_rank)
                .collect();
            let system: Vec<f64> = (1..=gold.len()).map(|i| i as f64).collect();
            spearman(&system, &gold)
        })
        .collect();
    let defined: Vec<f64> = per_question.iter().flatten().copied().collect();
    SpearmanSummary {
        value: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        qualifying_questions: defined.len(),
        per_question,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionDetail {
    pub question_id: String,
    pub answers: usize,
    pub predicted_positives: usize,
    pub reciprocal_rank: f64,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub samples: usize,
    pub accuracy: f64,
    pub precision: Option<f64>,
    /// Only for ranked tasks.
    pub mrr: Option<f64>,
    pub spearman: Option<f64>,
    pub spearman_questions: usize,
    pub questions: Vec<QuestionDetail>,
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "task        {}", self.task);
        let _ = writeln!(out, "samples     {}", self.samples);
        let _ = writeln!(out, "accuracy    {:.4}", self.accuracy);
        let _ = writeln!(out, "precision   {}", fmt(self.precision));
        if self.mrr.is_some() {
            let _ = writeln!(out, "mrr         {}", fmt(self.mrr));
            let _ = writeln!(
                out,
                "spearman    {} ({} qualifying questions of {})",
                fmt(self.spearman),
                self.spearman_questions,
                self.questions.len()
            );
        }
        out
    }
}

/// Position, predicted positive, gold positive, gold rank.
type AnswerRow = (usize, bool, bool, Option<u32>);

/// Scores an ensemble output file against its gold dataset.
///
/// Classification: accuracy, plus positive precision (class 1) for binary
/// tasks. Regression: correctness accuracy and precision against
/// [`SamplePair::gold_positive`](crate::corpus::SamplePair::gold_positive),
/// and for samples with a `question_id` MRR and Spearman over the `rank`
/// order.
pub fn evaluate(gold: &Dataset, rows: &[EnsembleRow]) -> Result<EvalReport> {
    let by_id: HashMap<&str, &EnsembleRow> = rows.iter().map(|r| (r.sample_id.as_str(), r)).collect();
    let row_for = |id: &str| {
        by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::OutOfRange(format!("no prediction for gold sample `{id}`")))
    };

    match gold.task_kind {
        TaskKind::Classification { classes } => {
            let mut pred = Vec::with_capacity(gold.len());
            let mut truth = Vec::with_capacity(gold.len());
            for s in &gold.samples {
                pred.push(row_for(&s.id)?.label);
                truth.push(
                    s.label
                        .ok_or_else(|| Error::OutOfRange(format!("gold sample `{}` has no label", s.id)))?,
                );
            }
            let precision = if classes == 2 {
                let p: Vec<bool> = pred.iter().map(|&l| l == 1).collect();
                let g: Vec<bool> = truth.iter().map(|&l| l == 1).collect();
                precision_positive(&p, &g)?
            } else {
                None
            };
            Ok(EvalReport {
                task: gold.name.clone(),
                samples: gold.len(),
                accuracy: accuracy(&pred, &truth)?,
                precision,
                mrr: None,
                spearman: None,
                spearman_questions: 0,
                questions: Vec::new(),
            })
        }
        TaskKind::Regression => {
            let mut pred = Vec::with_capacity(gold.len());
            let mut truth = Vec::with_capacity(gold.len());
            let mut by_question: BTreeMap<&str, Vec<AnswerRow>> = BTreeMap::new();
            for s in &gold.samples {
                let row = row_for(&s.id)?;
                let positive = row.label == 1;
                let correct = s
                    .gold_positive()
                    .ok_or_else(|| Error::OutOfRange(format!("gold sample `{}` has no correctness", s.id)))?;
                pred.push(positive);
                truth.push(correct);
                if let (Some(q), Some(rank)) = (s.question_id.as_deref(), row.rank) {
                    by_question
                        .entry(q)
                        .or_default()
                        .push((rank, positive, correct, s.gold_rank));
                }
            }

            let mut correctness = Vec::new();
            let mut spearman_input = Vec::new();
            let mut ids = Vec::new();
            for (q, mut answers) in by_question {
                answers.sort_by_key(|a| a.0);
                correctness.push(answers.iter().map(|a| a.2).collect::<Vec<_>>());
                let with_gold: Option<Vec<RankedGold>> = answers
                    .iter()
                    .map(|a| {
                        a.3.map(|r| RankedGold {
                            predicted_positive: a.1,
                            gold_rank: f64::from(r),
                        })
                    })
                    .collect();
                spearman_input.push(with_gold.unwrap_or_default());
                ids.push((q, answers.len(), answers.iter().filter(|a| a.1).count()));
            }
            let summary = spearman_on_positives(&spearman_input);
            let questions = ids
                .into_iter()
                .zip(&correctness)
                .zip(&summary.per_question)
                .map(|(((q, n, pos), c), rho)| QuestionDetail {
                    question_id: q.to_string(),
                    answers: n,
                    predicted_positives: pos,
                    reciprocal_rank: reciprocal_rank(c),
                    spearman: *rho,
                })
                .collect();

            Ok(EvalReport {
                task: gold.name.clone(),
                samples: gold.len(),
                accuracy: accuracy(&pred, &truth)?,
                precision: precision_positive(&pred, &truth)?,
                mrr: (!correctness.is_empty()).then(|| mrr(&correctness)),
                spearman: summary.value,
                spearman_questions: summary.qualifying_questions,
                questions,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_fixtures() {
        assert_eq!(accuracy(&[1, 0, 1, 1], &[1, 0, 1, 0]).unwrap(), 0.75);
        assert_eq!(accuracy(&[2, 1], &[2, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn precision_fixtures() {
        let p = precision_positive(&[true, true, true, false], &[true, true, false, true]).unwrap();
        assert_eq!(p, Some(2.0 / 3.0));
        assert_eq!(precision_positive(&[false, false], &[true, false]).unwrap(), None);
        assert_eq!(
            precision_positive(&[true; 4], &[true, false, true, false]).unwrap(),
            Some(0.5)
        );
    }

    #[test]
    fn mrr_fixtures() {
        assert_eq!(mrr(&[vec![true, false], vec![false, true, true]]), 0.75);
        assert_eq!(mrr(&[vec![true], vec![true, false]]), 1.0);
        assert_eq!(mrr(&[vec![false, false]]), 0.0);
    }

    #[test]
    fn spearman_extremes() {
        let perfect: Vec<RankedGold> = (1..=5)
            .map(|r| RankedGold {
                predicted_positive: true,
                gold_rank: r as f64,
            })
            .collect();
        let mut reversed = perfect.clone();
        reversed.reverse();
        assert_eq!(spearman_on_positives(&[perfect]).value, Some(1.0));
        assert_eq!(spearman_on_positives(&[reversed]).value, Some(-1.0));
    }

    #[test]
    fn spearman_undefined_without_positives() {
        let q = vec![
            RankedGold {
                predicted_positive: false,
                gold_rank: 1.0,
            },
            RankedGold {
                predicted_positive: true,
                gold_rank: 2.0,
            },
        ];
        let s = spearman_on_positives(&[q]);
        assert_eq!(s.value, None);
        assert_eq!(s.qualifying_questions, 0);
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), [2.5, 4.0, 2.5, 1.0]);
    }
}
