use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::decode::decode_premise_groups;
use super::ensemble::{argmax, ensemble_regress, vote_with_tiebreak};
use super::ranking::{rank_questions, RankedAnswer};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::model::{featurize, Output, SourceSpec, ToyModel};

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Probs(Vec<f64>),
    Score(f64),
}

/// One model's predictions for one task, keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub model_id: String,
    pub task: String,
    pub predictions: BTreeMap<String, Prediction>,
    /// Dev metric in percent, used for member selection.
    pub dev_metric: Option<f64>,
}

impl PredictionSet {
    fn probs(&self, id: &str) -> Result<&[f64]> {
        match self.predictions.get(id) {
            Some(Prediction::Probs(p)) => Ok(p),
            Some(Prediction::Score(_)) => Err(Error::Dimension(format!(
                "`{}` has a score for `{id}`, expected probabilities",
                self.model_id
            ))),
            None => Err(Error::OutOfRange(format!(
                "`{}` has no prediction for `{id}`",
                self.model_id
            ))),
        }
    }

    fn score(&self, id: &str) -> Result<f64> {
        match self.predictions.get(id) {
            Some(Prediction::Score(s)) => Ok(*s),
            Some(Prediction::Probs(_)) => Err(Error::Dimension(format!(
                "`{}` has probabilities for `{id}`, expected a score",
                self.model_id
            ))),
            None => Err(Error::OutOfRange(format!(
                "`{}` has no prediction for `{id}`",
                self.model_id
            ))),
        }
    }
}

pub fn predict_dataset(
    model: &ToyModel,
    source: &SourceSpec,
    dataset: &Dataset,
    model_id: &str,
    dev_metric: Option<f64>,
) -> Result<PredictionSet> {
    let mut predictions = BTreeMap::new();
    for s in &dataset.samples {
        let x = featurize(&s.text_a, &s.text_b, source);
        let p = match model.predict(&dataset.head_group, &x)? {
            Output::Probs(p) => Prediction::Probs(p),
            Output::Score(v) => Prediction::Score(v),
        };
        predictions.insert(s.id.clone(), p);
    }
    Ok(PredictionSet {
        model_id: model_id.to_string(),
        task: dataset.name.clone(),
        predictions,
        dev_metric,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRow {
    model_id: String,
    sample_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dev_metric: Option<f64>,
}

/// JSON-Lines: `model_id`, `sample_id`, `probs` or `score`, plus the
/// member's `dev_metric` on every row when known.
pub fn write_predictions(path: impl AsRef<Path>, set: &PredictionSet) -> Result<()> {
    let rows: Vec<PredictionRow> = set
        .predictions
        .iter()
        .map(|(id, p)| {
            let (probs, score) = match p {
                Prediction::Probs(v) => (Some(v.clone()), None),
                Prediction::Score(s) => (None, Some(*s)),
            };
            PredictionRow {
                model_id: set.model_id.clone(),
                sample_id: id.clone(),
                probs,
                score,
                dev_metric: set.dev_metric,
            }
        })
        .collect();
    write_jsonl(path.as_ref(), &rows)
}

pub fn read_predictions(path: impl AsRef<Path>, task: &str) -> Result<PredictionSet> {
    let path = path.as_ref();
    let rows: Vec<PredictionRow> = read_jsonl(path)?;
    let model_id = rows.first().map(|r| r.model_id.clone()).unwrap_or_default();
    let dev_metric = rows.first().and_then(|r| r.dev_metric);
    let mut predictions = BTreeMap::new();
    for (i, r) in rows.into_iter().enumerate() {
        let bad = |message: &str| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message: message.to_string(),
        };
        if r.model_id != model_id {
            return Err(bad("mixed model ids in one predictions file"));
        }
        let p = match (r.probs, r.score) {
            (Some(p), None) => Prediction::Probs(p),
            (None, Some(s)) => Prediction::Score(s),
            _ => return Err(bad("need exactly one of probs / score")),
        };
        if predictions.insert(r.sample_id, p).is_some() {
            return Err(bad("duplicate sample id"));
        }
    }
    Ok(PredictionSet {
        model_id,
        task: task.to_string(),
        predictions,
        dev_metric,
    })
}

/// One line of an ensemble output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub sample_id: String,
    pub label: usize,
    /// Mean member probability of `label` (classification) or mean member
    /// score (regression).
    pub score: f64,
    /// 1-based position within the question, for ranked tasks.
    pub rank: Option<usize>,
}

pub fn write_ensemble_output(path: impl AsRef<Path>, rows: &[EnsembleRow]) -> Result<()> {
    write_jsonl(path.as_ref(), rows)
}

pub fn read_ensemble_output(path: impl AsRef<Path>) -> Result<Vec<EnsembleRow>> {
    read_jsonl(path.as_ref())
}

/// Majority-vote classification over `members` for every sample of
/// `dataset`, in dataset order.
///
/// With `constrained`, each member's votes come from constrained triple
/// decoding of its own probabilities over each premise group instead of
/// per-sample argmax; ties are still broken by summed probabilities.
pub fn combine_classification(
    members: &[&PredictionSet],
    dataset: &Dataset,
    constrained: bool,
) -> Result<Vec<EnsembleRow>> {
    if members.is_empty() {
        return Err(Error::Dimension("ensemble needs at least one member".into()));
    }
    let member_votes: Vec<HashMap<String, usize>> = members
        .iter()
        .map(|m| {
            if constrained {
                let mut rows = Vec::with_capacity(dataset.len());
                for s in &dataset.samples {
                    rows.push((s.id.as_str(), s.premise_group.as_deref(), m.probs(&s.id)?));
                }
                Ok(decode_premise_groups(rows)?.into_iter().collect())
            } else {
                dataset
                    .samples
                    .iter()
                    .map(|s| Ok((s.id.clone(), argmax(m.probs(&s.id)?))))
                    .collect::<Result<HashMap<_, _>>>()
            }
        })
        .collect::<Result<_>>()?;

    dataset
        .samples
        .iter()
        .map(|s| {
            let probs: Vec<&[f64]> = members.iter().map(|m| m.probs(&s.id)).collect::<Result<_>>()?;
            let votes: Vec<usize> = member_votes.iter().map(|v| v[&s.id]).collect();
            let label = vote_with_tiebreak(&votes, &probs)?;
            let score = probs.iter().map(|p| p[label]).sum::<f64>() / probs.len() as f64;
            Ok(EnsembleRow {
                sample_id: s.id.clone(),
                label,
                score,
                rank: None,
            })
        })
        .collect()
}

/// Majority-vote regression for every sample, then per-question ranking
/// of samples that carry a `question_id`.
pub fn combine_regression(members: &[&PredictionSet], dataset: &Dataset) -> Result<Vec<EnsembleRow>> {
    let mut rows = Vec::with_capacity(dataset.len());
    let mut ranked_input = Vec::new();
    for s in &dataset.samples {
        let scores: Vec<f64> = members.iter().map(|m| m.score(&s.id)).collect::<Result<_>>()?;
        let vote = ensemble_regress(&scores)?;
        rows.push(EnsembleRow {
            sample_id: s.id.clone(),
            label: usize::from(vote.positive),
            score: vote.mean,
            rank: None,
        });
        if let Some(q) = &s.question_id {
            ranked_input.push((
                q.clone(),
                RankedAnswer {
                    answer_id: s.id.clone(),
                    positive: vote.positive,
                    score: vote.mean,
                },
            ));
        }
    }
    let mut rank_of = HashMap::new();
    for list in rank_questions(ranked_input) {
        for (pos, a) in list.answers.into_iter().enumerate() {
            rank_of.insert(a.answer_id, pos + 1);
        }
    }
    for r in &mut rows {
        r.rank = rank_of.get(&r.sample_id).copied();
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Role, SamplePair, TaskKind};

    fn set(id: &str, preds: &[(&str, Prediction)]) -> PredictionSet {
        PredictionSet {
            model_id: id.into(),
            task: "t".into(),
            predictions: preds.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            dev_metric: Some(90.0),
        }
    }

    #[test]
    fn predictions_file_round_trip() {
        let s = set(
            "m1",
            &[
                ("a", Prediction::Probs(vec![0.25, 0.75])),
                ("b", Prediction::Probs(vec![1.0, 0.0])),
            ],
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.jsonl");
        write_predictions(&p, &s).unwrap();
        assert_eq!(read_predictions(&p, "t").unwrap(), s);
    }

    #[test]
    fn regression_ranks_within_question() {
        let mk = |id: &str, q: &str| {
            let mut s = SamplePair::regression(id, "a", "b", 0.0);
            s.question_id = Some(q.into());
            s
        };
        let ds = Dataset::new("qa", TaskKind::Regression, Role::InDomain, "qa").with_samples(vec![
            mk("x1", "q1"),
            mk("x2", "q1"),
            mk("x3", "q1"),
            mk("y1", "q2"),
        ]);
        let m1 = set(
            "m1",
            &[
                ("x1", Prediction::Score(-0.5)),
                ("x2", Prediction::Score(0.7)),
                ("x3", Prediction::Score(0.2)),
                ("y1", Prediction::Score(1.0)),
            ],
        );
        let rows = combine_regression(&[&m1], &ds).unwrap();
        let rank: HashMap<_, _> = rows.iter().map(|r| (r.sample_id.as_str(), (r.label, r.rank))).collect();
        assert_eq!(rank["x2"], (1, Some(1)));
        assert_eq!(rank["x3"], (1, Some(2)));
        assert_eq!(rank["x1"], (0, Some(3)));
        assert_eq!(rank["y1"], (1, Some(1)));
    }

    #[test]
    fn missing_member_prediction_is_an_error() {
        let ds = Dataset::new("t", TaskKind::Classification { classes: 2 }, Role::InDomain, "t")
            .with_samples(vec![SamplePair::classification("a", "x", "y", 0)]);
        let empty = set("m", &[]);
        assert!(combine_classification(&[&empty], &ds, false).is_err());
    }
}
