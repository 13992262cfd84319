//! Sentence-pair datasets and the dataset-construction recipes.

mod io;
mod negatives;
mod scores;
mod splits;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, load_manifest, write_dataset, DatasetManifest, DatasetSpec, Recipe};
pub use negatives::{medquad_negative_sample, medquad_train_eval_split, MedquadSplit, NegativeSampling};
pub use scores::{apply_qa_scores, qa_modified_score, GOLD_POSITIVE_RELEVANCE, QA_SCORE_SHIFT};
pub use splits::{cv_folds, mednli_merge_dev, qa_dev_reshuffle, rqe_shuffle_split, Fold, ALEXA_TAG, QA_DEV_QUESTIONS};

/// One text pair with its supervision and grouping metadata.
///
/// `text_a` is the premise (or answer), `text_b` the hypothesis (or question).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub id: String,
    pub text_a: String,
    pub text_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_relevance: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_rank: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_tag: Option<String>,
}

impl SamplePair {
    pub fn classification(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>, label: usize) -> Self {
        Self::bare(id, a, b, Some(label), None)
    }

    pub fn regression(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>, score: f64) -> Self {
        Self::bare(id, a, b, None, Some(score))
    }

    fn bare(
        id: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
        label: Option<usize>,
        target_score: Option<f64>,
    ) -> Self {
        SamplePair {
            id: id.into(),
            text_a: a.into(),
            text_b: b.into(),
            label,
            target_score,
            question_id: None,
            page_id: None,
            premise_group: None,
            gold_relevance: None,
            gold_rank: None,
            source_tag: None,
        }
    }

    /// Gold correctness for relevance-scored answers.
    ///
    /// Relevance metadata wins when present (`relevance >= 3`), so the
    /// transformed-score boundary at exactly 0.0 never flips a gold label.
    /// Otherwise the sign of `target_score`, then `label == 1`.
    pub fn gold_positive(&self) -> Option<bool> {
        if let Some(rel) = self.gold_relevance {
            return Some(rel >= GOLD_POSITIVE_RELEVANCE);
        }
        if let Some(score) = self.target_score {
            return Some(score > 0.0);
        }
        self.label.map(|l| l == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification { classes: usize },
    Regression,
}

impl TaskKind {
    pub fn is_classification(&self) -> bool {
        matches!(self, TaskKind::Classification { .. })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Classification { classes } => write!(f, "classification:{classes}"),
            TaskKind::Regression => f.write_str("regression"),
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "regression" {
            return Ok(TaskKind::Regression);
        }
        let classes = s
            .strip_prefix("classification")
            .map(|rest| rest.trim_start_matches([':', '(']).trim_end_matches(')'))
            .ok_or_else(|| format!("unknown task kind `{s}`"))?;
        let classes: usize = if classes.is_empty() {
            2
        } else {
            classes.parse().map_err(|_| format!("bad class count in `{s}`"))?
        };
        if classes < 2 {
            return Err(format!("classification needs at least 2 classes, got {classes}"));
        }
        Ok(TaskKind::Classification { classes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    InDomain,
    External,
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "in_domain" | "in-domain" => Ok(Role::InDomain),
            "external" => Ok(Role::External),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// A named, task-tagged collection of sample pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub task_kind: TaskKind,
    pub role: Role,
    /// Datasets with equal `head_group` train the same answer head.
    pub head_group: String,
    pub samples: Vec<SamplePair>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, task_kind: TaskKind, role: Role, head_group: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            task_kind,
            role,
            head_group: head_group.into(),
            samples: Vec::new(),
        }
    }

    pub fn with_samples(mut self, samples: Vec<SamplePair>) -> Self {
        self.samples = samples;
        self
    }

    /// Same metadata, different samples.
    pub fn derive(&self, samples: Vec<SamplePair>) -> Self {
        Dataset {
            name: self.name.clone(),
            task_kind: self.task_kind,
            role: self.role,
            head_group: self.head_group.clone(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks id uniqueness and label/score agreement with the task kind.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId {
                    dataset: self.name.clone(),
                    id: s.id.clone(),
                });
            }
            check_task(&self.name, self.task_kind, s)?;
        }
        Ok(())
    }
}

pub(crate) fn check_task(dataset: &str, kind: TaskKind, s: &SamplePair) -> Result<()> {
    let mismatch = |message: String| Error::TaskMismatch {
        dataset: dataset.to_string(),
        id: s.id.clone(),
        message,
    };
    match (kind, s.label, s.target_score) {
        (_, Some(_), Some(_)) => Err(mismatch("both label and target_score present".into())),
        (_, None, None) => Err(mismatch("neither label nor target_score present".into())),
        (TaskKind::Classification { classes }, Some(label), None) => {
            if label < classes {
                Ok(())
            } else {
                Err(mismatch(format!("label {label} out of range for {classes} classes")))
            }
        }
        (TaskKind::Classification { .. }, None, Some(_)) => {
            Err(mismatch("target_score on a classification dataset".into()))
        }
        (TaskKind::Regression, None, Some(score)) => {
            if score.is_finite() {
                Ok(())
            } else {
                Err(mismatch(format!("non-finite target_score {score}")))
            }
        }
        (TaskKind::Regression, Some(_), None) => Err(mismatch("label on a regression dataset".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_kind_parses() {
        assert_eq!("regression".parse::<TaskKind>(), Ok(TaskKind::Regression));
        assert_eq!(
            "classification:3".parse::<TaskKind>(),
            Ok(TaskKind::Classification { classes: 3 })
        );
        assert_eq!(
            "classification(2)".parse::<TaskKind>(),
            Ok(TaskKind::Classification { classes: 2 })
        );
        assert!("classification:1".parse::<TaskKind>().is_err());
        assert!("ranking".parse::<TaskKind>().is_err());
    }

    #[test]
    fn validate_catches_mismatches() {
        let ds = Dataset::new("d", TaskKind::Regression, Role::InDomain, "qa")
            .with_samples(vec![SamplePair::classification("x", "a", "b", 0)]);
        assert!(matches!(ds.validate(), Err(Error::TaskMismatch { .. })));

        let ds = Dataset::new("d", TaskKind::Classification { classes: 2 }, Role::InDomain, "nli")
            .with_samples(vec![SamplePair::classification("x", "a", "b", 2)]);
        assert!(matches!(ds.validate(), Err(Error::TaskMismatch { .. })));
    }

    #[test]
    fn gold_positive_prefers_relevance() {
        let mut s = SamplePair::regression("x", "a", "b", 0.0);
        assert_eq!(s.gold_positive(), Some(false));
        s.gold_relevance = Some(3);
        assert_eq!(s.gold_positive(), Some(true));
        s.gold_relevance = Some(2);
        s.target_score = Some(0.5);
        assert_eq!(s.gold_positive(), Some(false));
    }
}
