use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{MedquadSplit, QA_DEV_QUESTIONS};
use crate::error::{Error, Result};
use crate::inference::default_thresholds;
use crate::model::{SourceSpec, TrainConfig};
use crate::scheduler::MixtureConfig;

/// One representation family and how many members to train from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub name: String,
    pub seed: u64,
    pub members: usize,
    /// Overrides `mixture.batch_size` for this family's members.
    #[serde(default)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub multitask_lr: f64,
    pub per_task_lr: f64,
    pub per_task_epochs: usize,
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub fine_tune: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            multitask_lr: t.multitask_lr,
            per_task_lr: t.per_task_lr,
            per_task_epochs: t.per_task_epochs,
            hidden_dim: t.hidden_dim,
            feature_dim: 512,
            fine_tune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvSection {
    pub enabled: bool,
    pub task: String,
    pub folds: usize,
    pub fine_tune: bool,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            enabled: true,
            task: "qa".into(),
            folds: 5,
            fine_tune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MedquadSection {
    pub negatives: usize,
    pub train: usize,
    pub eval: usize,
}

impl Default for MedquadSection {
    fn default() -> Self {
        let s = MedquadSplit::default();
        MedquadSection {
            negatives: 2,
            train: s.train,
            eval: s.eval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaSection {
    pub reshuffle_questions: usize,
}

impl Default for QaSection {
    fn default() -> Self {
        QaSection {
            reshuffle_questions: QA_DEV_QUESTIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table4Section {
    /// Task whose members are compared; the first in-domain classification
    /// task when empty.
    pub task: String,
    pub trials: usize,
    pub members_per_source: usize,
}

impl Default for Table4Section {
    fn default() -> Self {
        Table4Section {
            task: String::new(),
            trials: 3,
            members_per_source: 3,
        }
    }
}

/// Whole-run configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Dataset manifests, relative to the config file.
    pub datasets: Vec<PathBuf>,
    #[serde(default)]
    pub mixture: MixtureConfig,
    #[serde(default)]
    pub train: TrainSection,
    pub sources: Vec<SourceEntry>,
    /// Member-selection thresholds in percent dev accuracy.
    #[serde(default = "default_thresholds")]
    pub thresholds: BTreeMap<String, f64>,
    /// Optional cap on ensemble size per task (best dev metric first).
    #[serde(default)]
    pub max_members: BTreeMap<String, usize>,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub medquad: MedquadSection,
    #[serde(default)]
    pub qa: QaSection,
    #[serde(default)]
    pub table4: Table4Section,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        self.train_config(0, None).validate()?;
        if self.sources.is_empty() {
            return Err(Error::Config("at least one source is required".into()));
        }
        let mut seeds = std::collections::HashSet::new();
        for s in &self.sources {
            if !seeds.insert(s.seed) {
                return Err(Error::Config(format!("source `{}` reuses seed {}", s.name, s.seed)));
            }
        }
        if self.cv.enabled && self.cv.folds < 2 {
            return Err(Error::Config("cv.folds must be >= 2".into()));
        }
        if self.train.feature_dim == 0 {
            return Err(Error::Config("train.feature_dim must be >= 1".into()));
        }
        for m in &self.datasets {
            let p = self.resolve(m);
            if !p.exists() {
                return Err(Error::Config(format!("manifest {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn source_spec(&self, entry: &SourceEntry) -> SourceSpec {
        SourceSpec::new(entry.name.clone(), entry.seed, self.train.feature_dim)
    }

    /// Training settings for one run seed, with an optional batch size.
    pub fn train_config(&self, seed: u64, batch_size: Option<usize>) -> TrainConfig {
        TrainConfig {
            mixture: MixtureConfig {
                seed,
                batch_size: batch_size.unwrap_or(self.mixture.batch_size),
                ..self.mixture.clone()
            },
            multitask_lr: self.train.multitask_lr,
            per_task_lr: self.train.per_task_lr,
            per_task_epochs: self.train.per_task_epochs,
            hidden_dim: self.train.hidden_dim,
        }
    }

    pub fn medquad_split(&self) -> MedquadSplit {
        MedquadSplit {
            train: self.medquad.train,
            eval: self.medquad.eval,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_reference_defaults() {
        let cfg: PipelineConfig = toml::from_str(
            r#"
seed = 1
datasets = []
[[sources]]
name = "general"
seed = 11
members = 2
"#,
        )
        .unwrap();
        assert_eq!(cfg.mixture.alpha, 0.5);
        assert_eq!(cfg.mixture.max_epoch, 20);
        assert_eq!(cfg.train.multitask_lr, 5e-5);
        assert_eq!(cfg.train.per_task_lr, 5e-6);
        assert_eq!(cfg.train.per_task_epochs, 6);
        assert_eq!(cfg.thresholds["mednli"], 87.7);
        assert_eq!(cfg.cv.folds, 5);
        assert_eq!(
            (cfg.medquad.train, cfg.medquad.eval, cfg.medquad.negatives),
            (27_391, 2_936, 2)
        );
        assert_eq!(cfg.qa.reshuffle_questions, 25);
        cfg.validate().unwrap();
    }

    #[test]
    fn duplicate_source_seed_rejected() {
        let cfg: PipelineConfig = toml::from_str(
            r#"
seed = 1
datasets = []
[[sources]]
name = "a"
seed = 3
members = 1
[[sources]]
name = "b"
seed = 3
members = 1
"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }
}
