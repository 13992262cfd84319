use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::features::{featurize, SourceSpec};
use super::toy::{Example, Output, Target, ToyModel};
use crate::corpus::{Dataset, Role, SamplePair};
use crate::error::{Error, Result};
use crate::scheduler::{plan_epoch, EpochPlan, MixtureConfig};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Multi-task stage; `mixture.max_epoch` is its epoch count and
    /// `mixture.seed` the run seed.
    pub mixture: MixtureConfig,
    pub multitask_lr: f64,
    pub per_task_lr: f64,
    pub per_task_epochs: usize,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mixture: MixtureConfig::default(),
            multitask_lr: 5e-5,
            per_task_lr: 5e-6,
            per_task_epochs: 6,
            hidden_dim: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        for (name, lr) in [("multitask_lr", self.multitask_lr), ("per_task_lr", self.per_task_lr)] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {lr}")));
            }
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be >= 1".into()));
        }
        Ok(())
    }
}

/// A training split with its optional development split.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub train: Dataset,
    pub dev: Option<Dataset>,
}

impl TaskData {
    pub fn new(train: Dataset, dev: Option<Dataset>) -> Self {
        TaskData { train, dev }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 is the model before any update.
    pub epoch: usize,
    pub mean_train_loss: Option<f64>,
    pub dev_metrics: BTreeMap<String, f64>,
    pub selection_score: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: ToyModel,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub plans: Vec<EpochPlan>,
}

impl TrainOutcome {
    pub fn best_record(&self) -> &EpochRecord {
        &self.history[self.best_epoch]
    }
}

/// Converts samples to model examples under `source`.
pub fn examples_for<'a>(
    samples: impl IntoIterator<Item = &'a SamplePair>,
    source: &SourceSpec,
) -> Result<Vec<Example>> {
    samples
        .into_iter()
        .map(|s| {
            let target = match (s.label, s.target_score) {
                (Some(c), None) => Target::Class(c),
                (None, Some(y)) => Target::Score(y),
                _ => {
                    return Err(Error::OutOfRange(format!(
                        "sample `{}` needs exactly one of label / target_score",
                        s.id
                    )))
                }
            };
            Ok(Example {
                features: featurize(&s.text_a, &s.text_b, source),
                target,
            })
        })
        .collect()
}

/// Accuracy for classification, sign accuracy (score >= 0 predicts
/// positive) for regression. In `[0, 1]`.
pub fn dev_metric(model: &ToyModel, dev: &Dataset, source: &SourceSpec) -> Result<f64> {
    if dev.is_empty() {
        return Err(Error::EmptyDataset(dev.name.clone()));
    }
    let mut correct = 0usize;
    for s in &dev.samples {
        let x = featurize(&s.text_a, &s.text_b, source);
        let hit = match model.predict(&dev.head_group, &x)? {
            Output::Probs(p) => Some(crate::inference::argmax(&p)) == s.label,
            Output::Score(score) => Some(score >= 0.0) == s.gold_positive(),
        };
        correct += usize::from(hit);
    }
    Ok(correct as f64 / dev.len() as f64)
}

struct Featurized {
    head_group: String,
    by_id: HashMap<String, Example>,
}

fn featurize_all(tasks: &[&Dataset], source: &SourceSpec) -> Result<HashMap<String, Featurized>> {
    tasks
        .iter()
        .map(|ds| {
            let examples = examples_for(&ds.samples, source)?;
            let by_id = ds.samples.iter().map(|s| s.id.clone()).zip(examples).collect();
            Ok((
                ds.name.clone(),
                Featurized {
                    head_group: ds.head_group.clone(),
                    by_id,
                },
            ))
        })
        .collect()
}

fn run_epoch(model: &mut ToyModel, plan: &EpochPlan, data: &HashMap<String, Featurized>, lr: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for batch in &plan.batches {
        let f = &data[&batch.dataset_name];
        let examples: Vec<Example> = batch.sample_ids.iter().map(|id| f.by_id[id].clone()).collect();
        let loss = model.grad_step(&f.head_group, &examples, lr).map_err(|e| match e {
            Error::NonFiniteLoss { loss, head, .. } => Error::NonFiniteLoss {
                loss,
                dataset: batch.dataset_name.clone(),
                head,
            },
            other => other,
        })?;
        total += loss;
        count += examples.len();
    }
    Ok(total / count.max(1) as f64)
}

fn evaluate(model: &ToyModel, devs: &[&Dataset], source: &SourceSpec) -> Result<(BTreeMap<String, f64>, f64)> {
    let mut metrics = BTreeMap::new();
    for dev in devs {
        metrics.insert(dev.name.clone(), dev_metric(model, dev, source)?);
    }
    let mean = metrics.values().sum::<f64>() / metrics.len() as f64;
    Ok((metrics, mean))
}

fn train_loop(
    mut model: ToyModel,
    train_sets: &[&Dataset],
    devs: &[&Dataset],
    source: &SourceSpec,
    mixture: &MixtureConfig,
    epochs: usize,
    lr: f64,
) -> Result<TrainOutcome> {
    let data = featurize_all(train_sets, source)?;
    let (metrics, score) = evaluate(&model, devs, source)?;
    let mut history = vec![EpochRecord {
        epoch: 0,
        mean_train_loss: None,
        dev_metrics: metrics,
        selection_score: score,
    }];
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut plans = Vec::with_capacity(epochs);

    for epoch in 1..=epochs {
        let plan = plan_epoch(train_sets, mixture, epoch)?;
        let loss = run_epoch(&mut model, &plan, &data, lr)?;
        plans.push(plan);
        let (metrics, score) = evaluate(&model, devs, source)?;
        if score > history[best_epoch].selection_score {
            best = model.clone();
            best_epoch = epoch;
        }
        history.push(EpochRecord {
            epoch,
            mean_train_loss: Some(loss),
            dev_metrics: metrics,
            selection_score: score,
        });
    }
    Ok(TrainOutcome {
        best,
        best_epoch,
        history,
        plans,
    })
}

/// Multi-task training with mixture-ratio scheduling.
///
/// Runs `mixture.max_epoch` epochs and keeps the checkpoint with the best
/// unweighted mean of in-domain dev metrics (the untrained model included;
/// ties keep the earlier epoch).
pub fn train_multitask(tasks: &[TaskData], source: &SourceSpec, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let train_sets: Vec<&Dataset> = tasks.iter().map(|t| &t.train).collect();
    let devs: Vec<&Dataset> = tasks
        .iter()
        .filter(|t| t.train.role == Role::InDomain)
        .filter_map(|t| t.dev.as_ref())
        .collect();
    if devs.is_empty() {
        return Err(Error::Config(
            "need at least one in-domain dataset with a dev split".into(),
        ));
    }

    let run_seed = config.mixture.seed;
    let mut model = ToyModel::new(source, config.hidden_dim);
    for ds in train_sets.iter().chain(devs.iter()) {
        model.ensure_head(&ds.head_group, ds.task_kind, run_seed)?;
    }
    train_loop(
        model,
        &train_sets,
        &devs,
        source,
        &config.mixture,
        config.mixture.max_epoch,
        config.multitask_lr,
    )
}

/// Continues training `checkpoint` on one task for `per_task_epochs` at
/// `per_task_lr` and returns the best dev checkpoint of the stage, the
/// input checkpoint included.
pub fn fine_tune_task(
    checkpoint: &ToyModel,
    task: &TaskData,
    source: &SourceSpec,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if !checkpoint.heads.contains_key(&task.train.head_group) {
        return Err(Error::MissingHead(task.train.head_group.clone()));
    }
    let dev = task
        .dev
        .as_ref()
        .ok_or_else(|| Error::Config(format!("fine-tuning `{}` needs a dev split", task.train.name)))?;
    let mut train = task.train.clone();
    train.role = Role::InDomain;
    let mixture = MixtureConfig {
        seed: derive_seed(config.mixture.seed, &["finetune", train.name.as_str()]),
        max_epoch: config.per_task_epochs.max(1),
        ..config.mixture.clone()
    };
    train_loop(
        checkpoint.clone(),
        &[&train],
        &[dev],
        source,
        &mixture,
        config.per_task_epochs,
        config.per_task_lr,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn quick_config(seed: u64) -> TrainConfig {
        TrainConfig {
            mixture: MixtureConfig {
                alpha: 0.5,
                batch_size: 8,
                max_epoch: 4,
                seed,
                ..MixtureConfig::default()
            },
            multitask_lr: 0.05,
            per_task_lr: 0.01,
            per_task_epochs: 2,
            hidden_dim: 16,
        }
    }

    #[test]
    fn defaults_follow_reference_settings() {
        let c = TrainConfig::default();
        assert_eq!(c.mixture.max_epoch, 20);
        assert_eq!(c.multitask_lr, 5e-5);
        assert_eq!(c.per_task_epochs, 6);
        assert_eq!(c.per_task_lr, 5e-6);
        assert_eq!(c.mixture.alpha, 0.5);
    }

    #[test]
    fn requires_in_domain_dev() {
        let ds = synth::separable_task("t", 20, 1);
        let src = SourceSpec::new("s", 1, 32);
        let err = train_multitask(&[TaskData::new(ds, None)], &src, &quick_config(0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn history_and_determinism() {
        let train = synth::separable_task("t", 60, 1);
        let dev = synth::separable_task("t", 30, 2);
        let src = SourceSpec::new("s", 1, 64);
        let tasks = [TaskData::new(train, Some(dev))];
        let a = train_multitask(&tasks, &src, &quick_config(3)).unwrap();
        let b = train_multitask(&tasks, &src, &quick_config(3)).unwrap();
        assert_eq!(a.history.len(), 5);
        assert_eq!(a.history, b.history);
        assert_eq!(a.best, b.best);
        let best = a.best_record().selection_score;
        assert!(a.history.iter().all(|r| r.selection_score <= best));
    }

    #[test]
    fn fine_tune_zero_epochs_returns_input() {
        let train = synth::separable_task("t", 40, 1);
        let dev = synth::separable_task("t", 20, 2);
        let src = SourceSpec::new("s", 1, 64);
        let task = TaskData::new(train, Some(dev));
        let base = train_multitask(std::slice::from_ref(&task), &src, &quick_config(1)).unwrap();
        let cfg = TrainConfig {
            per_task_epochs: 0,
            ..quick_config(1)
        };
        let tuned = fine_tune_task(&base.best, &task, &src, &cfg).unwrap();
        assert_eq!(tuned.best, base.best);
        assert_eq!(tuned.best_epoch, 0);
    }

    #[test]
    fn fine_tune_never_worse_than_input() {
        let train = synth::separable_task("t", 40, 4);
        let dev = synth::separable_task("t", 20, 5);
        let src = SourceSpec::new("s", 9, 64);
        let task = TaskData::new(train, Some(dev.clone()));
        let base = train_multitask(std::slice::from_ref(&task), &src, &quick_config(2)).unwrap();
        let before = dev_metric(&base.best, &dev, &src).unwrap();
        let tuned = fine_tune_task(&base.best, &task, &src, &quick_config(2)).unwrap();
        assert!(dev_metric(&tuned.best, &dev, &src).unwrap() >= before);
    }

    #[test]
    fn fine_tune_needs_head() {
        let task = TaskData::new(
            synth::separable_task("t", 10, 1),
            Some(synth::separable_task("t", 10, 2)),
        );
        let m = ToyModel::new(&SourceSpec::new("s", 1, 8), 4);
        assert!(matches!(
            fine_tune_task(&m, &task, &SourceSpec::new("s", 1, 8), &quick_config(0)),
            Err(Error::MissingHead(_))
        ));
    }

    #[test]
    fn shared_head_group_trains_one_head() {
        let mut a = synth::separable_task("mednli", 30, 1);
        let mut b = synth::separable_task("mnli", 30, 2);
        a.head_group = "nli".into();
        b.head_group = "nli".into();
        b.role = Role::External;
        let dev = a.derive(synth::separable_task("mednli", 10, 3).samples);
        let src = SourceSpec::new("s", 1, 32);
        let out = train_multitask(
            &[TaskData::new(a, Some(dev)), TaskData::new(b, None)],
            &src,
            &quick_config(0),
        )
        .unwrap();
        assert_eq!(out.best.heads.keys().collect::<Vec<_>>(), ["nli"]);
        assert!(matches!(
            out.best.heads["nli"],
            super::super::toy::Head::Classification { classes: 2, .. }
        ));
    }
}
