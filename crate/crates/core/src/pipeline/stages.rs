use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use crate::corpus::{
    apply_qa_scores, cv_folds, load_dataset, load_manifest, mednli_merge_dev, medquad_negative_sample,
    medquad_train_eval_split, qa_dev_reshuffle, rqe_shuffle_split, write_dataset, Dataset, DatasetSpec, Recipe, Role,
    TaskKind,
};
use crate::error::{Error, Result};
use crate::inference::{
    combine_classification, combine_regression, predict_dataset, rank_questions, read_ensemble_output,
    read_predictions, select_members, write_ensemble_output, write_predictions, EnsembleRow, PredictionSet,
    RankedAnswer,
};
use crate::metrics::{evaluate as evaluate_rows, EvalReport};
use crate::model::{
    config_hash, dev_metric, fine_tune_task, train_multitask, Checkpoint, Provenance, SourceSpec, TaskData,
    TrainOutcome,
};
use crate::scheduler::{plan_epoch, write_plan};
use crate::seed::derive_seed;

pub const SCHEMA_VERSION: u32 = 1;

/// Stage names in execution order.
pub const STAGES: [&str; 10] = [
    "ingest",
    "transform",
    "split",
    "schedule",
    "train",
    "finetune",
    "predict",
    "ensemble",
    "rank",
    "evaluate",
];

/// A model trained from one source family, optionally on one CV fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    pub source: String,
    pub fold: Option<usize>,
    pub seed: u64,
    pub batch_size: Option<usize>,
}

pub fn members(cfg: &PipelineConfig) -> Vec<Member> {
    let mut out = Vec::new();
    for src in &cfg.sources {
        for k in 0..src.members {
            let id = format!("{}-{k}", src.name);
            out.push(Member {
                seed: derive_seed(cfg.seed, &["member", id.as_str()]),
                id,
                source: src.name.clone(),
                fold: None,
                batch_size: src.batch_size,
            });
        }
    }
    if cfg.cv.enabled {
        for src in &cfg.sources {
            for j in 0..cfg.cv.folds {
                let id = format!("{}-cv{j}", src.name);
                out.push(Member {
                    seed: derive_seed(cfg.seed, &["member", id.as_str()]),
                    id,
                    source: src.name.clone(),
                    fold: Some(j),
                    batch_size: src.batch_size,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    spec: DatasetSpec,
    recipe: Recipe,
    has_dev: bool,
    has_test: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StageIndex {
    schema_version: u32,
    stage: String,
    config_hash: String,
    seed: u64,
    datasets: Vec<IndexEntry>,
}

/// Train/dev/test splits of one dataset at some stage.
#[derive(Debug, Clone)]
struct Splits {
    recipe: Recipe,
    train: Dataset,
    dev: Option<Dataset>,
    test: Option<Dataset>,
}

impl Splits {
    fn name(&self) -> &str {
        &self.train.name
    }

    /// Where ensembles are scored: test when present, else dev.
    fn eval(&self) -> Option<&Dataset> {
        self.test.as_ref().or(self.dev.as_ref())
    }
}

/// Layout of a run's output directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub root: PathBuf,
}

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Artifacts { root: root.into() }
    }

    fn datasets_dir(&self, stage: &str) -> PathBuf {
        self.root.join("datasets").join(stage)
    }

    pub fn plan_path(&self, member: &str, epoch: usize) -> PathBuf {
        self.root
            .join("plans")
            .join(member)
            .join(format!("epoch_{epoch:03}.jsonl"))
    }

    pub fn checkpoint_path(&self, member: &str, name: &str) -> PathBuf {
        self.root.join("checkpoints").join(member).join(format!("{name}.json"))
    }

    pub fn predictions_dir(&self, task: &str) -> PathBuf {
        self.root.join("predictions").join(task)
    }

    pub fn ensemble_path(&self, task: &str) -> PathBuf {
        self.root.join("ensemble").join(format!("{task}.jsonl"))
    }

    pub fn ranked_path(&self, task: &str) -> PathBuf {
        self.root.join("ranked").join(format!("{task}.jsonl"))
    }

    pub fn report_path(&self, task: &str, ext: &str) -> PathBuf {
        self.root.join("reports").join(format!("{task}.{ext}"))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut body = serde_json::to_string_pretty(value).map_err(|e| Error::json(path.display().to_string(), e))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&body).map_err(|e| Error::json(path.display().to_string(), e))
}

fn write_stage(art: &Artifacts, cfg: &PipelineConfig, stage: &str, data: &[Splits]) -> Result<()> {
    let dir = art.datasets_dir(stage);
    let mut entries = Vec::new();
    for s in data {
        write_dataset(dir.join(format!("{}.train.jsonl", s.name())), &s.train)?;
        if let Some(dev) = &s.dev {
            write_dataset(dir.join(format!("{}.dev.jsonl", s.name())), dev)?;
        }
        if let Some(test) = &s.test {
            write_dataset(dir.join(format!("{}.test.jsonl", s.name())), test)?;
        }
        entries.push(IndexEntry {
            spec: DatasetSpec {
                name: s.train.name.clone(),
                task_kind: s.train.task_kind,
                role: s.train.role,
                head_group: s.train.head_group.clone(),
            },
            recipe: s.recipe,
            has_dev: s.dev.is_some(),
            has_test: s.test.is_some(),
        });
    }
    write_json(
        &dir.join("index.json"),
        &StageIndex {
            schema_version: SCHEMA_VERSION,
            stage: stage.to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            datasets: entries,
        },
    )
}

fn read_stage(art: &Artifacts, stage: &str) -> Result<Vec<Splits>> {
    let dir = art.datasets_dir(stage);
    let index: StageIndex = read_json(&dir.join("index.json"))?;
    if index.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "{} has schema version {}, expected {SCHEMA_VERSION}",
            dir.display(),
            index.schema_version
        )));
    }
    index
        .datasets
        .into_iter()
        .map(|e| {
            let load = |split: &str| load_dataset(dir.join(format!("{}.{split}.jsonl", e.spec.name)), &e.spec);
            Ok(Splits {
                recipe: e.recipe,
                train: load("train")?,
                dev: e.has_dev.then(|| load("dev")).transpose()?,
                test: e.has_test.then(|| load("test")).transpose()?,
            })
        })
        .collect()
}

/// Loads every manifest and copies the raw splits into the run directory.
pub fn ingest(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let mut data = Vec::new();
    for m in &cfg.datasets {
        let man = load_manifest(cfg.resolve(m))?;
        let load = |p: &Path| load_dataset(p, &man.spec);
        data.push(Splits {
            recipe: man.recipe,
            train: load(&man.path)?,
            dev: man.dev_path.as_deref().map(load).transpose()?,
            test: man.test_path.as_deref().map(load).transpose()?,
        });
    }
    write_run_manifest(cfg, art)?;
    write_stage(art, cfg, "ingest", &data)
}

/// Relevance-score transform and same-page negative sampling.
pub fn transform(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let mut data = read_stage(art, "ingest")?;
    for s in &mut data {
        match s.recipe {
            Recipe::Qa => {
                apply_qa_scores(&mut s.train)?;
                for d in [&mut s.dev, &mut s.test].into_iter().flatten() {
                    apply_qa_scores(d)?;
                }
            }
            Recipe::Medquad => {
                let seed = derive_seed(cfg.seed, &["transform", s.train.name.as_str()]);
                let sampled = medquad_negative_sample(&s.train, cfg.medquad.negatives, seed)?;
                let (train, eval) = medquad_train_eval_split(&sampled.dataset, cfg.medquad_split(), seed);
                s.train = train;
                s.dev = Some(eval);
            }
            _ => {}
        }
    }
    write_stage(art, cfg, "transform", &data)
}

/// Train and dev splits of every dataset after the split stage.
pub fn load_split_tasks(art: &Artifacts) -> Result<Vec<TaskData>> {
    Ok(read_stage(art, "split")?
        .into_iter()
        .map(|s| TaskData::new(s.train, s.dev))
        .collect())
}

/// The split ensembles are scored on: test when present, else dev.
pub fn load_eval_split(art: &Artifacts, task: &str) -> Result<Dataset> {
    read_stage(art, "split")?
        .into_iter()
        .find(|s| s.name() == task)
        .and_then(|s| s.test.or(s.dev))
        .ok_or_else(|| Error::Config(format!("task `{task}` has no dev or test split")))
}

fn cv_task<'a>(cfg: &PipelineConfig, data: &'a [Splits]) -> Result<Option<&'a Splits>> {
    if !cfg.cv.enabled {
        return Ok(None);
    }
    data.iter()
        .find(|s| s.name() == cfg.cv.task)
        .map(Some)
        .ok_or_else(|| Error::Config(format!("cv task `{}` is not among the datasets", cfg.cv.task)))
}

fn fold_path(art: &Artifacts, task: &str, fold: usize, split: &str) -> PathBuf {
    art.datasets_dir("split")
        .join("cv")
        .join(task)
        .join(format!("fold{fold}.{split}.jsonl"))
}

/// Dev merge, half-shuffle, dev reshuffle and cross-validation folds.
pub fn split(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let mut data = read_stage(art, "transform")?;
    for s in &mut data {
        let seed = derive_seed(cfg.seed, &["split", s.train.name.as_str()]);
        match (s.recipe, s.dev.as_ref()) {
            (Recipe::Mednli, Some(dev)) if s.test.is_some() => {
                s.train = mednli_merge_dev(&s.train, dev);
                s.dev = s.test.clone();
            }
            (Recipe::Rqe, Some(dev)) => {
                let (train, dev) = rqe_shuffle_split(&s.train, dev, seed);
                s.train = train;
                s.dev = Some(dev);
            }
            (Recipe::Qa, Some(dev)) => {
                let (train, dev) = qa_dev_reshuffle(&s.train, dev, cfg.qa.reshuffle_questions)?;
                s.train = train;
                s.dev = Some(dev);
            }
            _ => {}
        }
    }
    write_stage(art, cfg, "split", &data)?;

    if let Some(task) = cv_task(cfg, &data)? {
        let mut all = task.train.samples.clone();
        all.extend(task.dev.iter().flat_map(|d| d.samples.iter().cloned()));
        for fold in cv_folds(&task.train.derive(all), cfg.cv.folds)? {
            write_dataset(fold_path(art, task.name(), fold.index, "train"), &fold.train)?;
            write_dataset(fold_path(art, task.name(), fold.index, "dev"), &fold.validation)?;
        }
    }
    Ok(())
}

fn source_for(cfg: &PipelineConfig, member: &Member) -> Result<SourceSpec> {
    cfg.sources
        .iter()
        .find(|s| s.name == member.source)
        .map(|s| cfg.source_spec(s))
        .ok_or_else(|| Error::Config(format!("unknown source `{}`", member.source)))
}

/// Training data as seen by `member`: CV members swap in their fold.
fn member_tasks(cfg: &PipelineConfig, art: &Artifacts, data: &[Splits], member: &Member) -> Result<Vec<TaskData>> {
    data.iter()
        .map(|s| {
            if let (Some(fold), true) = (member.fold, cfg.cv.enabled && s.name() == cfg.cv.task) {
                let spec = DatasetSpec {
                    name: s.train.name.clone(),
                    task_kind: s.train.task_kind,
                    role: s.train.role,
                    head_group: s.train.head_group.clone(),
                };
                let train = load_dataset(fold_path(art, s.name(), fold, "train"), &spec)?;
                let dev = load_dataset(fold_path(art, s.name(), fold, "dev"), &spec)?;
                Ok(TaskData::new(train, Some(dev)))
            } else {
                Ok(TaskData::new(s.train.clone(), s.dev.clone()))
            }
        })
        .collect()
}

/// Tasks a member is fine-tuned on, predicts and is ensembled for.
fn member_task_names(cfg: &PipelineConfig, data: &[Splits], member: &Member) -> Vec<String> {
    data.iter()
        .filter(|s| s.train.role == Role::InDomain && s.dev.is_some())
        .filter(|s| member.fold.is_none() || s.name() == cfg.cv.task)
        .map(|s| s.name().to_string())
        .collect()
}

/// Writes every member's multi-task epoch plans for audit and replay.
pub fn schedule(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    for member in members(cfg) {
        let tasks = member_tasks(cfg, art, &data, &member)?;
        let sets: Vec<&Dataset> = tasks.iter().map(|t| &t.train).collect();
        let tc = cfg.train_config(member.seed, member.batch_size);
        for epoch in 1..=tc.mixture.max_epoch {
            let plan = plan_epoch(&sets, &tc.mixture, epoch)?;
            write_plan(art.plan_path(&member.id, epoch), &plan)?;
        }
    }
    Ok(())
}

fn checkpoint_from(
    cfg: &PipelineConfig,
    member: &Member,
    source: SourceSpec,
    stage: &str,
    out: &TrainOutcome,
) -> Checkpoint {
    let best = out.best_record();
    Checkpoint::new(
        member.id.clone(),
        source,
        member.seed,
        out.best.clone(),
        Provenance {
            config_hash: config_hash(cfg),
            stage: stage.to_string(),
            epoch: out.best_epoch,
            dev_metrics: best.dev_metrics.clone(),
            selection_score: best.selection_score,
        },
    )
}

/// Multi-task training of every member, in parallel.
pub fn train(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    members(cfg).par_iter().try_for_each(|member| {
        let source = source_for(cfg, member)?;
        let tasks = member_tasks(cfg, art, &data, member)?;
        let out = train_multitask(&tasks, &source, &cfg.train_config(member.seed, member.batch_size))?;
        write_json(&art.checkpoint_path(&member.id, "history"), &out.history)?;
        checkpoint_from(cfg, member, source, "multitask", &out).save(art.checkpoint_path(&member.id, "multitask"))
    })
}

/// Per-task continuation from each member's best multi-task checkpoint.
pub fn finetune(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    members(cfg).par_iter().try_for_each(|member| {
        let base = Checkpoint::load(art.checkpoint_path(&member.id, "multitask"))?;
        let tasks = member_tasks(cfg, art, &data, member)?;
        let enabled = if member.fold.is_some() {
            cfg.cv.fine_tune
        } else {
            cfg.train.fine_tune
        };
        for name in member_task_names(cfg, &data, member) {
            let path = art.checkpoint_path(&member.id, &name);
            if !enabled {
                base.save(&path)?;
                continue;
            }
            let task = tasks
                .iter()
                .find(|t| t.train.name == name)
                .expect("task listed from same data");
            let out = fine_tune_task(
                &base.model,
                task,
                &base.source,
                &cfg.train_config(member.seed, member.batch_size),
            )?;
            checkpoint_from(cfg, member, base.source.clone(), &format!("finetune:{name}"), &out).save(&path)?;
        }
        Ok(())
    })
}

/// Each member's predictions on each task's evaluation split, tagged with
/// its dev accuracy in percent.
pub fn predict(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    members(cfg).par_iter().try_for_each(|member| {
        let tasks = member_tasks(cfg, art, &data, member)?;
        for name in member_task_names(cfg, &data, member) {
            let ck = Checkpoint::load(art.checkpoint_path(&member.id, &name))?;
            let splits = data
                .iter()
                .find(|s| s.name() == name)
                .expect("task listed from same data");
            let dev = tasks
                .iter()
                .find(|t| t.train.name == name)
                .and_then(|t| t.dev.as_ref())
                .expect("member tasks have dev splits");
            let metric = 100.0 * dev_metric(&ck.model, dev, &ck.source)?;
            let eval = splits.eval().expect("member tasks have dev splits");
            let set = predict_dataset(&ck.model, &ck.source, eval, &member.id, Some(metric))?;
            write_predictions(art.predictions_dir(&name).join(format!("{}.jsonl", member.id)), &set)?;
        }
        Ok(())
    })
}

fn read_member_predictions(art: &Artifacts, task: &str) -> Result<Vec<PredictionSet>> {
    let dir = art.predictions_dir(task);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    files.iter().map(|p| read_predictions(p, task)).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleMembers {
    task: String,
    threshold: Option<f64>,
    candidates: Vec<(String, Option<f64>)>,
    selected: Vec<String>,
}

fn ensemble_tasks(data: &[Splits]) -> Vec<&Splits> {
    data.iter()
        .filter(|s| s.train.role == Role::InDomain && s.eval().is_some())
        .collect()
}

/// Threshold selection, optional size cap, then majority voting.
pub fn ensemble(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    for task in ensemble_tasks(&data) {
        let name = task.name();
        let sets = read_member_predictions(art, name)?;
        let threshold = cfg.thresholds.get(name).copied();
        // Cross-validation members are always kept; only the normally
        // trained ones face the threshold.
        let cv_ids: Vec<String> = members(cfg)
            .into_iter()
            .filter(|m| m.fold.is_some())
            .map(|m| m.id)
            .collect();
        let (cv_sets, normal): (Vec<PredictionSet>, Vec<PredictionSet>) =
            sets.iter().cloned().partition(|s| cv_ids.contains(&s.model_id));
        let mut selected: Vec<&PredictionSet> = cv_sets.iter().collect();
        match select_members(&normal, name, threshold.unwrap_or(f64::NEG_INFINITY)) {
            Ok(kept) => selected.extend(kept),
            Err(e) if selected.is_empty() => return Err(e),
            Err(_) => {}
        }
        selected.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        if let Some(&cap) = cfg.max_members.get(name) {
            selected.sort_by(|a, b| {
                b.dev_metric
                    .unwrap_or_default()
                    .total_cmp(&a.dev_metric.unwrap_or_default())
                    .then_with(|| a.model_id.cmp(&b.model_id))
            });
            selected.truncate(cap.max(1));
            selected.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        }
        let eval = task.eval().expect("filtered on eval");
        let rows = match eval.task_kind {
            TaskKind::Classification { .. } => combine_classification(&selected, eval, task.recipe == Recipe::Mednli)?,
            TaskKind::Regression => combine_regression(&selected, eval)?,
        };
        write_ensemble_output(art.ensemble_path(name), &rows)?;
        write_json(
            &art.root.join("ensemble").join(format!("{name}.members.json")),
            &EnsembleMembers {
                task: name.to_string(),
                threshold,
                candidates: sets.iter().map(|s| (s.model_id.clone(), s.dev_metric)).collect(),
                selected: selected.iter().map(|s| s.model_id.clone()).collect(),
            },
        )?;
    }
    Ok(())
}

/// Orders each question's answers from the ensemble output; classification
/// outputs pass through unchanged.
pub fn rank(_cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let data = read_stage(art, "split")?;
    for task in ensemble_tasks(&data) {
        let name = task.name();
        let mut rows = read_ensemble_output(art.ensemble_path(name))?;
        if task.train.task_kind == TaskKind::Regression {
            let eval = task.eval().expect("filtered on eval");
            let question: BTreeMap<&str, &str> = eval
                .samples
                .iter()
                .filter_map(|s| s.question_id.as_deref().map(|q| (s.id.as_str(), q)))
                .collect();
            let lists = rank_questions(rows.iter().filter_map(|r| {
                question.get(r.sample_id.as_str()).map(|q| {
                    (
                        q.to_string(),
                        RankedAnswer {
                            answer_id: r.sample_id.clone(),
                            positive: r.label == 1,
                            score: r.score,
                        },
                    )
                })
            }));
            let mut rank_of = BTreeMap::new();
            for list in lists {
                for (i, a) in list.answers.into_iter().enumerate() {
                    rank_of.insert(a.answer_id, i + 1);
                }
            }
            for r in &mut rows {
                r.rank = rank_of.get(&r.sample_id).copied();
            }
        }
        write_ensemble_output(art.ranked_path(name), &rows)?;
    }
    Ok(())
}

/// Scores the ranked outputs against each task's evaluation split.
pub fn evaluate(_cfg: &PipelineConfig, art: &Artifacts) -> Result<Vec<EvalReport>> {
    let data = read_stage(art, "split")?;
    let mut reports = Vec::new();
    let mut summary = String::new();
    for task in ensemble_tasks(&data) {
        let rows: Vec<EnsembleRow> = read_ensemble_output(art.ranked_path(task.name()))?;
        let report = evaluate_rows(task.eval().expect("filtered on eval"), &rows)?;
        write_json(&art.report_path(task.name(), "json"), &report)?;
        let table = report.to_table();
        fs::write(art.report_path(task.name(), "txt"), &table)
            .map_err(|e| Error::io(art.report_path(task.name(), "txt"), e))?;
        summary.push_str(&table);
        summary.push('\n');
        reports.push(report);
    }
    let path = art.root.join("reports").join("summary.txt");
    fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    Ok(reports)
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    schema_version: u32,
    config_hash: String,
    master_seed: u64,
    config: PipelineConfig,
    members: Vec<Member>,
    stages: Vec<String>,
}

fn write_run_manifest(cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    write_json(
        &art.root.join("run_manifest.json"),
        &RunManifest {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash(cfg),
            master_seed: cfg.seed,
            config: cfg.clone(),
            members: members(cfg),
            stages: STAGES.iter().map(|s| s.to_string()).collect(),
        },
    )
}

/// Runs one named stage, tagging failures with the stage name.
pub fn run_stage(stage: &str, cfg: &PipelineConfig, art: &Artifacts) -> Result<()> {
    let tag = STAGES
        .iter()
        .copied()
        .find(|s| *s == stage)
        .ok_or_else(|| Error::Config(format!("unknown stage `{stage}`")))?;
    let result = match tag {
        "ingest" => ingest(cfg, art),
        "transform" => transform(cfg, art),
        "split" => split(cfg, art),
        "schedule" => schedule(cfg, art),
        "train" => train(cfg, art),
        "finetune" => finetune(cfg, art),
        "predict" => predict(cfg, art),
        "ensemble" => ensemble(cfg, art),
        "rank" => rank(cfg, art),
        _ => evaluate(cfg, art).map(|_| ()),
    };
    result.map_err(|e| e.in_stage(tag))
}

/// Every stage in order.
pub fn run_pipeline(cfg: &PipelineConfig, out: impl Into<PathBuf>) -> Result<Vec<EvalReport>> {
    let art = Artifacts::new(out);
    for stage in &STAGES[..STAGES.len() - 1] {
        run_stage(stage, cfg, &art)?;
    }
    evaluate(cfg, &art).map_err(|e| e.in_stage("evaluate"))
}
