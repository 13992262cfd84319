//! Single-source versus mixed-source ensembles.
//!
//! Two flavors share one report format: a synthetic noise model where each
//! source family has its own pool of hard items, and a trained variant that
//! builds real toy members per source on the pipeline's data.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::stages::{self, Artifacts};
use crate::corpus::Role;
use crate::error::{Error, Result};
use crate::inference::{argmax, ensemble_classify, predict_dataset, Prediction};
use crate::model::{fine_tune_task, train_multitask, TaskData};
use crate::seed::{derive_seed, rng_from};

/// Class-probability rows for one member, with its family label.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberScores {
    pub name: String,
    pub family: String,
    pub probs: Vec<Vec<f64>>,
}

/// Mean member accuracy against ensemble accuracy for one grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingRow {
    pub members: Vec<String>,
    pub mixed: bool,
    /// Mean member accuracy, percent.
    pub avg_acc: f64,
    /// Ensemble accuracy, percent.
    pub esm_acc: f64,
}

impl GroupingRow {
    pub fn improvement(&self) -> f64 {
        self.esm_acc - self.avg_acc
    }

    pub fn label(&self) -> String {
        self.members.join("+")
    }
}

fn member_accuracy(m: &MemberScores, gold: &[usize]) -> f64 {
    let hits = m.probs.iter().zip(gold).filter(|(p, g)| argmax(p) == **g).count();
    100.0 * hits as f64 / gold.len() as f64
}

/// Avg. Acc and Esm. Acc for the members at `idx`.
pub fn score_grouping(members: &[MemberScores], idx: &[usize], gold: &[usize]) -> Result<GroupingRow> {
    if idx.is_empty() || gold.is_empty() {
        return Err(Error::EmptyDataset("grouping".into()));
    }
    for &i in idx {
        if members[i].probs.len() != gold.len() {
            return Err(Error::Dimension(format!(
                "`{}` has {} rows, gold has {}",
                members[i].name,
                members[i].probs.len(),
                gold.len()
            )));
        }
    }
    let avg = idx.iter().map(|&i| member_accuracy(&members[i], gold)).sum::<f64>() / idx.len() as f64;
    let mut hits = 0usize;
    for (row, g) in gold.iter().enumerate() {
        let probs: Vec<&[f64]> = idx.iter().map(|&i| members[i].probs[row].as_slice()).collect();
        if ensemble_classify(&probs)? == *g {
            hits += 1;
        }
    }
    let first = &members[idx[0]].family;
    Ok(GroupingRow {
        members: idx.iter().map(|&i| members[i].name.clone()).collect(),
        mixed: idx.iter().any(|&i| &members[i].family != first),
        avg_acc: avg,
        esm_acc: 100.0 * hits as f64 / gold.len() as f64,
    })
}

/// The standard groupings over the first two families `a` and `b`
/// (three members each at least): every single member, `a1+a2+a3`,
/// `b1+b2+b3`, `a1+a2+b2`, `a1+b2+b3`, and all members together.
pub fn standard_groupings(members: &[MemberScores]) -> Result<Vec<Vec<usize>>> {
    let mut families: Vec<&str> = Vec::new();
    for m in members {
        if !families.contains(&m.family.as_str()) {
            families.push(&m.family);
        }
    }
    if families.len() < 2 {
        return Err(Error::NotEnough {
            what: "source families".into(),
            needed: 2,
            found: families.len(),
        });
    }
    let of = |f: &str| -> Vec<usize> { (0..members.len()).filter(|&i| members[i].family == f).collect() };
    let (a, b) = (of(families[0]), of(families[1]));
    let short = a.len().min(b.len());
    if short < 3 {
        return Err(Error::NotEnough {
            what: "members per source".into(),
            needed: 3,
            found: short,
        });
    }
    let mut out: Vec<Vec<usize>> = (0..members.len()).map(|i| vec![i]).collect();
    out.push(a[..3].to_vec());
    out.push(b[..3].to_vec());
    out.push(vec![a[0], a[1], b[1]]);
    out.push(vec![a[0], b[1], b[2]]);
    out.push((0..members.len()).collect());
    Ok(out)
}

pub fn table4_report(members: &[MemberScores], gold: &[usize]) -> Result<Vec<GroupingRow>> {
    standard_groupings(members)?
        .iter()
        .map(|idx| score_grouping(members, idx, gold))
        .collect()
}

/// Synthetic members with family-correlated mistakes.
///
/// Each family owns a pool of hard items, each with one wrong class. A
/// member inherits each pool item as an error with probability `inherit`
/// and makes further independent errors elsewhere so that its accuracy
/// lands on a value drawn from `accuracy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub items: usize,
    pub classes: usize,
    pub families: usize,
    pub members_per_family: usize,
    pub accuracy: (f64, f64),
    pub inherit: f64,
    /// Share of the family's weakest-member error budget that comes from
    /// the shared pool.
    pub pool_share: f64,
    pub confidence: (f64, f64),
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            items: 2000,
            classes: 3,
            families: 2,
            members_per_family: 3,
            accuracy: (0.75, 0.92),
            inherit: 0.6,
            pool_share: 0.8,
            confidence: (0.55, 0.95),
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.accuracy;
        let (clo, chi) = self.confidence;
        let ok = self.items > 0
            && self.classes >= 2
            && self.families >= 2
            && self.members_per_family >= 3
            && 0.0 < lo
            && lo <= hi
            && hi < 1.0
            && 0.0 < self.inherit
            && self.inherit <= 1.0
            && (0.0..=1.0).contains(&self.pool_share)
            && clo > 1.0 / self.classes as f64
            && clo <= chi
            && chi < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid noise model {self:?}")))
        }
    }

    fn family_name(f: usize) -> String {
        char::from(b'A' + (f % 26) as u8).to_string()
    }

    /// Gold labels plus every member's probability rows.
    pub fn simulate(&self, seed: u64) -> Result<(Vec<usize>, Vec<MemberScores>)> {
        self.validate()?;
        let c = self.classes;
        let mut rng = rng_from(derive_seed(seed, &["gold"]));
        let gold: Vec<usize> = (0..self.items).map(|_| rng.random_range(0..c)).collect();
        let wrong = |rng: &mut crate::seed::SeededRng, g: usize| (g + rng.random_range(1..c)) % c;

        let mut members = Vec::new();
        for f in 0..self.families {
            let family = Self::family_name(f);
            let mut rng = rng_from(derive_seed(seed, &["family", family.as_str()]));
            let errors: Vec<f64> = (0..self.members_per_family)
                .map(|_| 1.0 - rng.random_range(self.accuracy.0..=self.accuracy.1))
                .collect();
            let weakest_budget = errors.iter().copied().fold(f64::INFINITY, f64::min);
            let pool_rate = (self.pool_share * weakest_budget / self.inherit).min(1.0);
            let pool: Vec<Option<usize>> = gold
                .iter()
                .map(|&g| (rng.random::<f64>() < pool_rate).then(|| wrong(&mut rng, g)))
                .collect();

            for (k, &err) in errors.iter().enumerate() {
                let name = format!("{family}{}", k + 1);
                let mut rng = rng_from(derive_seed(seed, &["member", name.as_str()]));
                let inherited = self.inherit * pool_rate;
                let own = ((err - inherited) / (1.0 - inherited)).clamp(0.0, 1.0);
                let probs = gold
                    .iter()
                    .zip(&pool)
                    .map(|(&g, hard)| {
                        let pred = match hard {
                            Some(w) if rng.random::<f64>() < self.inherit => *w,
                            _ if rng.random::<f64>() < own => wrong(&mut rng, g),
                            _ => g,
                        };
                        let top = rng.random_range(self.confidence.0..=self.confidence.1);
                        let mut rest: Vec<f64> = (0..c - 1).map(|_| rng.random::<f64>() + 1e-3).collect();
                        let total: f64 = rest.iter().sum();
                        rest.iter_mut().for_each(|r| *r *= (1.0 - top) / total);
                        let mut row = Vec::with_capacity(c);
                        let mut it = rest.into_iter();
                        for j in 0..c {
                            row.push(if j == pred { top } else { it.next().unwrap_or(0.0) });
                        }
                        row
                    })
                    .collect();
                members.push(MemberScores {
                    name,
                    family: family.clone(),
                    probs,
                });
            }
        }
        Ok((gold, members))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Trial {
    pub seed: u64,
    pub rows: Vec<GroupingRow>,
}

/// Per-trial rows plus the single-source versus mixed-source comparison.
/// Groupings of one member are excluded from the summary; "all members"
/// counts as mixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Report {
    pub trials: Vec<Table4Trial>,
    /// Trials in which every mixed grouping beat its members' average.
    pub mixed_wins: usize,
    pub single_mean_improvement: f64,
    pub mixed_mean_improvement: f64,
}

impl Table4Report {
    pub fn from_trials(trials: Vec<Table4Trial>) -> Self {
        let mut single = Vec::new();
        let mut mixed = Vec::new();
        let mut wins = 0;
        for t in &trials {
            let mut all_win = true;
            for r in t.rows.iter().filter(|r| r.members.len() > 1) {
                if r.mixed {
                    mixed.push(r.improvement());
                    all_win &= r.esm_acc > r.avg_acc;
                } else {
                    single.push(r.improvement());
                }
            }
            wins += usize::from(all_win);
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        Table4Report {
            mixed_wins: wins,
            single_mean_improvement: mean(&single),
            mixed_mean_improvement: mean(&mixed),
            trials,
        }
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for t in &self.trials {
            s.push_str(&format!(
                "trial seed {}\n{:<40} {:>8} {:>8}\n",
                t.seed, "Model", "Avg Acc", "Esm Acc"
            ));
            for r in &t.rows {
                s.push_str(&format!("{:<40} {:>8.2} {:>8.2}\n", r.label(), r.avg_acc, r.esm_acc));
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "mixed groupings beat their average in {}/{} trials\nmean improvement: single-source {:+.2}, mixed-source {:+.2}\n",
            self.mixed_wins,
            self.trials.len(),
            self.single_mean_improvement,
            self.mixed_mean_improvement
        ));
        s
    }
}

/// `trials` independent draws of the noise model.
pub fn run_noise_experiment(model: &NoiseModel, trials: usize, seed: u64) -> Result<Table4Report> {
    let trials = (0..trials)
        .map(|t| {
            let s = derive_seed(seed, &["trial", t.to_string().as_str()]);
            let (gold, members) = model.simulate(s)?;
            Ok(Table4Trial {
                seed: s,
                rows: table4_report(&members, &gold)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table4Report::from_trials(trials))
}

/// Trains `members_per_source` toy members per source on the configured
/// task and compares groupings on its evaluation split. Dataset stages are
/// (re)built under `out`.
pub fn run_table4_experiment(cfg: &PipelineConfig, out: impl Into<PathBuf>) -> Result<Table4Report> {
    let art = Artifacts::new(out);
    if cfg.sources.len() < 2 {
        return Err(Error::NotEnough {
            what: "sources".into(),
            needed: 2,
            found: cfg.sources.len(),
        });
    }
    if cfg.table4.members_per_source < 3 {
        return Err(Error::NotEnough {
            what: "members per source".into(),
            needed: 3,
            found: cfg.table4.members_per_source,
        });
    }
    for stage in ["ingest", "transform", "split"] {
        stages::run_stage(stage, cfg, &art)?;
    }
    let data = stages::load_split_tasks(&art)?;
    let task_name = if cfg.table4.task.is_empty() {
        data.iter()
            .find(|t| t.train.role == Role::InDomain && t.train.task_kind.is_classification() && t.dev.is_some())
            .map(|t| t.train.name.clone())
            .ok_or_else(|| Error::Config("no in-domain classification task with a dev split".into()))?
    } else {
        cfg.table4.task.clone()
    };
    let task = data
        .iter()
        .find(|t| t.train.name == task_name)
        .ok_or_else(|| Error::Config(format!("table4 task `{task_name}` is not among the datasets")))?;
    if !task.train.task_kind.is_classification() {
        return Err(Error::Config(format!(
            "table4 task `{task_name}` must be classification"
        )));
    }
    let eval = stages::load_eval_split(&art, &task_name)?;
    let gold: Vec<usize> = eval
        .samples
        .iter()
        .map(|s| {
            s.label.ok_or_else(|| Error::TaskMismatch {
                dataset: eval.name.clone(),
                id: s.id.clone(),
                message: "missing label".into(),
            })
        })
        .collect::<Result<_>>()?;

    let mut trials = Vec::new();
    for t in 0..cfg.table4.trials {
        let trial_seed = derive_seed(cfg.seed, &["table4", t.to_string().as_str()]);
        let jobs: Vec<(usize, usize)> = (0..cfg.sources.len())
            .flat_map(|s| (0..cfg.table4.members_per_source).map(move |k| (s, k)))
            .collect();
        let members = jobs
            .par_iter()
            .map(|&(s, k)| {
                let entry = &cfg.sources[s];
                let source = cfg.source_spec(entry);
                let name = format!("{}{}", entry.name, k + 1);
                let seed = derive_seed(trial_seed, &["member", name.as_str()]);
                let tc = cfg.train_config(seed, entry.batch_size);
                let mut model = train_multitask(&data, &source, &tc)?.best;
                if cfg.train.fine_tune {
                    model = fine_tune_task(
                        &model,
                        &TaskData::new(task.train.clone(), task.dev.clone()),
                        &source,
                        &tc,
                    )?
                    .best;
                }
                let set = predict_dataset(&model, &source, &eval, &name, None)?;
                let probs = eval
                    .samples
                    .iter()
                    .map(|s| match set.predictions.get(&s.id) {
                        Some(Prediction::Probs(p)) => Ok(p.clone()),
                        _ => Err(Error::Dimension(format!(
                            "`{name}` has no probabilities for `{}`",
                            s.id
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MemberScores {
                    name,
                    family: entry.name.clone(),
                    probs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        trials.push(Table4Trial {
            seed: trial_seed,
            rows: table4_report(&members, &gold)?,
        });
    }
    Ok(Table4Report::from_trials(trials))
}
