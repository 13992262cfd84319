//! Mixture-ratio epoch planning.
//!
//! Each epoch every in-domain dataset is reshuffled and cut into
//! mini-batches. All `N` in-domain batches are kept, `floor(alpha * N)`
//! batches are drawn from the pooled external batches, and the union is
//! shuffled into the epoch's training order.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Role, TaskKind};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniBatch {
    pub dataset_name: String,
    /// Position of this batch within its dataset's partition for the epoch.
    pub index: usize,
    pub sample_ids: Vec<String>,
    pub task_kind: TaskKind,
    pub head_group: String,
}

impl MiniBatch {
    pub fn key(&self) -> (&str, usize) {
        (&self.dataset_name, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixtureConfig {
    pub alpha: f64,
    pub batch_size: usize,
    /// Per-dataset batch sizes overriding `batch_size`.
    pub batch_size_overrides: BTreeMap<String, usize>,
    pub max_epoch: usize,
    pub seed: u64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            alpha: 0.5,
            batch_size: 16,
            batch_size_overrides: BTreeMap::new(),
            max_epoch: 20,
            seed: 0,
        }
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if self.batch_size == 0 || self.batch_size_overrides.values().any(|&b| b == 0) {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.max_epoch == 0 {
            return Err(Error::Config("max_epoch must be >= 1".into()));
        }
        Ok(())
    }

    pub fn batch_size_for(&self, dataset: &str) -> usize {
        self.batch_size_overrides
            .get(dataset)
            .copied()
            .unwrap_or(self.batch_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub epoch_index: usize,
    pub in_domain_count: usize,
    pub external_count: usize,
    pub batches: Vec<MiniBatch>,
}

impl EpochPlan {
    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

/// Shuffles `dataset` with `seed` and chunks it; the last batch may be short.
pub fn partition_batches(dataset: &Dataset, batch_size: usize, seed: u64) -> Result<Vec<MiniBatch>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset(dataset.name.clone()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be >= 1".into()));
    }
    let mut ids: Vec<&str> = dataset.samples.iter().map(|s| s.id.as_str()).collect();
    ids.shuffle(&mut rng_from(seed));
    Ok(ids
        .chunks(batch_size)
        .enumerate()
        .map(|(index, chunk)| MiniBatch {
            dataset_name: dataset.name.clone(),
            index,
            sample_ids: chunk.iter().map(|s| s.to_string()).collect(),
            task_kind: dataset.task_kind,
            head_group: dataset.head_group.clone(),
        })
        .collect())
}

/// `floor(alpha * n)`, with a small tolerance so decimal ratios such as
/// `0.29 * 100` land on the intended integer.
pub fn external_draw_count(alpha: f64, n: usize) -> usize {
    (alpha * n as f64 + 1e-9).floor() as usize
}

/// Builds one epoch from already-partitioned batches.
///
/// External batches are drawn without replacement; when more are needed
/// than the pool holds, the pool is reshuffled and drawn again. An empty
/// pool contributes nothing.
pub fn build_epoch(
    in_domain: &[MiniBatch],
    external: &[MiniBatch],
    alpha: f64,
    epoch_index: usize,
    seed: u64,
) -> Result<EpochPlan> {
    if in_domain.is_empty() {
        return Err(Error::OutOfRange("epoch needs at least one in-domain batch".into()));
    }
    let wanted = if external.is_empty() {
        0
    } else {
        external_draw_count(alpha, in_domain.len())
    };

    let mut draw_rng = rng_from(derive_seed(seed, &["external"]));
    let mut drawn = Vec::with_capacity(wanted);
    while drawn.len() < wanted {
        let mut pool: Vec<&MiniBatch> = external.iter().collect();
        pool.shuffle(&mut draw_rng);
        let take = (wanted - drawn.len()).min(pool.len());
        drawn.extend(pool.into_iter().take(take).cloned());
    }

    let mut batches: Vec<MiniBatch> = in_domain.to_vec();
    batches.extend(drawn);
    batches.shuffle(&mut rng_from(derive_seed(seed, &["order"])));

    Ok(EpochPlan {
        epoch_index,
        in_domain_count: in_domain.len(),
        external_count: wanted,
        batches,
    })
}

/// Partitions every dataset afresh for `epoch_index` and builds the plan.
///
/// Datasets are split by [`Role`]; all external batches share one pool.
pub fn plan_epoch(datasets: &[&Dataset], config: &MixtureConfig, epoch_index: usize) -> Result<EpochPlan> {
    config.validate()?;
    let epoch_seed = derive_seed(config.seed, &["epoch".to_string(), epoch_index.to_string()]);
    let mut in_domain = Vec::new();
    let mut external = Vec::new();
    for ds in datasets {
        let seed = derive_seed(epoch_seed, &["partition", ds.name.as_str()]);
        let batches = partition_batches(ds, config.batch_size_for(&ds.name), seed)?;
        match ds.role {
            Role::InDomain => in_domain.extend(batches),
            Role::External => external.extend(batches),
        }
    }
    build_epoch(&in_domain, &external, config.alpha, epoch_index, epoch_seed)
}

#[derive(Serialize, Deserialize)]
struct PlanRow {
    epoch: usize,
    position: usize,
    dataset: String,
    batch_index: usize,
    sample_ids: Vec<String>,
}

/// Writes a plan as JSON-Lines, one batch per line in training order.
pub fn write_plan(path: impl AsRef<Path>, plan: &EpochPlan) -> Result<()> {
    let rows: Vec<PlanRow> = plan
        .batches
        .iter()
        .enumerate()
        .map(|(position, b)| PlanRow {
            epoch: plan.epoch_index,
            position,
            dataset: b.dataset_name.clone(),
            batch_index: b.index,
            sample_ids: b.sample_ids.clone(),
        })
        .collect();
    crate::jsonl::write_jsonl(path.as_ref(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SamplePair;
    use std::collections::HashSet;

    fn dataset(name: &str, n: usize, role: Role) -> Dataset {
        Dataset::new(name, TaskKind::Classification { classes: 2 }, role, "nli").with_samples(
            (0..n)
                .map(|i| SamplePair::classification(format!("{name}-{i}"), "a", "b", i % 2))
                .collect(),
        )
    }

    #[test]
    fn partition_counts() {
        let b = partition_batches(&dataset("d", 100, Role::InDomain), 16, 1).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.last().unwrap().sample_ids.len(), 4);
        let b = partition_batches(&dataset("d", 16, Role::InDomain), 16, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert!(partition_batches(&dataset("d", 0, Role::InDomain), 16, 1).is_err());
    }

    #[test]
    fn partition_is_deterministic() {
        let d = dataset("d", 50, Role::InDomain);
        assert_eq!(
            partition_batches(&d, 8, 3).unwrap(),
            partition_batches(&d, 8, 3).unwrap()
        );
        assert_ne!(
            partition_batches(&d, 8, 3).unwrap(),
            partition_batches(&d, 8, 4).unwrap()
        );
    }

    fn batches(name: &str, n: usize) -> Vec<MiniBatch> {
        partition_batches(&dataset(name, n, Role::InDomain), 1, 0).unwrap()
    }

    #[test]
    fn epoch_lengths() {
        let ext = batches("ext", 20);
        assert_eq!(build_epoch(&batches("in", 10), &ext, 0.5, 0, 1).unwrap().len(), 15);
        assert_eq!(build_epoch(&batches("in", 7), &ext, 0.5, 0, 1).unwrap().len(), 10);
        let plan = build_epoch(&batches("in", 10), &ext, 0.0, 0, 1).unwrap();
        assert_eq!(plan.len(), 10);
        assert!(plan.batches.iter().all(|b| b.dataset_name == "in"));
    }

    #[test]
    fn overflow_cycles_through_pool() {
        let ext = batches("ext", 3);
        let plan = build_epoch(&batches("in", 10), &ext, 0.8, 0, 9).unwrap();
        assert_eq!(plan.external_count, 8);
        let mut counts = BTreeMap::new();
        for b in plan.batches.iter().filter(|b| b.dataset_name == "ext") {
            *counts.entry(b.index).or_insert(0) += 1;
        }
        // two full passes then two more
        assert_eq!(counts.values().sum::<usize>(), 8);
        assert!(counts.values().all(|&c| c == 2 || c == 3));
    }

    #[test]
    fn empty_pool_gives_in_domain_only() {
        let plan = build_epoch(&batches("in", 10), &[], 0.5, 0, 1).unwrap();
        assert_eq!(plan.len(), 10);
        assert_eq!(plan.external_count, 0);
    }

    #[test]
    fn plan_epoch_mixes_roles() {
        let a = dataset("mednli", 40, Role::InDomain);
        let m = dataset("mnli", 400, Role::External);
        let cfg = MixtureConfig {
            batch_size: 8,
            seed: 5,
            ..MixtureConfig::default()
        };
        let p0 = plan_epoch(&[&a, &m], &cfg, 0).unwrap();
        assert_eq!(p0.in_domain_count, 5);
        assert_eq!(p0.external_count, 2);
        let ext: HashSet<_> = p0
            .batches
            .iter()
            .filter(|b| b.dataset_name == "mnli")
            .map(|b| b.index)
            .collect();
        assert_eq!(ext.len(), 2);
        let p1 = plan_epoch(&[&a, &m], &cfg, 1).unwrap();
        assert_ne!(p0.batches, p1.batches, "epochs reshuffle");
        assert_eq!(p0, plan_epoch(&[&a, &m], &cfg, 0).unwrap());
    }

    #[test]
    fn floor_tolerance() {
        assert_eq!(external_draw_count(0.29, 100), 29);
        assert_eq!(external_draw_count(0.5, 7), 3);
        assert_eq!(external_draw_count(0.0, 1000), 0);
        assert_eq!(external_draw_count(0.5, 1), 0);
    }
}
