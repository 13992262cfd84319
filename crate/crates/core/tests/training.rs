use std::collections::HashMap;

use mixtrain::corpus::{Dataset, Role};
use mixtrain::model::{dev_metric, examples_for, train_multitask, SourceSpec, TaskData, ToyModel, TrainConfig};
use mixtrain::scheduler::MixtureConfig;
use mixtrain::synth::{nli_triples, separable_task};

fn config(seed: u64, alpha: f64) -> TrainConfig {
    TrainConfig {
        mixture: MixtureConfig {
            alpha,
            batch_size: 8,
            max_epoch: 5,
            seed,
            ..MixtureConfig::default()
        },
        multitask_lr: 0.02,
        per_task_lr: 0.005,
        per_task_epochs: 2,
        hidden_dim: 16,
    }
}

fn split(ds: Dataset, n_train: usize) -> TaskData {
    let dev = ds.derive(ds.samples[n_train..].to_vec());
    let train = ds.derive(ds.samples[..n_train].to_vec());
    TaskData::new(train, Some(dev))
}

#[test]
fn alpha_zero_ignores_external_data() {
    let src = SourceSpec::new("s", 4, 128);
    let task = split(nli_triples("mednli", 40, false, 0.0, 1), 90);
    let external = TaskData::new(nli_triples("mnli", 30, true, 0.0, 2), None);
    let mut other_head = external.clone();
    other_head.train.head_group = "general".into();

    let alone = train_multitask(std::slice::from_ref(&task), &src, &config(6, 0.0)).unwrap();
    for ext in [external, other_head] {
        let mixed = train_multitask(&[task.clone(), ext], &src, &config(6, 0.0)).unwrap();
        assert_eq!(mixed.history, alone.history);
        assert_eq!(mixed.best.encoder_weights, alone.best.encoder_weights);
        assert!(mixed.plans.iter().all(|p| p.external_count == 0));
    }
}

/// Replays the returned plans with a hand-written loop and checks that the
/// recorded history is exactly what plain SGD over those batches produces.
#[test]
fn history_matches_a_plain_loop_over_the_plans() {
    let src = SourceSpec::new("s", 8, 128);
    let a = split(separable_task("a", 80, 1), 60);
    let mut b = split(separable_task("b", 70, 2), 50);
    b.train.head_group = "b".into();
    let cfg = config(3, 0.0);
    let out = train_multitask(&[a.clone(), b.clone()], &src, &cfg).unwrap();

    let mut model = ToyModel::new(&src, cfg.hidden_dim);
    for t in [&a, &b] {
        model
            .ensure_head(&t.train.head_group, t.train.task_kind, cfg.mixture.seed)
            .unwrap();
    }
    let mut examples = HashMap::new();
    for t in [&a, &b] {
        for (s, e) in t
            .train
            .samples
            .iter()
            .zip(examples_for(&t.train.samples, &src).unwrap())
        {
            examples.insert(s.id.clone(), (t.train.head_group.clone(), e));
        }
    }
    let devs = [a.dev.as_ref().unwrap(), b.dev.as_ref().unwrap()];
    let score = |m: &ToyModel| devs.iter().map(|d| dev_metric(m, d, &src).unwrap()).sum::<f64>() / 2.0;
    assert_eq!(score(&model), out.history[0].selection_score);
    for (plan, record) in out.plans.iter().zip(&out.history[1..]) {
        for batch in &plan.batches {
            let group = &examples[&batch.sample_ids[0]].0;
            let xs: Vec<_> = batch.sample_ids.iter().map(|id| examples[id].1.clone()).collect();
            model.grad_step(group, &xs, cfg.multitask_lr).unwrap();
        }
        assert_eq!(score(&model), record.selection_score);
    }
}

#[test]
fn separable_task_improves_for_five_seeds() {
    for seed in 0..5 {
        let src = SourceSpec::new("s", 100 + seed, 256);
        let task = split(separable_task("t", 200, seed), 150);
        let out = train_multitask(std::slice::from_ref(&task), &src, &config(seed, 0.5)).unwrap();
        let first = out.history.first().unwrap().selection_score;
        let last = out.history.last().unwrap().selection_score;
        assert!(last > first, "seed {seed}: {first} -> {last}");
    }
}

#[test]
fn external_batches_follow_alpha() {
    let src = SourceSpec::new("s", 4, 64);
    let task = split(nli_triples("mednli", 40, false, 0.0, 1), 90);
    let mut ext = TaskData::new(nli_triples("mnli", 60, true, 0.0, 2), None);
    ext.train.role = Role::External;
    let out = train_multitask(&[task, ext], &src, &config(1, 0.5)).unwrap();
    for p in &out.plans {
        assert_eq!(p.in_domain_count, 12);
        assert_eq!(p.external_count, 6);
    }
}
