//! Multi-task training on synthetic tasks, then per-task fine-tuning.
//!
//!     cargo run --release -p mixtrain --example train_toy

use anyhow::Result;
use mixtrain::model::{fine_tune_task, train_multitask, SourceSpec, TaskData, TrainConfig};
use mixtrain::scheduler::MixtureConfig;
use mixtrain::synth::{nli_triples, question_pairs};

fn main() -> Result<()> {
    let nli = nli_triples("mednli", 80, false, 0.05, 1);
    let (train, dev) = nli.samples.split_at(180);
    let mednli = TaskData::new(nli.derive(train.to_vec()), Some(nli.derive(dev.to_vec())));
    let q = question_pairs("rqe", 240, 0.05, 2);
    let (train, dev) = q.samples.split_at(180);
    let rqe = TaskData::new(q.derive(train.to_vec()), Some(q.derive(dev.to_vec())));
    let mnli = TaskData::new(nli_triples("mnli", 100, true, 0.0, 3), None);

    let source = SourceSpec::new("base", 11, 512);
    let config = TrainConfig {
        mixture: MixtureConfig {
            max_epoch: 10,
            seed: 7,
            ..MixtureConfig::default()
        },
        multitask_lr: 0.008,
        per_task_lr: 0.003,
        per_task_epochs: 3,
        hidden_dim: 32,
    };
    let tasks = [mednli.clone(), rqe.clone(), mnli];
    let out = train_multitask(&tasks, &source, &config)?;
    println!("epoch  train-loss  dev");
    for r in &out.history {
        let loss = r.mean_train_loss.map_or("-".to_string(), |l| format!("{l:.4}"));
        println!("{:>5}  {loss:>10}  {:?}", r.epoch, r.dev_metrics);
    }
    println!("best epoch {}", out.best_epoch);

    for task in [&mednli, &rqe] {
        let tuned = fine_tune_task(&out.best, task, &source, &config)?;
        println!(
            "fine-tuned {}: dev {:.3} (epoch {})",
            task.train.name,
            tuned.best_record().selection_score,
            tuned.best_epoch
        );
    }
    Ok(())
}
