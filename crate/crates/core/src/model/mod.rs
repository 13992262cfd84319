//! Trainable scorer: hashed pair features, a shared tanh encoder and
//! per-group answer heads, trained with SGD under the mixture scheduler.

mod checkpoint;
mod features;
mod loss;
mod toy;
mod train;

pub use checkpoint::{config_hash, Checkpoint, Provenance, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use features::{featurize, SourceSpec};
pub use loss::{cross_entropy_loss, mse_loss, softmax, LOG_EPSILON};
pub use toy::{Example, Gradients, Head, Output, Target, ToyModel, HEAD_INIT_RANGE};
pub use train::{
    dev_metric, examples_for, fine_tune_task, train_multitask, EpochRecord, TaskData, TrainConfig, TrainOutcome,
};
