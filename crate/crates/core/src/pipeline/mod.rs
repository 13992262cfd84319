//! End-to-end orchestration.

mod config;
mod stages;
mod table4;

pub use config::{CvSection, MedquadSection, PipelineConfig, QaSection, SourceEntry, Table4Section, TrainSection};
pub use stages::{
    ensemble, evaluate, finetune, ingest, load_eval_split, load_split_tasks, members, predict, rank, run_pipeline,
    run_stage, schedule, split, train, transform, Artifacts, Member, SCHEMA_VERSION, STAGES,
};
pub use table4::{
    run_noise_experiment, run_table4_experiment, score_grouping, standard_groupings, table4_report, GroupingRow,
    MemberScores, NoiseModel, Table4Report, Table4Trial,
};
