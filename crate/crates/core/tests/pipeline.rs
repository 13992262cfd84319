use std::fs;
use std::path::{Path, PathBuf};

use mixtrain::pipeline::{members, run_pipeline, run_stage, Artifacts, PipelineConfig, STAGES};
use mixtrain::Error;

fn toy_config() -> PipelineConfig {
    PipelineConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/toy.toml")).unwrap()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn cross_validation_members_are_all_ensembled() {
    let cfg = toy_config();
    let out = tempfile::tempdir().unwrap();
    run_pipeline(&cfg, out.path()).unwrap();

    let cv: Vec<String> = members(&cfg)
        .into_iter()
        .filter(|m| m.fold.is_some())
        .map(|m| m.id)
        .collect();
    assert_eq!(cv.len(), 10);
    let qa = json(out.path().join("ensemble/qa.members.json"));
    let selected: Vec<&str> = qa["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    for id in &cv {
        assert!(selected.contains(&id.as_str()), "{id} missing from the qa ensemble");
    }
    // Cross-validation members predict only on their own task.
    let rqe = json(out.path().join("ensemble/rqe.members.json"));
    assert!(rqe["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| !c[0].as_str().unwrap().contains("-cv")));

    let manifest = json(out.path().join("run_manifest.json"));
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["members"].as_array().unwrap().len(), 14);
    assert!(manifest["config_hash"].as_str().unwrap().len() == 64);
    for stage in ["ingest", "transform", "split"] {
        let index = json(out.path().join(format!("datasets/{stage}/index.json")));
        assert_eq!(index["schema_version"], 1);
        assert_eq!(index["config_hash"], manifest["config_hash"]);
    }
    let summary = fs::read_to_string(out.path().join("reports/summary.txt")).unwrap();
    for task in ["mednli", "rqe", "qa", "medquad"] {
        assert!(summary.contains(task));
    }
}

#[test]
fn stages_rerun_independently() {
    let cfg = toy_config();
    let out = tempfile::tempdir().unwrap();
    let art = Artifacts::new(out.path());
    for stage in STAGES {
        run_stage(stage, &cfg, &art).unwrap();
    }
    let before = fs::read(out.path().join("reports/qa.json")).unwrap();
    let ensemble_before = fs::read(out.path().join("ensemble/mednli.jsonl")).unwrap();
    for stage in ["ensemble", "rank", "evaluate"] {
        run_stage(stage, &cfg, &art).unwrap();
    }
    assert_eq!(fs::read(out.path().join("reports/qa.json")).unwrap(), before);
    assert_eq!(
        fs::read(out.path().join("ensemble/mednli.jsonl")).unwrap(),
        ensemble_before
    );
}

#[test]
fn failures_name_the_stage() {
    let mut cfg = toy_config();
    let out = tempfile::tempdir().unwrap();
    let art = Artifacts::new(out.path());
    match run_stage("predict", &cfg, &art) {
        Err(Error::Stage { stage: "predict", .. }) => {}
        other => panic!("expected a predict failure, got {other:?}"),
    }
    cfg.thresholds.insert("rqe".into(), 100.0);
    match run_pipeline(&cfg, out.path()) {
        Err(Error::Stage { stage, source }) => {
            assert_eq!(stage, "ensemble");
            assert!(matches!(*source, Error::NoSurvivors { .. }));
        }
        other => panic!("expected an ensemble failure, got {other:?}"),
    }
    assert!(run_stage("bogus", &cfg, &art).is_err());
}

#[test]
fn seed_changes_outputs() {
    let mut cfg = toy_config();
    cfg.cv.enabled = false;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_pipeline(&cfg, a.path()).unwrap();
    cfg.seed += 1;
    run_pipeline(&cfg, b.path()).unwrap();
    assert_ne!(
        fs::read(a.path().join("predictions/rqe/base-0.jsonl")).unwrap(),
        fs::read(b.path().join("predictions/rqe/base-0.jsonl")).unwrap()
    );
}

#[test]
fn shipped_configs_validate() {
    let full = PipelineConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/full_scale.toml")).unwrap();
    assert_eq!(full.mixture.alpha, 0.5);
    assert_eq!(full.mixture.max_epoch, 20);
    assert_eq!(full.train.per_task_epochs, 6);
    assert_eq!(full.thresholds["qa"], 83.0);
    assert_eq!(full.cv.folds, 5);
    assert_eq!(full.sources.iter().map(|s| s.members).sum::<usize>(), 17);
}
