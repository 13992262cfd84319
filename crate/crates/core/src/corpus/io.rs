use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{check_task, Dataset, Role, SamplePair, TaskKind};
use crate::error::{Error, Result};
use crate::jsonl::write_jsonl;

/// Dataset metadata that is not stored in the JSON-Lines file itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub task_kind: TaskKind,
    pub role: Role,
    pub head_group: String,
}

/// Which dataset-construction recipe the pipeline applies to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    #[default]
    Plain,
    /// Merge dev into train; the test split becomes the dev split.
    Mednli,
    /// Move a seeded half of dev into train.
    Rqe,
    /// Modified relevance scores plus the dev reshuffle.
    Qa,
    /// Same-page negative sampling plus a seeded train/eval split.
    Medquad,
}

impl std::str::FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "plain" => Ok(Recipe::Plain),
            "mednli" => Ok(Recipe::Mednli),
            "rqe" => Ok(Recipe::Rqe),
            "qa" => Ok(Recipe::Qa),
            "medquad" => Ok(Recipe::Medquad),
            other => Err(format!("unknown recipe `{other}`")),
        }
    }
}

/// Parsed `key = value` dataset manifest.
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub spec: DatasetSpec,
    pub recipe: Recipe,
    pub path: PathBuf,
    pub dev_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let bad = |message: String| Error::Manifest {
        path: path.to_path_buf(),
        message,
    };

    let mut name = None;
    let mut task_kind = None;
    let mut role = None;
    let mut head_group = None;
    let mut recipe = Recipe::Plain;
    let mut data = None;
    let mut dev = None;
    let mut test = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", idx + 1)))?;
        let value = value.trim().trim_matches('"').to_string();
        match key.trim() {
            "name" => name = Some(value),
            "task_kind" => task_kind = Some(value.parse::<TaskKind>().map_err(&bad)?),
            "role" => role = Some(value.parse::<Role>().map_err(&bad)?),
            "head_group" => head_group = Some(value),
            "recipe" => recipe = value.parse().map_err(&bad)?,
            "path" => data = Some(base.join(value)),
            "dev_path" => dev = Some(base.join(value)),
            "test_path" => test = Some(base.join(value)),
            other => return Err(bad(format!("line {}: unknown key `{other}`", idx + 1))),
        }
    }

    let name: String = name.ok_or_else(|| bad("missing `name`".into()))?;
    Ok(DatasetManifest {
        spec: DatasetSpec {
            head_group: head_group.unwrap_or_else(|| name.clone()),
            name,
            task_kind: task_kind.ok_or_else(|| bad("missing `task_kind`".into()))?,
            role: role.unwrap_or(Role::InDomain),
        },
        recipe,
        path: data.ok_or_else(|| bad("missing `path`".into()))?,
        dev_path: dev,
        test_path: test,
    })
}

/// Reads a JSON-Lines dataset, preserving file order. Blank lines are skipped.
pub fn load_dataset(path: impl AsRef<Path>, spec: &DatasetSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: SamplePair = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        check_task(&spec.name, spec.task_kind, &sample)?;
        if !seen.insert(sample.id.clone()) {
            return Err(Error::DuplicateId {
                dataset: spec.name.clone(),
                id: sample.id,
            });
        }
        samples.push(sample);
    }

    Ok(Dataset {
        name: spec.name.clone(),
        task_kind: spec.task_kind,
        role: spec.role,
        head_group: spec.head_group.clone(),
        samples,
    })
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    write_jsonl(path, &dataset.samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: TaskKind) -> DatasetSpec {
        DatasetSpec {
            name: "fixture".into(),
            task_kind: kind,
            role: Role::InDomain,
            head_group: "g".into(),
        }
    }

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("d.jsonl");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_four_line_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            r#"{"id":"1","text_a":"p one","text_b":"h one","label":0}
{"id":"2","text_a":"p two","text_b":"h two","label":1}
{"id":"3","text_a":"p three","text_b":"h three","label":1}
{"id":"4","text_a":"p four","text_b":"h four","label":0,"premise_group":"g4"}
"#,
        );
        let ds = load_dataset(&p, &spec(TaskKind::Classification { classes: 2 })).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.task_kind, TaskKind::Classification { classes: 2 });
        assert_eq!(ds.samples[3].premise_group.as_deref(), Some("g4"));
        let ids: Vec<_> = ds.samples.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3", "4"]);
    }

    #[test]
    fn duplicate_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "{\"id\":\"dup\",\"text_a\":\"a\",\"text_b\":\"b\",\"label\":0}\n{\"id\":\"dup\",\"text_a\":\"c\",\"text_b\":\"d\",\"label\":1}\n",
        );
        let err = load_dataset(&p, &spec(TaskKind::Classification { classes: 2 })).unwrap_err();
        assert!(err.to_string().contains("dup"), "{err}");
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "");
        let ds = load_dataset(&p, &spec(TaskKind::Regression)).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "{\"id\":\"1\",\"text_a\":\"a\",\"text_b\":\"b\",\"target_score\":1.0}\n{not json\n",
        );
        match load_dataset(&p, &spec(TaskKind::Regression)) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_on_regression_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "{\"id\":\"1\",\"text_a\":\"a\",\"text_b\":\"b\",\"label\":1}\n",
        );
        assert!(matches!(
            load_dataset(&p, &spec(TaskKind::Regression)),
            Err(Error::TaskMismatch { .. })
        ));
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("qa.manifest");
        fs::write(
            &m,
            "# answer relevance\nname = qa\ntask_kind = regression\nrole = in_domain\nhead_group = qa\nrecipe = qa\npath = qa.train.jsonl\ndev_path = qa.dev.jsonl\n",
        )
        .unwrap();
        let man = load_manifest(&m).unwrap();
        assert_eq!(man.spec.name, "qa");
        assert_eq!(man.recipe, Recipe::Qa);
        assert_eq!(man.path, dir.path().join("qa.train.jsonl"));
        assert_eq!(man.dev_path, Some(dir.path().join("qa.dev.jsonl")));
        assert!(man.test_path.is_none());
    }

    #[test]
    fn manifest_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("x.manifest");
        fs::write(&m, "name = x\ntask_kind = regression\npath = x\ncolour = blue\n").unwrap();
        assert!(matches!(load_manifest(&m), Err(Error::Manifest { .. })));
    }
}
