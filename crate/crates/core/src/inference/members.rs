use std::collections::BTreeMap;

use super::PredictionSet;
use crate::error::{Error, Result};

/// Default member-selection thresholds, dev accuracy in percent.
pub fn default_thresholds() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("mednli".to_string(), 87.7),
        ("rqe".to_string(), 83.5),
        ("qa".to_string(), 83.0),
    ])
}

/// Keeps the sets whose dev metric is strictly above `threshold`.
pub fn select_members<'a>(sets: &'a [PredictionSet], task: &str, threshold: f64) -> Result<Vec<&'a PredictionSet>> {
    let mut kept = Vec::new();
    for set in sets {
        let metric = set
            .dev_metric
            .ok_or_else(|| Error::Config(format!("prediction set `{}` has no dev metric", set.model_id)))?;
        if metric > threshold {
            kept.push(set);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoSurvivors {
            task: task.to_string(),
            threshold,
        });
    }
    Ok(kept)
}
