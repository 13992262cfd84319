use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::LOG_EPSILON;

pub const ENTAILMENT: usize = 0;
pub const NEUTRAL: usize = 1;
pub const CONTRADICTION: usize = 2;

/// All one-to-one label assignments for three hypotheses, in lexicographic
/// order; `perm[row]` is the label given to hypothesis `row`.
pub const LABEL_PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Assigns entailment, neutral and contradiction once each to the three
/// hypotheses of one premise, maximizing the joint log-likelihood
/// (probabilities clamped at `LOG_EPSILON`). Ties keep the earliest
/// permutation.
pub fn mednli_constrained_decode(probs: &[[f64; 3]; 3]) -> [usize; 3] {
    let log = |p: f64| p.max(LOG_EPSILON).ln();
    let mut best = LABEL_PERMUTATIONS[0];
    let mut best_score = f64::NEG_INFINITY;
    for perm in LABEL_PERMUTATIONS {
        let score = (0..3).map(|row| log(probs[row][perm[row]])).sum::<f64>();
        if score > best_score {
            best = perm;
            best_score = score;
        }
    }
    best
}

/// Groups `(sample_id, premise_group, probs)` rows and decodes each group.
///
/// Rows without a premise group are rejected, as are groups whose size is
/// not three. Returns sample id to label.
pub fn decode_premise_groups<'a>(
    rows: impl IntoIterator<Item = (&'a str, Option<&'a str>, &'a [f64])>,
) -> Result<BTreeMap<String, usize>> {
    let mut groups: BTreeMap<&str, Vec<(&str, &[f64])>> = BTreeMap::new();
    for (id, group, probs) in rows {
        let group = group.ok_or_else(|| Error::OutOfRange(format!("sample `{id}` has no premise_group")))?;
        if probs.len() != 3 {
            return Err(Error::Dimension(format!(
                "sample `{id}` has {} classes, need 3",
                probs.len()
            )));
        }
        groups.entry(group).or_default().push((id, probs));
    }
    let mut out = BTreeMap::new();
    for (group, members) in groups {
        if members.len() != 3 {
            return Err(Error::OutOfRange(format!(
                "premise group `{group}` has {} hypotheses, need exactly 3",
                members.len()
            )));
        }
        let matrix: [[f64; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| members[r].1[c]));
        let assignment = mednli_constrained_decode(&matrix);
        for (row, (id, _)) in members.iter().enumerate() {
            out.insert(id.to_string(), assignment[row]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_dominant_is_identity() {
        let m = [[0.9, 0.05, 0.05], [0.05, 0.9, 0.05], [0.05, 0.05, 0.9]];
        assert_eq!(mednli_constrained_decode(&m), [ENTAILMENT, NEUTRAL, CONTRADICTION]);
    }

    #[test]
    fn joint_beats_greedy() {
        let m = [[0.5, 0.45, 0.05], [0.6, 0.3, 0.1], [0.2, 0.2, 0.6]];
        assert_eq!(mednli_constrained_decode(&m), [NEUTRAL, ENTAILMENT, CONTRADICTION]);
    }

    #[test]
    fn uniform_takes_first_permutation() {
        let t = 1.0 / 3.0;
        assert_eq!(mednli_constrained_decode(&[[t; 3]; 3]), LABEL_PERMUTATIONS[0]);
    }

    #[test]
    fn group_size_checked() {
        let p = [0.2, 0.3, 0.5];
        let rows = vec![("a", Some("g"), &p[..]), ("b", Some("g"), &p[..])];
        assert!(decode_premise_groups(rows).is_err());
    }

    #[test]
    fn groups_decode_independently() {
        let e = [0.8, 0.1, 0.1];
        let n = [0.1, 0.8, 0.1];
        let c = [0.1, 0.1, 0.8];
        let rows = vec![
            ("g1-c", Some("g1"), &c[..]),
            ("g2-e", Some("g2"), &e[..]),
            ("g1-e", Some("g1"), &e[..]),
            ("g1-n", Some("g1"), &n[..]),
            ("g2-n", Some("g2"), &n[..]),
            ("g2-c", Some("g2"), &c[..]),
        ];
        let out = decode_premise_groups(rows).unwrap();
        assert_eq!(out["g1-c"], CONTRADICTION);
        assert_eq!(out["g1-e"], ENTAILMENT);
        assert_eq!(out["g2-n"], NEUTRAL);
    }
}
