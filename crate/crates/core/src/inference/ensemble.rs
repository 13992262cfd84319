use crate::error::{Error, Result};

/// Index of the largest entry; exact ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Order-independent sum: values are added in sorted order so that any
/// permutation of the members gives a bit-identical total.
fn stable_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

/// Majority vote over `votes`, ties inside the majority set broken by the
/// summed member probabilities of each tied class (then lowest index).
///
/// `votes[m]` is member `m`'s class and `probs[m]` its probability vector.
pub fn vote_with_tiebreak<P: AsRef<[f64]>>(votes: &[usize], probs: &[P]) -> Result<usize> {
    let classes = check_shapes(probs)?;
    if votes.len() != probs.len() {
        return Err(Error::Dimension(format!(
            "{} votes for {} members",
            votes.len(),
            probs.len()
        )));
    }
    let mut counts = vec![0usize; classes];
    for &v in votes {
        if v >= classes {
            return Err(Error::Dimension(format!("vote {v} out of range for {classes} classes")));
        }
        counts[v] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0);
    let mut best: Option<(usize, f64)> = None;
    for class in (0..classes).filter(|&c| counts[c] == top) {
        let mass = stable_sum(probs.iter().map(|p| p.as_ref()[class]).collect());
        if best.is_none_or(|(_, b)| mass > b) {
            best = Some((class, mass));
        }
    }
    Ok(best.map(|(c, _)| c).unwrap_or(0))
}

fn check_shapes<P: AsRef<[f64]>>(probs: &[P]) -> Result<usize> {
    let first = probs
        .first()
        .ok_or_else(|| Error::Dimension("ensemble needs at least one member".into()))?;
    let classes = first.as_ref().len();
    if classes == 0 {
        return Err(Error::Dimension("empty probability vector".into()));
    }
    if let Some(p) = probs.iter().find(|p| p.as_ref().len() != classes) {
        return Err(Error::Dimension(format!(
            "probability vectors of length {} and {}",
            classes,
            p.as_ref().len()
        )));
    }
    Ok(classes)
}

/// Classification ensemble: each member votes for its argmax class, the
/// classes with the most votes form the majority set, and the member of that
/// set with the largest summed probability wins.
pub fn ensemble_classify<P: AsRef<[f64]>>(probs: &[P]) -> Result<usize> {
    check_shapes(probs)?;
    let votes: Vec<usize> = probs.iter().map(|p| argmax(p.as_ref())).collect();
    vote_with_tiebreak(&votes, probs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionVote {
    pub positive: bool,
    pub mean: f64,
}

/// Regression ensemble. A member votes positive when its score is `>= 0`;
/// a strict majority decides, and an exact split falls back to
/// `mean > 0`. Zero therefore counts as a positive vote but not as a
/// positive mean.
pub fn ensemble_regress(scores: &[f64]) -> Result<RegressionVote> {
    if scores.is_empty() {
        return Err(Error::Dimension("ensemble needs at least one member".into()));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::OutOfRange(format!("non-finite member score {s}")));
    }
    let m = scores.len();
    let mean = stable_sum(scores.to_vec()) / m as f64;
    let positive_votes = scores.iter().filter(|&&s| s >= 0.0).count();
    // compare 2 * votes with m to avoid halves
    let positive = match (2 * positive_votes).cmp(&m) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => mean > 0.0,
    };
    Ok(RegressionVote { positive, mean })
}
