use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::{Dataset, SamplePair};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

/// `source_tag` value marking questions from the voice-assistant subset.
pub const ALEXA_TAG: &str = "alexa";

/// Number of questions taken from each side by [`qa_dev_reshuffle`].
pub const QA_DEV_QUESTIONS: usize = 25;

/// Train followed by dev.
pub fn mednli_merge_dev(train: &Dataset, dev: &Dataset) -> Dataset {
    let mut samples = train.samples.clone();
    samples.extend(dev.samples.iter().cloned());
    train.derive(samples)
}

/// Moves a seeded `floor(|eval| / 2)` eval samples into train.
///
/// Moved samples are appended to train in eval order; the remainder keeps
/// eval order.
pub fn rqe_shuffle_split(train: &Dataset, eval: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let n = eval.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(derive_seed(seed, &["rqe-shuffle"])));
    let moved: HashSet<usize> = order[..n / 2].iter().copied().collect();

    let mut new_train = train.samples.clone();
    let mut new_eval = Vec::with_capacity(n - n / 2);
    for (i, s) in eval.samples.iter().enumerate() {
        if moved.contains(&i) {
            new_train.push(s.clone());
        } else {
            new_eval.push(s.clone());
        }
    }
    (train.derive(new_train), eval.derive(new_eval))
}

fn question_order<'a>(samples: impl Iterator<Item = &'a SamplePair>) -> Result<Vec<&'a str>> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    for s in samples {
        let q = s
            .question_id
            .as_deref()
            .ok_or_else(|| Error::OutOfRange(format!("sample `{}` has no question_id", s.id)))?;
        if seen.insert(q) {
            order.push(q);
        }
    }
    Ok(order)
}

fn is_alexa(s: &SamplePair) -> bool {
    s.source_tag
        .as_deref()
        .is_some_and(|t| t.eq_ignore_ascii_case(ALEXA_TAG))
}

/// Rebuilds the answer-relevance dev split.
///
/// New dev: every pair of the last `questions` dev questions, then every
/// pair of the last `questions` Alexa-tagged train questions. New train:
/// all remaining train pairs, then all remaining dev pairs. Questions are
/// ordered by first appearance.
pub fn qa_dev_reshuffle(train: &Dataset, dev: &Dataset, questions: usize) -> Result<(Dataset, Dataset)> {
    let dev_questions = question_order(dev.samples.iter())?;
    let alexa_questions = question_order(train.samples.iter().filter(|s| is_alexa(s)))?;
    // every train pair needs a question id too
    question_order(train.samples.iter())?;

    for (what, found) in [
        ("development questions", dev_questions.len()),
        ("alexa training questions", alexa_questions.len()),
    ] {
        if found < questions {
            return Err(Error::NotEnough {
                what: what.into(),
                needed: questions,
                found,
            });
        }
    }

    let from_dev: HashSet<&str> = dev_questions[dev_questions.len() - questions..]
        .iter()
        .copied()
        .collect();
    let from_train: HashSet<&str> = alexa_questions[alexa_questions.len() - questions..]
        .iter()
        .copied()
        .collect();
    let in_set = |s: &SamplePair, set: &HashSet<&str>| set.contains(s.question_id.as_deref().unwrap_or_default());

    let mut new_dev: Vec<SamplePair> = dev.samples.iter().filter(|s| in_set(s, &from_dev)).cloned().collect();
    new_dev.extend(train.samples.iter().filter(|s| in_set(s, &from_train)).cloned());

    let mut new_train: Vec<SamplePair> = train
        .samples
        .iter()
        .filter(|s| !in_set(s, &from_train))
        .cloned()
        .collect();
    new_train.extend(dev.samples.iter().filter(|s| !in_set(s, &from_dev)).cloned());

    Ok((train.derive(new_train), dev.derive(new_dev)))
}

/// One cross-validation split.
#[derive(Debug, Clone)]
pub struct Fold {
    pub index: usize,
    pub train: Dataset,
    pub validation: Dataset,
}

/// Splits `pairs` into `k` contiguous slices (sizes differ by at most one,
/// larger slices first); fold `j` validates on slice `j` and trains on the
/// rest in input order.
pub fn cv_folds(pairs: &Dataset, k: usize) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::OutOfRange(format!("fold count {k} < 2")));
    }
    let n = pairs.len();
    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let len = base + usize::from(j < extra);
        bounds.push(start..start + len);
        start += len;
    }

    Ok(bounds
        .iter()
        .enumerate()
        .map(|(j, range)| {
            let validation = pairs.samples[range.clone()].to_vec();
            let train = pairs.samples[..range.start]
                .iter()
                .chain(&pairs.samples[range.end..])
                .cloned()
                .collect();
            Fold {
                index: j,
                train: pairs.derive(train),
                validation: pairs.derive(validation),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Role, TaskKind};

    fn numbered(n: usize) -> Dataset {
        Dataset::new("d", TaskKind::Classification { classes: 2 }, Role::InDomain, "g").with_samples(
            (0..n)
                .map(|i| SamplePair::classification(format!("s{i}"), "a", "b", i % 2))
                .collect(),
        )
    }

    fn qa_pairs(prefix: &str, questions: usize, per_q: usize, alexa_every: Option<usize>) -> Dataset {
        let mut samples = Vec::new();
        for q in 0..questions {
            for a in 0..per_q {
                let mut s = SamplePair::regression(format!("{prefix}{q}-{a}"), "ans", "q", 1.0);
                s.question_id = Some(format!("{prefix}{q}"));
                if alexa_every.is_some_and(|e| q % e == 0) {
                    s.source_tag = Some("Alexa".into());
                }
                samples.push(s);
            }
        }
        Dataset::new("qa", TaskKind::Regression, Role::InDomain, "qa").with_samples(samples)
    }

    #[test]
    fn merge_concatenates() {
        let merged = mednli_merge_dev(&numbered(100), &numbered(20));
        assert_eq!(merged.len(), 120);
    }

    #[test]
    fn rqe_moves_half() {
        let (t, e) = rqe_shuffle_split(&numbered(10), &numbered(7), 3);
        assert_eq!((t.len(), e.len()), (13, 4));
        let (t2, e2) = rqe_shuffle_split(&numbered(10), &numbered(7), 3);
        assert_eq!((t, e), (t2, e2));
    }

    #[test]
    fn cv_slice_sizes() {
        let folds = cv_folds(&numbered(13), 5).unwrap();
        let sizes: Vec<_> = folds.iter().map(|f| f.validation.len()).collect();
        assert_eq!(sizes, [3, 3, 3, 2, 2]);
        for f in &folds {
            assert_eq!(f.train.len() + f.validation.len(), 13);
        }
        assert!(cv_folds(&numbered(13), 1).is_err());
    }

    #[test]
    fn reshuffle_takes_last_questions() {
        let train = qa_pairs("t", 60, 2, Some(2)); // 30 alexa questions
        let dev = qa_pairs("d", 30, 3, None);
        let (t, d) = qa_dev_reshuffle(&train, &dev, 25).unwrap();
        assert_eq!(d.len(), 25 * 3 + 25 * 2);
        assert_eq!(t.len() + d.len(), train.len() + dev.len());
        // the first 5 dev questions go to train, the first 5 alexa questions stay
        assert!(t.samples.iter().any(|s| s.question_id.as_deref() == Some("d4")));
        assert!(d.samples.iter().any(|s| s.question_id.as_deref() == Some("d5")));
        assert!(t.samples.iter().any(|s| s.question_id.as_deref() == Some("t8")));
        assert!(d.samples.iter().any(|s| s.question_id.as_deref() == Some("t10")));
    }

    #[test]
    fn reshuffle_needs_enough_questions() {
        let train = qa_pairs("t", 60, 1, Some(3)); // 20 alexa questions
        let dev = qa_pairs("d", 30, 1, None);
        assert!(matches!(
            qa_dev_reshuffle(&train, &dev, 25),
            Err(Error::NotEnough {
                needed: 25,
                found: 20,
                ..
            })
        ));
    }
}
