//! Small synthetic corpora with learnable structure, for tests, examples
//! and the bundled toy pipeline. Generation is deterministic in the seed.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::{Dataset, Role, SamplePair, TaskKind};
use crate::inference::{CONTRADICTION, ENTAILMENT, NEUTRAL};
use crate::seed::{derive_seed, rng_from, SeededRng};

const CONDITIONS: &[&str] = &[
    "fever",
    "anemia",
    "asthma",
    "sepsis",
    "hypertension",
    "diabetes",
    "pneumonia",
    "migraine",
    "arrhythmia",
    "bronchitis",
    "cirrhosis",
    "dermatitis",
    "gastritis",
    "hepatitis",
    "influenza",
    "nephritis",
    "obesity",
    "pancreatitis",
    "psoriasis",
    "stroke",
    "tachycardia",
    "thrombosis",
    "ulcer",
    "vertigo",
];

const GENERAL: &[&str] = &[
    "guitar", "bicycle", "garden", "river", "kitchen", "market", "soccer", "painting", "mountain", "library", "train",
    "beach", "concert", "forest", "bakery", "museum",
];

const FILLER: &[&str] = &[
    "today",
    "reports",
    "recent",
    "history",
    "noted",
    "per",
    "chart",
    "exam",
    "with",
    "mild",
    "since",
    "morning",
    "during",
    "visit",
    "admission",
    "review",
];

fn pick<'a>(rng: &mut SeededRng, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().unwrap_or_default()
}

fn other<'a>(rng: &mut SeededRng, words: &[&'a str], not: &str) -> &'a str {
    loop {
        let w = pick(rng, words);
        if w != not {
            return w;
        }
    }
}

fn filler(rng: &mut SeededRng, n: usize) -> String {
    (0..n).map(|_| pick(rng, FILLER)).collect::<Vec<_>>().join(" ")
}

/// Binary task: label 1 when the hypothesis names the premise's condition.
pub fn separable_task(name: &str, n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from(derive_seed(seed, &["separable", name]));
    let samples = (0..n)
        .map(|i| {
            let cond = pick(&mut rng, CONDITIONS);
            let label = i % 2;
            let hyp = if label == 1 {
                cond
            } else {
                other(&mut rng, CONDITIONS, cond)
            };
            let fa = rng.random_range(1..4);
            let fb = rng.random_range(0..3);
            SamplePair::classification(
                format!("{name}-{seed}-{i}"),
                format!("patient with {cond} {}", filler(&mut rng, fa)),
                format!("{hyp} {}", filler(&mut rng, fb)),
                label,
            )
        })
        .collect();
    Dataset::new(name, TaskKind::Classification { classes: 2 }, Role::InDomain, name).with_samples(samples)
}

/// Three-way inference triples: each premise gets one entailed, one neutral
/// and one contradicted hypothesis, consecutive and sharing a premise group.
/// `noise` is the per-sample probability of a replaced (random) label.
pub fn nli_triples(name: &str, groups: usize, general: bool, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_from(derive_seed(seed, &["nli", name]));
    let vocab = if general { GENERAL } else { CONDITIONS };
    let mut samples = Vec::with_capacity(groups * 3);
    for g in 0..groups {
        let topic = pick(&mut rng, vocab);
        let premise = if general {
            format!("the man went to the {topic} {}", filler(&mut rng, 2))
        } else {
            format!("patient admitted with {topic} {}", filler(&mut rng, 2))
        };
        let unrelated = other(&mut rng, vocab, topic);
        let hyps = [
            (ENTAILMENT, format!("there is {topic}")),
            (NEUTRAL, format!("there is {unrelated}")),
            (CONTRADICTION, format!("denies any {topic} never")),
        ];
        for (label, hyp) in hyps {
            let label = if rng.random_bool(noise) {
                rng.random_range(0..3)
            } else {
                label
            };
            let mut s = SamplePair::classification(
                format!("{name}-g{g}-{label}-{}", samples.len()),
                premise.clone(),
                hyp,
                label,
            );
            s.premise_group = Some(format!("{name}-g{g}"));
            samples.push(s);
        }
    }
    let role = if general { Role::External } else { Role::InDomain };
    Dataset::new(name, TaskKind::Classification { classes: 3 }, role, "nli").with_samples(samples)
}

/// Question-entailment pairs: entailed when both questions ask about the
/// same condition.
pub fn question_pairs(name: &str, n: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_from(derive_seed(seed, &["rqe", name]));
    let samples = (0..n)
        .map(|i| {
            let cond = pick(&mut rng, CONDITIONS);
            let entailed = rng.random_bool(0.5);
            let second = if entailed {
                cond
            } else {
                other(&mut rng, CONDITIONS, cond)
            };
            let label = usize::from(entailed != rng.random_bool(noise));
            let f = rng.random_range(0..3);
            SamplePair::classification(
                format!("{name}-{i}"),
                format!("my doctor said i have {cond} what should i do {}", filler(&mut rng, f)),
                format!("treatment options for {second}"),
                label,
            )
        })
        .collect();
    Dataset::new(name, TaskKind::Classification { classes: 2 }, Role::InDomain, name).with_samples(samples)
}

/// Ranked answers: `per_question` answers per question, relevance 4/3 when
/// the answer discusses the question's condition, 1/2 otherwise. Every
/// `alexa_every`-th question is tagged `alexa`. `target_score` holds the raw
/// relevance until the score transform runs.
pub fn ranked_answers(name: &str, questions: usize, per_question: usize, alexa_every: usize, seed: u64) -> Dataset {
    let mut rng = rng_from(derive_seed(seed, &["qa", name]));
    let mut samples = Vec::new();
    for q in 0..questions {
        let cond = pick(&mut rng, CONDITIONS);
        let question = format!("what causes {cond}");
        let mut rels: Vec<u8> = (0..per_question)
            .map(|_| {
                let on_topic = rng.random_bool(0.5);
                if on_topic {
                    rng.random_range(3..=4)
                } else {
                    rng.random_range(1..=2)
                }
            })
            .collect();
        rels.sort_unstable_by(|a, b| b.cmp(a));
        for (a, &rel) in rels.iter().enumerate() {
            let topic = if rel >= 3 {
                cond
            } else {
                other(&mut rng, CONDITIONS, cond)
            };
            let depth = if rel % 2 == 0 {
                "causes and risk factors of"
            } else {
                "general notes on"
            };
            let mut s = SamplePair::regression(
                format!("{name}-q{q}-a{a}"),
                format!("{depth} {topic} {}", filler(&mut rng, 2)),
                question.clone(),
                f64::from(rel),
            );
            s.question_id = Some(format!("{name}-q{q}"));
            s.gold_relevance = Some(rel);
            s.gold_rank = Some(a as u32 + 1);
            if alexa_every > 0 && q % alexa_every == 0 {
                s.source_tag = Some("alexa".into());
            }
            samples.push(s);
        }
    }
    Dataset::new(name, TaskKind::Regression, Role::InDomain, "qa").with_samples(samples)
}

/// Positive-only question/answer pairs grouped into pages about one
/// condition each; every pair on a page has a distinct answer.
pub fn faq_pages(name: &str, pages: usize, per_page: usize, seed: u64) -> Dataset {
    let mut rng = rng_from(derive_seed(seed, &["faq", name]));
    let aspects = ["symptoms", "treatment", "causes", "prevention", "outlook", "diagnosis"];
    let mut samples = Vec::new();
    for p in 0..pages {
        let cond = pick(&mut rng, CONDITIONS);
        for (a, aspect) in aspects.iter().cycle().take(per_page).enumerate() {
            let mut s = SamplePair::regression(
                format!("{name}-p{p}-{a}"),
                format!("the {aspect} of {cond} include {}", filler(&mut rng, 3)),
                format!("what are the {aspect} of {cond}"),
                1.0,
            );
            s.page_id = Some(format!("{name}-page{p}"));
            s.question_id = Some(format!("{name}-p{p}-{a}"));
            samples.push(s);
        }
    }
    Dataset::new(name, TaskKind::Regression, Role::InDomain, "qa").with_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_valid_and_deterministic() {
        for ds in [
            separable_task("s", 20, 1),
            nli_triples("mednli", 10, false, 0.1, 1),
            nli_triples("mnli", 10, true, 0.0, 1),
            question_pairs("rqe", 20, 0.1, 1),
            ranked_answers("qa", 10, 5, 2, 1),
            faq_pages("medquad", 5, 3, 1),
        ] {
            ds.validate().unwrap();
        }
        assert_eq!(ranked_answers("qa", 4, 5, 2, 9), ranked_answers("qa", 4, 5, 2, 9));
    }

    #[test]
    fn triples_are_grouped() {
        let ds = nli_triples("mednli", 4, false, 0.0, 3);
        for chunk in ds.samples.chunks(3) {
            let labels: Vec<_> = chunk.iter().map(|s| s.label.unwrap()).collect();
            assert_eq!(labels, [ENTAILMENT, NEUTRAL, CONTRADICTION]);
            assert!(chunk.iter().all(|s| s.premise_group == chunk[0].premise_group));
        }
    }
}
