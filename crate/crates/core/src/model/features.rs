use serde::{Deserialize, Serialize};

use crate::seed::fnv1a;

/// A representation family. Distinct seeds give distinct hash layouts and
/// encoder initializations, standing in for distinct pretrained models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub seed: u64,
    pub dim: usize,
}

impl SourceSpec {
    pub fn new(name: impl Into<String>, seed: u64, dim: usize) -> Self {
        SourceSpec {
            name: name.into(),
            seed,
            dim,
        }
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Signed hashed bag of side-tagged unigrams, bigrams, shared tokens and
/// an overlap count, L2-normalized. Returns a zero vector for two empty texts.
pub fn featurize(text_a: &str, text_b: &str, source: &SourceSpec) -> Vec<f64> {
    let mut v = vec![0.0; source.dim];
    if source.dim == 0 {
        return v;
    }
    let ta = tokens(text_a);
    let tb = tokens(text_b);

    let mut add = |feature: &str| {
        let h = fnv1a(source.seed, feature.as_bytes());
        let idx = (h % source.dim as u64) as usize;
        v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
    };

    for (side, toks) in [("a", &ta), ("b", &tb)] {
        for t in toks.iter() {
            add(&format!("{side}:{t}"));
        }
        for w in toks.windows(2) {
            add(&format!("{side}:{} {}", w[0], w[1]));
        }
    }
    let mut shared: Vec<&String> = ta.iter().filter(|t| tb.contains(t)).collect();
    shared.sort();
    shared.dedup();
    for t in shared {
        add(&format!("x:{t}"));
        // One slot counts the overlap regardless of which token it is.
        add("x:*");
    }

    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let src = SourceSpec::new("a", 1, 64);
        let v = featurize("The patient has fever", "Patient is febrile", &src);
        assert_eq!(v.len(), 64);
        assert_eq!(v, featurize("The patient has fever", "Patient is febrile", &src));
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_texts_give_zero_vector() {
        let v = featurize("", "  ", &SourceSpec::new("a", 1, 8));
        assert!(v.iter().all(|&x| x == 0.0));
    }
}
