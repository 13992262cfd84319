use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::SourceSpec;
use super::loss::{cross_entropy_loss, mse_loss, softmax};
use crate::corpus::TaskKind;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

/// Answer heads start uniform in `[-HEAD_INIT_RANGE, HEAD_INIT_RANGE]`.
pub const HEAD_INIT_RANGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    /// `classes x hidden` weights, row-major.
    Classification {
        classes: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Regression {
        weights: Vec<f64>,
        bias: f64,
    },
}

impl Head {
    fn param_count(&self) -> usize {
        match self {
            Head::Classification { weights, bias, .. } => weights.len() + bias.len(),
            Head::Regression { weights, .. } => weights.len() + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Class(usize),
    Score(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Probs(Vec<f64>),
    Score(f64),
}

/// Shared encoder `h = tanh(W x + b)` with answer heads keyed by head group.
///
/// Encoder weights are stored input-major (`input_dim x hidden_dim`) so a
/// sparse feature vector touches contiguous rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub encoder_weights: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub heads: BTreeMap<String, Head>,
}

/// Gradient of a batch loss for the encoder and one head.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub head: String,
    pub encoder_weights: Vec<f64>,
    pub encoder_bias: Vec<f64>,
    pub head_weights: Vec<f64>,
    pub head_bias: Vec<f64>,
}

struct Forward {
    hidden: Vec<f64>,
    output: Output,
}

impl ToyModel {
    /// Encoder initialized from the source seed (Glorot-uniform), no heads.
    pub fn new(source: &SourceSpec, hidden_dim: usize) -> Self {
        let d = source.dim;
        let range = (6.0 / (d + hidden_dim).max(1) as f64).sqrt();
        let mut rng = rng_from(derive_seed(source.seed, &["encoder"]));
        let encoder_weights = (0..d * hidden_dim).map(|_| rng.random_range(-range..=range)).collect();
        ToyModel {
            input_dim: d,
            hidden_dim,
            encoder_weights,
            encoder_bias: vec![0.0; hidden_dim],
            heads: BTreeMap::new(),
        }
    }

    /// Adds a randomly initialized head unless `group` already has one.
    pub fn ensure_head(&mut self, group: &str, kind: TaskKind, seed: u64) -> Result<()> {
        if let Some(existing) = self.heads.get(group) {
            let compatible = match (existing, kind) {
                (Head::Classification { classes, .. }, TaskKind::Classification { classes: c }) => *classes == c,
                (Head::Regression { .. }, TaskKind::Regression) => true,
                _ => false,
            };
            return if compatible {
                Ok(())
            } else {
                Err(Error::Dimension(format!(
                    "head `{group}` already exists with a different shape"
                )))
            };
        }
        let h = self.hidden_dim;
        let mut rng = rng_from(derive_seed(seed, &["head", group]));
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| rng.random_range(-HEAD_INIT_RANGE..=HEAD_INIT_RANGE))
                .collect()
        };
        let head = match kind {
            TaskKind::Classification { classes } => Head::Classification {
                classes,
                weights: draw(classes * h),
                bias: draw(classes),
            },
            TaskKind::Regression => Head::Regression {
                weights: draw(h),
                bias: draw(1)[0],
            },
        };
        self.heads.insert(group.to_string(), head);
        Ok(())
    }

    fn head(&self, group: &str) -> Result<&Head> {
        self.heads
            .get(group)
            .ok_or_else(|| Error::MissingHead(group.to_string()))
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let h = self.hidden_dim;
        let mut z = self.encoder_bias.clone();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                let row = &self.encoder_weights[j * h..(j + 1) * h];
                z.iter_mut().zip(row).for_each(|(zi, w)| *zi += w * xj);
            }
        }
        z.into_iter().map(f64::tanh).collect()
    }

    fn forward(&self, head: &Head, x: &[f64]) -> Result<Forward> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension(format!(
                "feature length {} != model input {}",
                x.len(),
                self.input_dim
            )));
        }
        let hidden = self.encode(x);
        let output = match head {
            Head::Classification { classes, weights, bias } => {
                let logits: Vec<f64> = (0..*classes)
                    .map(|c| {
                        let row = &weights[c * self.hidden_dim..(c + 1) * self.hidden_dim];
                        bias[c] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>()
                    })
                    .collect();
                Output::Probs(softmax(&logits))
            }
            Head::Regression { weights, bias } => {
                Output::Score(bias + weights.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>())
            }
        };
        Ok(Forward { hidden, output })
    }

    pub fn predict(&self, group: &str, x: &[f64]) -> Result<Output> {
        Ok(self.forward(self.head(group)?, x)?.output)
    }

    fn loss_of(output: &Output, target: Target) -> Result<f64> {
        match (output, target) {
            (Output::Probs(p), Target::Class(c)) if c < p.len() => Ok(cross_entropy_loss(p, c)),
            (Output::Score(s), Target::Score(y)) => Ok(mse_loss(*s, y)),
            _ => Err(Error::Dimension("target does not match head type".into())),
        }
    }

    /// Summed loss over `examples`.
    pub fn batch_loss(&self, group: &str, examples: &[Example]) -> Result<f64> {
        let head = self.head(group)?;
        examples.iter().try_fold(0.0, |acc, ex| {
            let f = self.forward(head, &ex.features)?;
            Ok(acc + Self::loss_of(&f.output, ex.target)?)
        })
    }

    /// Summed loss and its analytic gradient.
    pub fn gradients(&self, group: &str, examples: &[Example]) -> Result<(f64, Gradients)> {
        let head = self.head(group)?;
        let (d, h) = (self.input_dim, self.hidden_dim);
        let mut g = Gradients {
            head: group.to_string(),
            encoder_weights: vec![0.0; d * h],
            encoder_bias: vec![0.0; h],
            head_weights: vec![0.0; head.param_count() - head_bias_len(head)],
            head_bias: vec![0.0; head_bias_len(head)],
        };
        let mut total = 0.0;

        for ex in examples {
            let Forward { hidden, output } = self.forward(head, &ex.features)?;
            total += Self::loss_of(&output, ex.target)?;

            // d loss / d hidden
            let mut d_hidden = vec![0.0; h];
            match (head, &output, ex.target) {
                (Head::Classification { classes, weights, .. }, Output::Probs(p), Target::Class(label)) => {
                    for (c, &pc) in p.iter().enumerate().take(*classes) {
                        let d_logit = pc - if c == label { 1.0 } else { 0.0 };
                        g.head_bias[c] += d_logit;
                        let row = c * h;
                        for i in 0..h {
                            g.head_weights[row + i] += d_logit * hidden[i];
                            d_hidden[i] += d_logit * weights[row + i];
                        }
                    }
                }
                (Head::Regression { weights, .. }, Output::Score(s), Target::Score(y)) => {
                    let d_score = 2.0 * (s - y);
                    g.head_bias[0] += d_score;
                    for i in 0..h {
                        g.head_weights[i] += d_score * hidden[i];
                        d_hidden[i] += d_score * weights[i];
                    }
                }
                _ => unreachable!("loss_of already rejected mismatched targets"),
            }

            let d_pre: Vec<f64> = d_hidden.iter().zip(&hidden).map(|(dh, a)| dh * (1.0 - a * a)).collect();
            g.encoder_bias.iter_mut().zip(&d_pre).for_each(|(gb, dz)| *gb += dz);
            for (j, &xj) in ex.features.iter().enumerate() {
                if xj != 0.0 {
                    let row = &mut g.encoder_weights[j * h..(j + 1) * h];
                    row.iter_mut().zip(&d_pre).for_each(|(gw, dz)| *gw += dz * xj);
                }
            }
        }
        Ok((total, g))
    }

    pub fn apply(&mut self, g: &Gradients, lr: f64) -> Result<()> {
        let head = self
            .heads
            .get_mut(&g.head)
            .ok_or_else(|| Error::MissingHead(g.head.clone()))?;
        sgd(&mut self.encoder_weights, &g.encoder_weights, lr);
        sgd(&mut self.encoder_bias, &g.encoder_bias, lr);
        match head {
            Head::Classification { weights, bias, .. } => {
                sgd(weights, &g.head_weights, lr);
                sgd(bias, &g.head_bias, lr);
            }
            Head::Regression { weights, bias } => {
                sgd(weights, &g.head_weights, lr);
                *bias -= lr * g.head_bias[0];
            }
        }
        Ok(())
    }

    /// One gradient-descent step on the summed batch loss. The model is left
    /// untouched if the loss is not finite.
    pub fn grad_step(&mut self, group: &str, examples: &[Example], lr: f64) -> Result<f64> {
        let (loss, g) = self.gradients(group, examples)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                loss,
                dataset: String::new(),
                head: group.to_string(),
            });
        }
        if lr != 0.0 {
            self.apply(&g, lr)?;
        }
        Ok(loss)
    }

    pub fn param_count(&self) -> usize {
        self.encoder_weights.len() + self.encoder_bias.len() + self.heads.values().map(Head::param_count).sum::<usize>()
    }

    /// All parameters: encoder weights, encoder bias, then each head (in
    /// group order) weights followed by bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend(&self.encoder_weights);
        out.extend(&self.encoder_bias);
        for head in self.heads.values() {
            match head {
                Head::Classification { weights, bias, .. } => {
                    out.extend(weights);
                    out.extend(bias);
                }
                Head::Regression { weights, bias } => {
                    out.extend(weights);
                    out.push(*bias);
                }
            }
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "{} parameters given, model has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut rest = params;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        take(&mut self.encoder_weights);
        take(&mut self.encoder_bias);
        for head in self.heads.values_mut() {
            match head {
                Head::Classification { weights, bias, .. } => {
                    take(weights);
                    take(bias);
                }
                Head::Regression { weights, bias } => {
                    take(weights);
                    take(std::slice::from_mut(bias));
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.flat_params().iter().all(|p| p.is_finite())
    }
}

fn head_bias_len(head: &Head) -> usize {
    match head {
        Head::Classification { bias, .. } => bias.len(),
        Head::Regression { .. } => 1,
    }
}

fn sgd(params: &mut [f64], grads: &[f64], lr: f64) {
    params.iter_mut().zip(grads).for_each(|(p, g)| *p -= lr * g);
}

impl Gradients {
    /// Gradient laid out like [`ToyModel::flat_params`]; other heads are zero.
    pub fn flatten(&self, model: &ToyModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(model.param_count());
        out.extend(&self.encoder_weights);
        out.extend(&self.encoder_bias);
        for (group, head) in &model.heads {
            if *group == self.head {
                out.extend(&self.head_weights);
                out.extend(&self.head_bias);
            } else {
                out.extend(std::iter::repeat_n(0.0, head.param_count()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ToyModel {
        let mut m = ToyModel::new(&SourceSpec::new("s", 3, 12), 5);
        m.ensure_head("nli", TaskKind::Classification { classes: 3 }, 1)
            .unwrap();
        m.ensure_head("qa", TaskKind::Regression, 1).unwrap();
        m
    }

    fn example(seed: u64, target: Target) -> Example {
        let mut rng = rng_from(seed);
        Example {
            features: (0..12).map(|_| rng.random_range(-1.0..1.0)).collect(),
            target,
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = model();
        for s in 0..20 {
            let Output::Probs(p) = m.predict("nli", &example(s, Target::Class(0)).features).unwrap() else {
                panic!()
            };
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn heads_are_within_init_range() {
        let m = model();
        match &m.heads["nli"] {
            Head::Classification { weights, bias, .. } => {
                assert!(weights.iter().chain(bias).all(|w| w.abs() <= HEAD_INIT_RANGE));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut m = model();
        let before = m.clone();
        m.grad_step("qa", &[example(1, Target::Score(1.0))], 0.0).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn step_touches_only_encoder_and_batch_head() {
        let mut m = model();
        let before = m.clone();
        m.grad_step("qa", &[example(1, Target::Score(1.0))], 0.1).unwrap();
        assert_eq!(m.heads["nli"], before.heads["nli"]);
        assert_ne!(m.heads["qa"], before.heads["qa"]);
        assert_ne!(m.encoder_weights, before.encoder_weights);
    }

    #[test]
    fn small_step_decreases_sample_loss() {
        for s in 0..10 {
            let mut m = model();
            let batch = [example(s, Target::Class((s % 3) as usize))];
            let before = m.batch_loss("nli", &batch).unwrap();
            m.grad_step("nli", &batch, 1e-3).unwrap();
            assert!(m.batch_loss("nli", &batch).unwrap() < before);
        }
    }

    #[test]
    fn missing_head_and_bad_target() {
        let m = model();
        assert!(matches!(
            m.batch_loss("rqe", &[example(0, Target::Class(0))]),
            Err(Error::MissingHead(_))
        ));
        assert!(m.batch_loss("qa", &[example(0, Target::Class(0))]).is_err());
    }

    #[test]
    fn flat_params_round_trip() {
        let mut m = model();
        let mut p = m.flat_params();
        p[0] += 1.0;
        let last = p.len() - 1;
        p[last] = 7.0;
        m.set_flat_params(&p).unwrap();
        assert_eq!(m.flat_params(), p);
        match &m.heads["qa"] {
            Head::Regression { bias, .. } => assert_eq!(*bias, 7.0),
            _ => panic!(),
        }
    }

    #[test]
    fn incompatible_head_rejected() {
        let mut m = model();
        assert!(m
            .ensure_head("nli", TaskKind::Classification { classes: 2 }, 0)
            .is_err());
        assert!(m.ensure_head("nli", TaskKind::Classification { classes: 3 }, 0).is_ok());
    }
}
