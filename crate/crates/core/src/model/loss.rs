/// Lower clamp on probabilities inside logarithms.
pub const LOG_EPSILON: f64 = 1e-12;

/// Negative log-probability of the gold class.
pub fn cross_entropy_loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(LOG_EPSILON).ln()
}

pub fn mse_loss(score: f64, target: f64) -> f64 {
    let d = target - score;
    d * d
}

/// Numerically stable normalized exponentials.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
