//! One-of-each-label decoding for premise groups of three hypotheses.
//!
//!     cargo run -p mixtrain --example constrained_decode

use mixtrain::inference::{argmax, mednli_constrained_decode};

fn main() {
    let names = ["entailment", "neutral", "contradiction"];
    let probs = [[0.5, 0.45, 0.05], [0.6, 0.3, 0.1], [0.2, 0.2, 0.6]];
    let free: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let joint = mednli_constrained_decode(&probs);
    let product = |labels: &[usize]| labels.iter().enumerate().map(|(r, &l)| probs[r][l]).product::<f64>();
    println!(
        "unconstrained: {:?}",
        free.iter().map(|&l| names[l]).collect::<Vec<_>>()
    );
    println!(
        "constrained:   {:?} (joint probability {:.3})",
        joint.iter().map(|&l| names[l]).collect::<Vec<_>>(),
        product(&joint)
    );
    println!("greedy row-by-row assignment would score {:.3}", product(&[0, 1, 2]));
}
