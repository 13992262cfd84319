//! Majority voting with probability-sum tie-breaks, and the regression
//! variant with its zero boundary.
//!
//!     cargo run -p mixtrain --example ensemble_vote

use anyhow::Result;
use mixtrain::inference::{ensemble_classify, ensemble_regress};

fn main() -> Result<()> {
    let members = [
        vec![0.6, 0.3, 0.1],
        vec![0.2, 0.7, 0.1],
        vec![0.5, 0.45, 0.05],
        vec![0.1, 0.85, 0.05],
    ];
    // Votes 0, 1, 0, 1: the tie goes to the larger probability sum (1.4 vs 2.3).
    println!(
        "classification, tied vote between 0 and 1 -> {}",
        ensemble_classify(&members)?
    );
    println!(
        "first three members, majority for 0 -> {}",
        ensemble_classify(&members[..3])?
    );

    for scores in [
        vec![0.4, -0.2, 0.1],
        vec![0.0, -0.3],
        vec![0.3, -0.3],
        vec![0.5, -0.1],
        vec![0.0, 0.0],
    ] {
        let v = ensemble_regress(&scores)?;
        println!("regression {scores:?} -> positive {} (mean {:+.3})", v.positive, v.mean);
    }
    Ok(())
}
