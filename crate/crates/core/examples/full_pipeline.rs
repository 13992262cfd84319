//! Every stage on the bundled toy corpus.
//!
//!     cargo run --release -p mixtrain --example full_pipeline -- /tmp/mixtrain-run

use std::path::{Path, PathBuf};

use anyhow::Result;
use mixtrain::pipeline::{run_pipeline, PipelineConfig};

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mixtrain-run"));
    let cfg = PipelineConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/toy.toml"))?;
    for report in run_pipeline(&cfg, &out)? {
        println!("{}", report.to_table());
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
