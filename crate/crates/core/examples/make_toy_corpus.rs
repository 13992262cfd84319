//! Regenerates the bundled toy corpus under `data/toy` (or the given dir).
//!
//!     cargo run -p mixtrain --example make_toy_corpus -- crates/core/data/toy

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use mixtrain::corpus::{write_dataset, Dataset};
use mixtrain::synth::{faq_pages, nli_triples, question_pairs, ranked_answers};

const SEED: u64 = 20190801;

/// Splits `ds` into consecutive chunks of `sizes` samples.
fn chunks(ds: &Dataset, sizes: &[usize]) -> Vec<Dataset> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&n| {
            let part = ds.derive(ds.samples[start..start + n].to_vec());
            start += n;
            part
        })
        .collect()
}

fn save(dir: &Path, name: &str, manifest: &str, parts: &[(&str, &Dataset)]) -> Result<()> {
    let mut text = manifest.trim_start().to_string();
    for (split, ds) in parts {
        let file = format!("{name}.{split}.jsonl");
        write_dataset(dir.join(&file), ds)?;
        let key = if *split == "train" {
            "path".to_string()
        } else {
            format!("{split}_path")
        };
        text.push_str(&format!("{key} = {file}\n"));
    }
    fs::write(dir.join(format!("{name}.manifest")), text)?;
    Ok(())
}

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy"));
    fs::create_dir_all(&dir)?;

    let mednli = nli_triples("mednli", 100, false, 0.05, SEED);
    let [train, dev, test] = <[Dataset; 3]>::try_from(chunks(&mednli, &[180, 60, 60])).unwrap();
    save(
        &dir,
        "mednli",
        "name = mednli\ntask_kind = classification:3\nrole = in_domain\nhead_group = nli\nrecipe = mednli\n",
        &[("train", &train), ("dev", &dev), ("test", &test)],
    )?;

    let mnli = nli_triples("mnli", 120, true, 0.0, SEED);
    save(
        &dir,
        "mnli",
        "name = mnli\ntask_kind = classification:3\nrole = external\nhead_group = nli\n",
        &[("train", &mnli)],
    )?;

    let rqe = question_pairs("rqe", 300, 0.05, SEED);
    let [train, dev] = <[Dataset; 2]>::try_from(chunks(&rqe, &[220, 80])).unwrap();
    save(
        &dir,
        "rqe",
        "name = rqe\ntask_kind = classification:2\nrole = in_domain\nhead_group = rqe\nrecipe = rqe\n",
        &[("train", &train), ("dev", &dev)],
    )?;

    // 80 train questions (40 tagged alexa), 30 dev, 20 test; 4 answers each.
    let qa = ranked_answers("qa", 130, 4, 2, SEED);
    let [train, dev, test] = <[Dataset; 3]>::try_from(chunks(&qa, &[320, 120, 80])).unwrap();
    let mut dev = dev;
    let mut test = test;
    for s in dev.samples.iter_mut().chain(test.samples.iter_mut()) {
        s.source_tag = None;
    }
    save(
        &dir,
        "qa",
        "name = qa\ntask_kind = regression\nrole = in_domain\nhead_group = qa\nrecipe = qa\n",
        &[("train", &train), ("dev", &dev), ("test", &test)],
    )?;

    let medquad = faq_pages("medquad", 40, 4, SEED);
    save(
        &dir,
        "medquad",
        "name = medquad\ntask_kind = regression\nrole = in_domain\nhead_group = qa\nrecipe = medquad\n",
        &[("train", &medquad)],
    )?;

    println!("wrote toy corpus to {}", dir.display());
    Ok(())
}
