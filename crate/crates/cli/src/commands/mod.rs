pub mod augment;
pub mod evaluate;
pub mod manifest;
pub mod prompt;
pub mod schedule;
pub mod synth;
pub mod tokenize;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::{config_error, Failure};

/// Output stems for each input, suffixed with an index when two inputs
/// share a file stem.
pub fn unique_stems(inputs: &[PathBuf]) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for p in inputs {
        *counts.entry(crate::output::file_stem(p)).or_default() += 1;
    }
    inputs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stem = crate::output::file_stem(p);
            if counts[&stem] > 1 {
                format!("{stem}-{i}")
            } else {
                stem
            }
        })
        .collect()
}

pub fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(config_error)
}

/// Reports per-item failures; in strict mode any failure fails the run.
pub fn finish(failures: usize, total: usize, strict: bool) -> Result<(), Failure> {
    if failures == 0 {
        return Ok(());
    }
    log::warn!("{failures} of {total} inputs failed");
    if strict {
        Err(Failure::Run(anyhow::anyhow!("{failures} of {total} inputs failed (strict mode)")))
    } else {
        Ok(())
    }
}
