//! Optional TOML configuration. Command-line flags take precedence over the
//! file, and the file over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use scorewave::augment::MistakeConfig;
use scorewave::prompt::PromptTemplates;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub strict: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub stages: Option<Vec<u8>>,
    pub window: Option<f64>,
    pub hop: Option<f64>,
    pub dropout: Option<f64>,
    pub lambda: Option<f64>,
    pub mistakes: Option<MistakeConfig>,
    pub templates: Option<PromptTemplates>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Settings shared by every subcommand after merging flags, file and defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub jobs: usize,
    pub strict: bool,
    pub file: FileConfig,
}

impl PipelineConfig {
    pub fn resolve(file: FileConfig, seed: Option<u64>, jobs: Option<usize>, strict: bool) -> anyhow::Result<Self> {
        let jobs = jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
        anyhow::ensure!(jobs > 0, "jobs must be at least 1");
        Ok(Self {
            seed: seed.or(file.seed).unwrap_or(0),
            jobs,
            strict: strict || file.strict.unwrap_or(false),
            file,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = toml::from_str("seed = 5\njobs = 3\nstrict = true\n[mistakes]\np_ghost = 0.5\n").unwrap();
        let cfg = PipelineConfig::resolve(file.clone(), Some(9), None, false).unwrap();
        assert_eq!((cfg.seed, cfg.jobs, cfg.strict), (9, 3, true));
        assert_eq!(cfg.file.mistakes.unwrap().p_ghost, 0.5);
        let cfg = PipelineConfig::resolve(file, None, Some(1), false).unwrap();
        assert_eq!((cfg.seed, cfg.jobs), (5, 1));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("sed = 1").is_err());
    }
}
