use std::path::PathBuf;

use scorewave::curriculum::{build_manifest, mix_manifests, ManifestOptions, Registry};

use super::create_dir;
use crate::config::PipelineConfig;
use crate::output::write_run_record;
use crate::{config_error, CmdResult};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset registry (TOML).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Stage to build, or `all`.
    #[arg(long, default_value = "all")]
    stage: String,
    /// Also write a pooled manifest for training without a curriculum.
    #[arg(long)]
    mixed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let registry_path = args
        .registry
        .or_else(|| cfg.file.registry.clone())
        .ok_or_else(|| config_error(anyhow::anyhow!("no registry given (--registry or `registry` in config)")))?;
    let out = args
        .out
        .or_else(|| cfg.file.output_dir.clone())
        .ok_or_else(|| config_error(anyhow::anyhow!("no output directory given (--out or `output_dir` in config)")))?;
    let stages: Vec<u8> = match args.stage.as_str() {
        "all" => cfg.file.stages.clone().unwrap_or_else(|| (0..=4).collect()),
        s => vec![s
            .parse()
            .ok()
            .filter(|n| *n <= 4)
            .ok_or_else(|| config_error(anyhow::anyhow!("stage must be 0..=4 or `all`, got {s}")))?],
    };
    let registry = Registry::load(&registry_path).map_err(config_error)?;
    registry.validate().map_err(config_error)?;

    create_dir(&out)?;
    let mut opts = ManifestOptions::new(out.join("tokens"));
    if let Some(w) = cfg.file.window {
        opts.window_seconds = w;
    }
    if let Some(d) = cfg.file.dropout {
        opts.dropout = d;
    }
    if let Some(t) = &cfg.file.templates {
        opts.templates = t.clone();
    }
    if let Some(m) = &cfg.file.mistakes {
        m.validate().map_err(config_error)?;
        opts.mistakes = m.clone();
    }

    let mut built = Vec::new();
    for stage in stages {
        let manifest = build_manifest(&registry, stage, cfg.seed, &opts).map_err(anyhow::Error::from)?;
        let path = out.join(format!("stage{stage}.jsonl"));
        manifest.save(&path).map_err(anyhow::Error::from)?;
        println!("stage {stage}: {} records, budget {} -> {}", manifest.records.len(), manifest.step_budget, path.display());
        built.push(manifest);
    }
    if args.mixed {
        let mixed = mix_manifests(&built, cfg.seed);
        let path = out.join("mixed.jsonl");
        mixed.save(&path).map_err(anyhow::Error::from)?;
        println!("mixed: {} records, budget {} -> {}", mixed.records.len(), mixed.step_budget, path.display());
    }
    write_run_record(&out, "manifest", cfg)?;
    Ok(())
}
