use std::path::PathBuf;

use scorewave::curriculum::{schedule, StageManifest};

use crate::config::PipelineConfig;
use crate::{config_error, CmdResult};

#[derive(clap::Args)]
pub struct Args {
    /// Manifest files in curriculum order.
    #[arg(required = true)]
    manifests: Vec<PathBuf>,
    /// Print the first N scheduled steps.
    #[arg(long, default_value_t = 0)]
    head: usize,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let manifests = args
        .manifests
        .iter()
        .map(StageManifest::load)
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_error)?;
    let sched = schedule(&manifests, cfg.seed).map_err(config_error)?;
    for (m, start) in manifests.iter().zip(sched.stage_starts()) {
        let stage = m.stage.map_or_else(|| "mixed".to_string(), |s| s.to_string());
        println!("stage {stage}: start {start}, steps {}, records {}", m.step_budget, m.records.len());
    }
    println!("total steps {}", sched.total_steps());
    for (step, rec) in sched.take(args.head) {
        println!("{step}\t{}\t{}", rec.window_ref, rec.prompt);
    }
    Ok(())
}
