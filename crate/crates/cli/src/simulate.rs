use std::path::Path;

use anyhow::{bail, Context, Result};
use driftlab_core::PromptSet;
use driftlab_llm::mock::CannedBackend;
use driftlab_llm::simulator::{config_fingerprint, CampaignOptions, RunManifest};
use driftlab_llm::{run_campaign, ChatBackend, HttpBackend, SimulationConfig};

use crate::config::{BackendConfig, RunConfig};
use crate::Outcome;

pub fn run(config: &Path, force: bool) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let prompts = match &cfg.prompts_dir {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::default(),
    };
    let sims = cfg.simulation_configs();
    let extra = cfg.backend_fingerprint();
    let fingerprint = config_fingerprint(&sims, &prompts, Some(&extra))?;
    let manifest_path = cfg.out_dir.join("manifest.json");
    if manifest_path.exists() && !force {
        let old: RunManifest = serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)
            .with_context(|| format!("cannot read {}", manifest_path.display()))?;
        if old.config_fingerprint != fingerprint {
            bail!(
                "{} holds a run with a different configuration; pass --force to overwrite it",
                cfg.out_dir.display()
            );
        }
        tracing::info!("resuming run in {}", cfg.out_dir.display());
    }

    let mut backends: Vec<Box<dyn ChatBackend>> = Vec::new();
    for m in &cfg.models {
        backends.push(match &m.backend {
            BackendConfig::Http(e) => {
                let mut e = e.clone();
                if e.request_log.is_none() {
                    let dir = cfg.out_dir.join("logs");
                    std::fs::create_dir_all(&dir)?;
                    e.request_log = Some(dir.join(format!("{}.requests.jsonl", m.model_id)));
                }
                Box::new(HttpBackend::new(e)?)
            }
            BackendConfig::Mock { seed } => Box::new(CannedBackend::new(*seed)),
        });
    }
    let mut jobs: Vec<(SimulationConfig, &dyn ChatBackend)> = Vec::new();
    for (m, b) in cfg.models.iter().zip(&backends) {
        for s in m.simulation_configs() {
            jobs.push((s, b.as_ref()));
        }
    }
    let opts = CampaignOptions {
        parallelism: cfg.parallelism,
        out_dir: Some(cfg.out_dir.clone()),
        force,
        fingerprint_extra: Some(extra),
    };
    let result = run_campaign(&jobs, &prompts, &opts)?;
    let failed = result.manifest.failures.len();
    println!(
        "{} transcripts written to {}, {failed} failed",
        result.transcripts.len(),
        cfg.out_dir.join("transcripts").display()
    );
    Ok(if failed > 0 { Outcome::Partial } else { Outcome::Ok })
}
