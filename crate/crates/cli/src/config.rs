//! Run configuration for `simulate`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use driftlab_core::{Language, Level};
use driftlab_llm::{EndpointConfig, SamplingParams, SimulationConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory, relative to the config file unless absolute.
    pub out_dir: PathBuf,
    /// Concurrent dialogues; 0 picks one per CPU.
    #[serde(default)]
    pub parallelism: usize,
    /// Directory with `tutor.txt`, `student.txt` and `levels.toml`; the
    /// built-in prompts are used when absent.
    #[serde(default)]
    pub prompts_dir: Option<PathBuf>,
    #[serde(rename = "model")]
    pub models: Vec<ModelConfig>,
}

/// One tutor model, run at every listed level. Unset fields take the
/// simulator defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model_id: String,
    #[serde(default = "all_levels")]
    pub levels: Vec<Level>,
    pub n_chats: Option<u32>,
    pub rounds: Option<u32>,
    pub opener: Option<String>,
    pub max_regens: Option<u32>,
    pub banned_languages: Option<BTreeSet<Language>>,
    #[serde(default)]
    pub params: SamplingParams,
    pub backend: BackendConfig,
}

fn all_levels() -> Vec<Level> {
    Level::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// An OpenAI-compatible server. The same endpoint plays both roles.
    Http(EndpointConfig),
    /// Offline canned replies, for dry runs.
    Mock {
        #[serde(default)]
        seed: u64,
    },
}

impl ModelConfig {
    pub fn simulation_configs(&self) -> Vec<SimulationConfig> {
        self.levels
            .iter()
            .map(|&level| {
                let mut c = SimulationConfig::new(self.model_id.clone(), level);
                if let Some(n) = self.n_chats {
                    c.n_chats = n;
                }
                if let Some(r) = self.rounds {
                    c.rounds = r;
                }
                if let Some(o) = &self.opener {
                    c.opener = o.clone();
                }
                if let Some(m) = self.max_regens {
                    c.max_regens = m;
                }
                if let Some(b) = &self.banned_languages {
                    c.banned_languages = b.clone();
                }
                c.params = self.params;
                c
            })
            .collect()
    }
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).context("invalid run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = Self::parse(&src).with_context(|| path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.out_dir = base.join(&cfg.out_dir);
        if let Some(p) = &cfg.prompts_dir {
            cfg.prompts_dir = Some(base.join(p));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            bail!("model: at least one [[model]] table is required");
        }
        let mut ids = BTreeSet::new();
        for (i, m) in self.models.iter().enumerate() {
            if !ids.insert(&m.model_id) {
                bail!("model[{i}].model_id: {:?} appears more than once", m.model_id);
            }
            if m.levels.is_empty() {
                bail!("model[{i}].levels: must list at least one level");
            }
            let distinct: BTreeSet<_> = m.levels.iter().collect();
            if distinct.len() != m.levels.len() {
                bail!("model[{i}].levels: duplicate level");
            }
            for c in m.simulation_configs() {
                c.validate().with_context(|| format!("model[{i}] ({})", m.model_id))?;
            }
            if let BackendConfig::Http(e) = &m.backend {
                e.validate().with_context(|| format!("model[{i}].backend"))?;
            }
        }
        Ok(())
    }

    pub fn simulation_configs(&self) -> Vec<SimulationConfig> {
        self.models.iter().flat_map(ModelConfig::simulation_configs).collect()
    }

    /// Backend settings by model, for the run fingerprint.
    pub fn backend_fingerprint(&self) -> serde_json::Value {
        self.models.iter().map(|m| (m.model_id.clone(), serde_json::json!(m.backend))).collect::<serde_json::Map<_, _>>().into()
    }
}
