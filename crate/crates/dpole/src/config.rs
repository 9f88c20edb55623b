//! Experiment configuration.
//!
//! Configs are JSON documents whose keys mirror [`ExperimentConfig`]. Missing
//! keys take their defaults and unknown keys are rejected, so `{}` is a
//! complete default configuration:
//!
//! ```json
//! {
//!   "physics": { "track_half_length": 2.4 },
//!   "agent": { "gamma": 0.95, "actor_hidden": [16] },
//!   "rehearsal": { "strategy": "batch", "pseudo_count": 8, "reinit_every": 10 },
//!   "observation": "full",
//!   "episodes": 1000,
//!   "max_steps_per_episode": 100000,
//!   "seed": 1
//! }
//! ```

use std::path::{Path, PathBuf};

use dpole_core::agent::AgentConfig;
use dpole_core::dynamics::PhysicsConfig;
use dpole_core::observe::Mode;
use dpole_core::rehearsal::RehearsalConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const DEFAULT_EPISODES: u64 = 1000;
pub const DEFAULT_MAX_STEPS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub physics: PhysicsConfig,
    pub agent: AgentConfig,
    pub rehearsal: RehearsalConfig,
    pub observation: Mode,
    pub episodes: u64,
    pub max_steps_per_episode: u64,
    pub seed: u64,
    /// Run directory. `None` keeps the run in memory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            physics: PhysicsConfig::default(),
            agent: AgentConfig::default(),
            rehearsal: RehearsalConfig::default(),
            observation: Mode::Full,
            episodes: DEFAULT_EPISODES,
            max_steps_per_episode: DEFAULT_MAX_STEPS,
            seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(HarnessError::config("episodes", "must be >= 1"));
        }
        if self.max_steps_per_episode == 0 {
            return Err(HarnessError::config(
                "max_steps_per_episode",
                "must be >= 1",
            ));
        }
        self.physics
            .validate()
            .map_err(|e| HarnessError::from_core("physics", e))?;
        self.agent
            .validate()
            .map_err(|e| HarnessError::from_core("agent", e))?;
        self.rehearsal
            .validate()
            .map_err(|e| HarnessError::from_core("rehearsal", e))?;
        Ok(())
    }

    /// SHA-256 over the canonical JSON of everything except the seed and the
    /// output location. Runs that differ only in seed share a hash.
    pub fn config_hash(&self) -> String {
        let mut anon = self.clone();
        anon.seed = 0;
        anon.output = None;
        let json = serde_json::to_vec(&anon).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Parse a JSON config from text. Errors name the offending key path.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let key = if path == "." || path.is_empty() {
            unknown_field(&inner.to_string()).unwrap_or_else(|| "<document>".into())
        } else {
            path
        };
        HarnessError::config(key, inner.to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Extract the name from serde's "unknown field `name`" message.
fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config_str(&text)
}
