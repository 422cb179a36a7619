//! Experiment configuration: a TOML file with `[experiment]`, `[cluster]`,
//! `[env]` and `[agent]` sections, overridden by command-line flags.

use std::path::{Path, PathBuf};

use adapt_swarm_core::agents::{AgentConfig, Algorithm};
use adapt_swarm_core::{AdaptationEnv, ClusterConfig, EnvConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const OUT_ENV: &str = "ADAPT_SWARM_OUT";
pub const DEFAULT_OUT: &str = "runs";
pub const DEFAULT_EPISODES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("no algorithm given; pass --algo with one of: {}", tag_list())]
    MissingAlgorithm,
    #[error("{0}")]
    Invalid(String),
}

pub fn tag_list() -> String {
    Algorithm::ALL.map(Algorithm::tag).join(", ")
}

/// The file layout. Every section and key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub cluster: ClusterConfig,
    pub env: EnvConfig,
    pub agent: AgentConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub algorithm: Option<Algorithm>,
    pub episodes: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_owned(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::parse(&text, path)
    }
}

/// Values given on the command line; `None` defers to the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algorithm: Option<Algorithm>,
    pub episodes: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
}

/// A fully resolved, validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub cluster: ClusterConfig,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    /// Not part of the hash: moving a run does not change what it computes.
    #[serde(skip)]
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Flags win over the file; the output directory falls back to
    /// `$ADAPT_SWARM_OUT`, then `runs`.
    pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Self, ConfigError> {
        let exp = file.experiment;
        let out = flags
            .out
            .or(exp.out)
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let cfg = Self {
            algorithm: flags.algorithm.or(exp.algorithm).ok_or(ConfigError::MissingAlgorithm)?,
            episodes: flags.episodes.or(exp.episodes).unwrap_or(DEFAULT_EPISODES),
            seeds: flags.seeds.or(exp.seeds).unwrap_or_else(|| vec![DEFAULT_SEED]),
            cluster: file.cluster,
            env: file.env,
            agent: file.agent,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| ConfigError::Invalid(m);
        if self.episodes == 0 {
            return Err(bad("episodes must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(bad("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("seeds must be distinct".into()));
        }
        self.cluster.validate().map_err(|e| bad(format!("cluster: {e}")))?;
        self.env.validate(&self.cluster).map_err(|e| bad(format!("env: {e}")))?;
        self.agent.validate().map_err(|e| bad(format!("agent: {e}")))?;
        Ok(())
    }

    pub fn build_env(&self) -> Result<AdaptationEnv, ConfigError> {
        AdaptationEnv::new(self.cluster.clone(), self.env.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Canonical JSON of everything that influences the results.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serialisable")
    }

    pub fn hash(&self) -> [u8; 32] {
        let bytes = serde_json::to_vec(&self.snapshot()).expect("config is serialisable");
        Sha256::digest(bytes).into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }
}
