//! Executes an experiment: one fresh environment and planner per seed, one
//! CSV row per episode, and a manifest that brackets the whole run.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use adapt_swarm_core::agents::{make_planner, run_episode, Checkpoint};
use adapt_swarm_core::rng::episode_seed;
use adapt_swarm_core::{EpisodeMetrics, Environment};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::metrics::MetricsWriter;

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    /// Relative to the run directory.
    pub csv: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub episodes_completed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub algorithm: String,
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON form of `config`.
    pub config_hash: String,
    pub seeds: Vec<SeedRecord>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub status: RunStatus,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    fn store(&self, dir: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest is serialisable");
        text.push('\n');
        // Write then rename so a crash never leaves a truncated manifest.
        let tmp = dir.join(".manifest.json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(tmp, dir.join(MANIFEST))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("run interrupted")]
    Interrupted,
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] crate::metrics::CsvError),
    #[error(transparent)]
    Agent(#[from] adapt_swarm_core::agents::AgentError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Directory holding one algorithm's run inside an output root.
pub fn run_dir(out: &Path, cfg: &ExperimentConfig) -> PathBuf {
    out.join(cfg.algorithm.tag())
}

pub fn csv_name(seed: u64) -> PathBuf {
    PathBuf::from(format!("seed-{seed}.csv"))
}

/// Called after every episode with the seed and the row just written.
pub type Progress<'a> = &'a mut dyn FnMut(u64, &EpisodeMetrics);

/// Runs every seed of `cfg` into `<cfg.out>/<algo>/`. The manifest is
/// written before the first episode and finalised on every exit path it can
/// reach; `stop` is polled between episodes.
pub fn run_experiment(cfg: &ExperimentConfig, stop: &AtomicBool, progress: Progress<'_>) -> Result<RunManifest, RunError> {
    let dir = run_dir(&cfg.out, cfg);
    fs::create_dir_all(&dir).map_err(io(format!("creating {}", dir.display())))?;
    let mut manifest = RunManifest {
        version: VERSION.into(),
        algorithm: cfg.algorithm.tag().into(),
        config: cfg.snapshot(),
        config_hash: cfg.hash_hex(),
        seeds: cfg
            .seeds
            .iter()
            .map(|&seed| SeedRecord { seed, csv: csv_name(seed), checkpoint: None, episodes_completed: 0 })
            .collect(),
        started_unix_ms: now_ms(),
        finished_unix_ms: None,
        status: RunStatus::Running,
        error: None,
    };
    manifest.store(&dir).map_err(io("writing manifest"))?;

    let result = cfg.seeds.iter().enumerate().try_for_each(|(k, &seed)| {
        run_seed(cfg, &dir, seed, &mut manifest.seeds[k], stop, progress)
    });
    manifest.finished_unix_ms = Some(now_ms());
    match result {
        Ok(()) => {
            manifest.status = RunStatus::Completed;
            manifest.store(&dir).map_err(io("finalising manifest"))?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            // The original error matters more than a failure to record it.
            let _ = manifest.store(&dir);
            Err(e)
        }
    }
}

fn run_seed(
    cfg: &ExperimentConfig,
    dir: &Path,
    seed: u64,
    record: &mut SeedRecord,
    stop: &AtomicBool,
    progress: Progress<'_>,
) -> Result<(), RunError> {
    let mut env = cfg.build_env()?;
    let mut planner = make_planner(cfg.algorithm, env.observation_len(), env.action_count(), cfg.agent.clone(), seed)?;
    let path = dir.join(&record.csv);
    let file = File::create(&path).map_err(io(format!("creating {}", path.display())))?;
    let mut writer = MetricsWriter::new(BufWriter::new(file))?;
    for e in 0..cfg.episodes {
        if stop.load(Ordering::SeqCst) {
            return Err(RunError::Interrupted);
        }
        let (metrics, _) = run_episode(planner.as_mut(), &mut env, e + 1, episode_seed(seed, e))?;
        writer.write(&metrics)?;
        record.episodes_completed = e + 1;
        progress(seed, &metrics);
    }
    let ckpt = PathBuf::from(format!("seed-{seed}.ckpt"));
    let bytes = Checkpoint::from_planner(planner.as_ref(), cfg.hash()).encode();
    fs::write(dir.join(&ckpt), bytes).map_err(io("writing checkpoint"))?;
    record.checkpoint = Some(ckpt);
    Ok(())
}
