//! Command-line interface.

use std::path::PathBuf;
use std::sync::atomic::AtomicBool;

use adapt_swarm_core::Algorithm;
use clap::{Parser, Subcommand};

use crate::config::{tag_list, ConfigError, ConfigFile, ExperimentConfig, Overrides, OUT_ENV, DEFAULT_OUT};
use crate::report::report_dir;
use crate::runner::{run_dir, run_experiment};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "adapt-swarm", version, about = "Consensus-gated RL planners on a simulated microservice cluster")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one planner for a number of episodes per seed.
    Run(RunArgs),
    /// Aggregate the runs under a directory into plots and a ranking.
    Report(ReportArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Planner to train.
    #[arg(long, value_parser = parse_algo)]
    pub algo: Option<Algorithm>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// One or more seeds, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub seed: Option<Vec<u64>>,
    /// TOML file with [experiment], [cluster], [env] and [agent] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; defaults to the config file's value, then $ADAPT_SWARM_OUT, then ./runs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    /// Output root of earlier runs; defaults to $ADAPT_SWARM_OUT, then ./runs.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|_| format!("unknown algorithm `{s}`; expected one of: {}", tag_list()))
}

impl RunArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides { algorithm: self.algo, episodes: self.episodes, seeds: self.seed.clone(), out: self.out.clone() };
        ExperimentConfig::resolve(file, flags)
    }
}

fn default_root() -> PathBuf {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli, stop: &AtomicBool) -> u8 {
    match cli.command {
        Command::Run(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let every = (cfg.episodes / 10).clamp(1, 25);
            let total = cfg.episodes;
            let mut progress = |seed: u64, m: &adapt_swarm_core::EpisodeMetrics| {
                if m.episode % every == 0 || m.episode == total {
                    eprintln!("[{} seed {seed}] episode {}/{total}: reward {:.1}, steps {}", cfg.algorithm, m.episode, m.total_reward, m.steps);
                }
            };
            match run_experiment(&cfg, stop, &mut progress) {
                Ok(_) => {
                    println!("{}", run_dir(&cfg.out, &cfg).display());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_RUNTIME
                }
            }
        }
        Command::Report(args) => {
            let dir = args.input.unwrap_or_else(default_root);
            match report_dir(&dir) {
                Ok(m) => {
                    for w in &m.warnings {
                        eprintln!("warning: {w}");
                    }
                    print!("{}", std::fs::read_to_string(dir.join(crate::report::REPORT_FILE)).unwrap_or_default());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_RUNTIME
                }
            }
        }
    }
}
