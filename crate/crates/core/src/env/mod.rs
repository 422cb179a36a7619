//! The adaptation MDP.
//!
//! One step routes the chosen action through a Raft ballot, applies it to
//! the cluster when committed, advances the cluster one tick and scores the
//! result.

mod reward;

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

pub use reward::RewardConfig;

use crate::action::{ActionBindings, AdaptationAction, DurationTable, ACTION_COUNT};
use crate::cluster::{ClusterConfig, ClusterError, ClusterState, RejectReason};
use crate::raft::{FaultProfile, RaftConfig, RaftGate, Ratification};
use crate::rng::mix;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("action index {0} outside the action space")]
    InvalidAction(usize),
    #[error("step called after the episode ended")]
    EpisodeDone,
    #[error("step called before reset")]
    NotReset,
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

/// Normalised metrics vector fed to the planners.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Deref for Observation {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Observation> for Vec<f64> {
    fn from(o: Observation) -> Self {
        o.0
    }
}

/// Why an action did not run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectCause {
    /// The ballot failed; carries the cluster's own verdict when it also
    /// considers the action infeasible.
    VoteDenied(Option<RejectReason>),
    NoLeader,
    /// Committed but infeasible on the live cluster.
    Cluster(RejectReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    Rejected(RejectCause),
}

impl StepOutcome {
    pub fn is_rejected(&self) -> bool {
        matches!(self, StepOutcome::Rejected(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub outcome: StepOutcome,
    pub violation: f64,
    /// Simulated seconds charged for the action; zero when it did not run.
    pub duration_s: f64,
    pub converged: bool,
    pub sparse_reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Episodic environment over a discrete action space.
pub trait Environment {
    fn observation_len(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError>;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub max_steps: usize,
    pub reward: RewardConfig,
    pub durations: DurationTable,
    pub bindings: ActionBindings,
    pub raft: RaftConfig,
    /// Bus faults for the managers. Crash ticks count cluster ticks.
    pub faults: FaultProfile,
    /// Raft ticks a single ballot (including any election) may take.
    pub raft_budget: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            max_steps: 200,
            reward: RewardConfig::default(),
            durations: DurationTable::default(),
            bindings: ActionBindings::default(),
            raft: RaftConfig::default(),
            faults: FaultProfile::default(),
            raft_budget: 20,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self, cluster: &ClusterConfig) -> Result<(), EnvError> {
        let bad = |m: &str| EnvError::InvalidConfig(m.into());
        if self.max_steps == 0 {
            return Err(bad("max_steps must be at least 1"));
        }
        if self.raft_budget == 0 {
            return Err(bad("raft_budget must be at least 1"));
        }
        self.reward.validate().map_err(bad)?;
        self.raft.validate().map_err(bad)?;
        self.faults.validate().map_err(bad)?;
        let d = &self.durations;
        if ![d.no_op, d.horizontal, d.vertical, d.compose, d.recover].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(bad("durations must be finite and non-negative"));
        }
        if self.bindings.max_service() >= cluster.services.len() {
            return Err(bad("action bindings name a service that does not exist"));
        }
        if self.faults.crashes.iter().any(|c| c.node >= cluster.node_count()) {
            return Err(bad("crash schedule names an unknown node"));
        }
        Ok(())
    }
}

struct Episode {
    cluster: ClusterState,
    gate: RaftGate<AdaptationAction>,
    steps: usize,
    done: bool,
}

/// The cluster adaptation environment.
pub struct AdaptationEnv {
    cluster_cfg: ClusterConfig,
    cfg: EnvConfig,
    episode: Option<Episode>,
}

impl AdaptationEnv {
    pub fn new(cluster_cfg: ClusterConfig, cfg: EnvConfig) -> Result<Self, EnvError> {
        cluster_cfg.validate()?;
        cfg.validate(&cluster_cfg)?;
        Ok(Self { cluster_cfg, cfg, episode: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn cluster_config(&self) -> &ClusterConfig {
        &self.cluster_cfg
    }

    pub fn cluster(&self) -> Option<&ClusterState> {
        self.episode.as_ref().map(|e| &e.cluster)
    }

    /// Mutable access for fault injection in tests and experiments.
    pub fn cluster_mut(&mut self) -> Option<&mut ClusterState> {
        self.episode.as_mut().map(|e| &mut e.cluster)
    }

    pub fn gate(&self) -> Option<&RaftGate<AdaptationAction>> {
        self.episode.as_ref().map(|e| &e.gate)
    }

    pub fn steps(&self) -> usize {
        self.episode.as_ref().map_or(0, |e| e.steps)
    }

    pub fn observation_len_for(cfg: &ClusterConfig) -> usize {
        cfg.max_nodes() * 4 + cfg.services.len() * 2
    }

    /// Per node slot `[cpu, mem, disk, net]` (zeros for dead or absent nodes),
    /// then per service `[replicas / max_replicas, cpu_util]`.
    pub fn build_observation(cluster: &ClusterState) -> Observation {
        let cfg = cluster.config();
        let mut v = Vec::with_capacity(Self::observation_len_for(cfg));
        let metrics = cluster.metrics();
        for slot in 0..cfg.max_nodes() {
            match (cluster.nodes().get(slot), metrics.nodes.get(slot)) {
                (Some(n), Some(m)) if n.alive => v.extend([m.cpu_util, m.mem_util, m.disk_util, m.net_util]),
                _ => v.extend([0.0; 4]),
            }
        }
        for (s, sc) in cluster.services().iter().zip(&cfg.services) {
            v.push(s.replicas() as f64 / sc.max_replicas as f64);
            v.push(metrics.service_util[s.id]);
        }
        Observation(v)
    }

    pub fn action_duration(&self, action: AdaptationAction) -> f64 {
        self.cfg.durations.duration(action)
    }

    pub fn episode_done(&self, converged: bool, steps: usize) -> bool {
        converged || steps >= self.cfg.max_steps
    }
}

impl Environment for AdaptationEnv {
    fn observation_len(&self) -> usize {
        Self::observation_len_for(&self.cluster_cfg)
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let cluster = ClusterState::new(self.cluster_cfg.clone(), seed)?;
        let faults = FaultProfile { crashes: Vec::new(), ..self.cfg.faults.clone() };
        let gate = RaftGate::new(self.cluster_cfg.managers, self.cfg.raft, faults, mix(seed, 0x5241_4654));
        let obs = Self::build_observation(&cluster);
        self.episode = Some(Episode { cluster, gate, steps: 0, done: false });
        Ok(obs)
    }

    fn step(&mut self, index: usize) -> Result<StepResult, EnvError> {
        let action = AdaptationAction::from_index(index).ok_or(EnvError::InvalidAction(index))?;
        let cfg = &self.cfg;
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.done {
            return Err(EnvError::EpisodeDone);
        }
        for id in ep.cluster.manager_ids() {
            let _ = ep.gate.set_alive(id, ep.cluster.nodes()[id].alive);
        }
        let bindings = cfg.bindings;
        let outcome = {
            let cluster = &ep.cluster;
            let mut feasible = |_voter: usize, a: &AdaptationAction| cluster.is_feasible(*a, &bindings).is_ok();
            match ep.gate.ratify(action, &mut feasible, cfg.raft_budget) {
                Ratification::Committed(_) => None,
                Ratification::Rejected(_) => {
                    Some(RejectCause::VoteDenied(cluster.is_feasible(action, &bindings).err()))
                }
                Ratification::NoLeader => Some(RejectCause::NoLeader),
            }
        };
        let outcome = match outcome {
            Some(cause) => StepOutcome::Rejected(cause),
            None => match ep.cluster.apply_action(action, &bindings) {
                crate::cluster::ActionOutcome::Applied => StepOutcome::Applied,
                crate::cluster::ActionOutcome::Rejected(r) => StepOutcome::Rejected(RejectCause::Cluster(r)),
            },
        };
        ep.cluster.set_leader(ep.gate.leader());
        ep.cluster.tick();
        let clock = ep.cluster.clock();
        for c in cfg.faults.crashes.iter().filter(|c| c.tick == clock) {
            ep.cluster.inject_failure(c.node)?;
        }
        let rejected = outcome.is_rejected();
        let converged = ep.cluster.is_converged(&self.cluster_cfg.slo, rejected);
        let violation = ep.cluster.violation(&self.cluster_cfg.slo);
        let reward = cfg.reward.shaped(rejected, violation, converged);
        ep.steps += 1;
        let done = converged || ep.steps >= cfg.max_steps;
        ep.done = done;
        let duration_s = if rejected { 0.0 } else { cfg.durations.duration(action) };
        Ok(StepResult {
            observation: Self::build_observation(&ep.cluster),
            reward,
            done,
            info: StepInfo { outcome, violation, duration_s, converged, sparse_reward: cfg.reward.sparse(converged) },
        })
    }
}
