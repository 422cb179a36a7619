use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::nn::OptimizerKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dqn,
    /// Dueling architecture; no double-Q target correction.
    Ddqn,
    Drqn,
    Pgnn,
    Ddpg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Dqn, Algorithm::Ddqn, Algorithm::Drqn, Algorithm::Pgnn, Algorithm::Ddpg];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Ddqn => "ddqn",
            Algorithm::Drqn => "drqn",
            Algorithm::Pgnn => "pgnn",
            Algorithm::Ddpg => "ddpg",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm `{0}`; expected one of dqn, ddqn, drqn, pgnn, ddpg")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_tag(s).ok_or_else(|| UnknownAlgorithm(s.into()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuelingMode {
    /// `Q = V + A − mean(A)`.
    #[default]
    MeanCentered,
    /// `Q = V + A`.
    Additive,
}

/// Hyperparameters shared by all planners; each uses the subset it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay_steps: u64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Train steps between hard target copies.
    pub target_update: u64,
    /// Transitions stored before training starts.
    pub warmup: usize,
    /// Environment steps per training step.
    pub train_every: u64,
    pub sequence_len: usize,
    pub hidden: usize,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub critic_lr: f64,
    pub actor_lr: f64,
    pub tau: f64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_dt: f64,
    pub dueling_mode: DuelingMode,
    pub pg_lr: f64,
    pub pg_batch_episodes: usize,
    /// Optional hidden layer in the policy network.
    pub pg_hidden: Option<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_min: 0.05,
            epsilon_decay_steps: 5000,
            buffer_capacity: 50_000,
            batch_size: 32,
            target_update: 500,
            warmup: 32,
            train_every: 1,
            sequence_len: 8,
            hidden: 20,
            optimizer: OptimizerKind::adam(),
            lr: 1e-3,
            critic_lr: 1e-3,
            actor_lr: 1e-4,
            tau: 0.005,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_dt: 1.0,
            dueling_mode: DuelingMode::MeanCentered,
            pg_lr: 1e-2,
            pg_batch_episodes: 1,
            pg_hidden: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min)
            || !(0.0..=1.0).contains(&self.epsilon_start)
            || self.epsilon_min > self.epsilon_start
        {
            return Err("need 0 <= epsilon_min <= epsilon_start <= 1");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err("need 1 <= batch_size <= buffer_capacity");
        }
        if self.target_update == 0 || self.train_every == 0 {
            return Err("target_update and train_every must be positive");
        }
        if self.sequence_len == 0 || self.hidden == 0 || self.pg_batch_episodes == 0 || self.pg_hidden == Some(0) {
            return Err("sequence_len, hidden, pg_batch_episodes and pg_hidden must be positive");
        }
        if ![self.lr, self.critic_lr, self.actor_lr, self.pg_lr].iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err("learning rates must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err("tau must lie in [0, 1]");
        }
        if !(self.ou_theta >= 0.0 && self.ou_sigma >= 0.0 && self.ou_dt > 0.0) {
            return Err("ou parameters must be non-negative with dt > 0");
        }
        Ok(())
    }
}
