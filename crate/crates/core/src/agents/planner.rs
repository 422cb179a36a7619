use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use super::replay::Transition;
use crate::env::{EnvError, Environment};
use crate::nn::{CodecError, Network, NnError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid agent config: {0}")]
    InvalidConfig(&'static str),
    #[error("checkpoint does not match this agent: {0}")]
    CheckpointMismatch(&'static str),
}

/// Statistics of one optimisation step or batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainStats {
    pub loss: f64,
    pub mean_q: f64,
    /// Mean absolute error between predicted and target values; NaN when the
    /// planner has no value target.
    pub mae: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: usize,
    /// Value estimate of the chosen action at selection time. Policy-gradient
    /// planners report `ln π(a|s)` instead.
    pub q: f64,
    pub preference: Option<Vec<f64>>,
}

/// One row of the per-episode output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub mean_q: f64,
    pub mae: f64,
    pub loss: f64,
    pub adaptation_time_s: f64,
    pub converged: bool,
}

/// The planning stage of the control loop.
pub trait Planner {
    fn algorithm(&self) -> Algorithm;
    fn begin_episode(&mut self);
    fn act(&mut self, obs: &[f64]) -> Result<Decision, AgentError>;
    /// Stores a transition and trains when the planner's cadence says so.
    fn observe(&mut self, t: Transition) -> Result<Option<TrainStats>, AgentError>;
    fn end_episode(&mut self) -> Result<Option<TrainStats>, AgentError>;
    /// Named networks in a fixed order, for checkpoints.
    fn networks(&self) -> Vec<(&'static str, &Network)>;
    /// Replaces the networks with ones from a checkpoint, in the order of
    /// [`Planner::networks`]. Target networks are synced to the loaded ones.
    fn load_networks(&mut self, nets: Vec<Network>) -> Result<(), AgentError>;
}

pub(crate) fn replace_networks(slots: Vec<&mut Network>, nets: Vec<Network>) -> Result<(), AgentError> {
    if slots.len() != nets.len() {
        return Err(AgentError::CheckpointMismatch("network count"));
    }
    if slots.iter().zip(&nets).any(|(a, b)| a.spec() != b.spec()) {
        return Err(AgentError::CheckpointMismatch("network shape"));
    }
    for (slot, net) in slots.into_iter().zip(nets) {
        slot.copy_params_from(&net)?;
    }
    Ok(())
}

fn mean_or_nan(sum: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs one episode from `env.reset(seed)` until the environment reports
/// done. A transition is terminal only when the environment converged, so
/// step-limit truncation still bootstraps.
pub fn run_episode(
    planner: &mut dyn Planner,
    env: &mut dyn Environment,
    episode: usize,
    seed: u64,
) -> Result<(EpisodeMetrics, Vec<Transition>), AgentError> {
    let mut obs = env.reset(seed)?.0;
    planner.begin_episode();
    let mut transitions = Vec::new();
    let (mut total_reward, mut time, mut q_sum) = (0.0, 0.0, 0.0);
    let (mut loss_sum, mut mae_sum, mut trained, mut mae_n) = (0.0, 0.0, 0, 0);
    let mut record = |s: TrainStats| {
        loss_sum += s.loss;
        trained += 1;
        if !s.mae.is_nan() {
            mae_sum += s.mae;
            mae_n += 1;
        }
    };
    let mut converged;
    loop {
        let d = planner.act(&obs)?;
        let res = env.step(d.action)?;
        total_reward += res.reward;
        time += res.info.duration_s;
        q_sum += d.q;
        converged = res.info.converged;
        let next: Vec<f64> = res.observation.into();
        let t = Transition {
            s: obs,
            a: d.action,
            r: res.reward,
            s_next: next.clone(),
            done: res.info.converged,
            preference: d.preference,
        };
        transitions.push(t.clone());
        if let Some(s) = planner.observe(t)? {
            record(s);
        }
        obs = next;
        if res.done {
            break;
        }
    }
    if let Some(s) = planner.end_episode()? {
        record(s);
    }
    let steps = transitions.len();
    let metrics = EpisodeMetrics {
        episode,
        steps,
        total_reward,
        mean_q: mean_or_nan(q_sum, steps),
        mae: mean_or_nan(mae_sum, mae_n),
        loss: mean_or_nan(loss_sum, trained),
        adaptation_time_s: time,
        converged,
    };
    Ok((metrics, transitions))
}
