//! Planners and the pieces they share: replay, schedules, value heads and
//! the episode loop.

mod checkpoint;
mod config;
mod ddpg;
mod pgnn;
mod planner;
mod qagent;
mod qfunc;
mod replay;
mod returns;
mod schedule;

use alloc::boxed::Box;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{AgentConfig, Algorithm, DuelingMode, UnknownAlgorithm};
pub use ddpg::{actor_gradient, select_action_ddpg, DdpgAgent};
pub use pgnn::{sample_categorical, PgAgent};
pub use planner::{run_episode, AgentError, Decision, EpisodeMetrics, Planner, TrainStats};
pub use qagent::{build_q_function, QAgent, Sample};
pub use qfunc::{argmax, bellman_target, bellman_targets, dueling_aggregate, select_action_greedy, QEstimator, QFunction, QTape};
pub use replay::{window_at, EpisodeReplay, ReplayBuffer, Transition, Window};
pub use returns::{discounted_returns, normalize_returns, STD_FLOOR};
pub use schedule::{EpsilonSchedule, OuProcess};

/// Builds the planner for `algo` with its default network shapes.
pub fn make_planner(
    algo: Algorithm,
    obs_len: usize,
    actions: usize,
    cfg: AgentConfig,
    seed: u64,
) -> Result<Box<dyn Planner>, AgentError> {
    Ok(match algo {
        Algorithm::Dqn | Algorithm::Ddqn | Algorithm::Drqn => Box::new(QAgent::new(algo, obs_len, actions, cfg, seed)?),
        Algorithm::Pgnn => Box::new(PgAgent::new(obs_len, actions, cfg, seed)?),
        Algorithm::Ddpg => Box::new(DdpgAgent::new(obs_len, actions, cfg, seed)?),
    })
}
