use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::config::{AgentConfig, Algorithm};
use super::planner::{replace_networks, AgentError, Decision, Planner, TrainStats};
use super::qfunc::{accumulate, bellman_target, select_action_greedy, QEstimator, QFunction};
use super::replay::{EpisodeReplay, ReplayBuffer, Transition};
use super::schedule::EpsilonSchedule;
use crate::nn::{Activation, LayerSpec, Network, NetworkSpec, Optimizer};
use crate::rng::{seeded, streams, SimRng};

/// One Q-learning training example.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub frames: Vec<Vec<f64>>,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
    pub next_frames: Vec<Vec<f64>>,
}

impl Sample {
    pub fn from_transition(t: &Transition) -> Self {
        Self {
            frames: vec![t.s.clone()],
            action: t.a,
            reward: t.r,
            done: t.done,
            next_frames: vec![t.s_next.clone()],
        }
    }
}

/// Builds the Q-function for DQN, the dueling variant or DRQN.
pub fn build_q_function(
    algo: Algorithm,
    obs_len: usize,
    actions: usize,
    cfg: &AgentConfig,
    rng: &mut SimRng,
) -> Result<QFunction, AgentError> {
    let h = cfg.hidden;
    let dense = |units, activation| LayerSpec::Dense { units, activation };
    Ok(match algo {
        Algorithm::Dqn => QFunction::Plain(Network::new(
            NetworkSpec::new(obs_len, vec![LayerSpec::Flatten, dense(h, Activation::Relu), dense(actions, Activation::Linear)])?,
            rng,
        )?),
        Algorithm::Ddqn => QFunction::Dueling {
            trunk: Network::new(NetworkSpec::new(obs_len, vec![LayerSpec::Flatten, dense(h, Activation::Relu)])?, rng)?,
            value: Network::new(NetworkSpec::new(h, vec![dense(1, Activation::Linear)])?, rng)?,
            advantage: Network::new(NetworkSpec::new(h, vec![dense(actions, Activation::Linear)])?, rng)?,
            mode: cfg.dueling_mode,
        },
        Algorithm::Drqn => QFunction::Plain(Network::new(
            NetworkSpec::new(
                obs_len,
                vec![LayerSpec::Flatten, LayerSpec::Gru { hidden: h }, dense(actions, Activation::Linear)],
            )?,
            rng,
        )?),
        Algorithm::Pgnn | Algorithm::Ddpg => return Err(AgentError::InvalidConfig("not a Q-learning algorithm")),
    })
}

/// DQN, dueling DQN and DRQN: ε-greedy acting, experience replay and a
/// periodically hard-copied target network.
#[derive(Clone, Debug)]
pub struct QAgent {
    algo: Algorithm,
    cfg: AgentConfig,
    online: QFunction,
    target: QFunction,
    opts: Vec<Optimizer>,
    replay: ReplayBuffer,
    episodes: EpisodeReplay,
    current: Vec<Transition>,
    history: VecDeque<Vec<f64>>,
    epsilon: EpsilonSchedule,
    env_steps: u64,
    train_steps: u64,
    rng: SimRng,
}

impl QAgent {
    pub fn new(algo: Algorithm, obs_len: usize, actions: usize, cfg: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        cfg.validate().map_err(AgentError::InvalidConfig)?;
        let mut init = seeded(seed, streams::INIT);
        let online = build_q_function(algo, obs_len, actions, &cfg, &mut init)?;
        let target = online.clone();
        let opts = online.networks().iter().map(|_| Optimizer::new(cfg.optimizer, cfg.lr)).collect();
        Ok(Self {
            algo,
            online,
            target,
            opts,
            replay: ReplayBuffer::new(cfg.buffer_capacity),
            episodes: EpisodeReplay::new(cfg.buffer_capacity),
            current: Vec::new(),
            history: VecDeque::new(),
            epsilon: EpsilonSchedule { start: cfg.epsilon_start, min: cfg.epsilon_min, decay_steps: cfg.epsilon_decay_steps },
            env_steps: 0,
            train_steps: 0,
            rng: seeded(seed, streams::AGENT),
            cfg,
        })
    }

    pub fn online(&self) -> &QFunction {
        &self.online
    }

    pub fn target(&self) -> &QFunction {
        &self.target
    }

    pub fn online_mut(&mut self) -> &mut QFunction {
        &mut self.online
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn episode_replay(&self) -> &EpisodeReplay {
        &self.episodes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.value(self.env_steps)
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    fn recurrent(&self) -> bool {
        self.algo == Algorithm::Drqn
    }

    /// One optimisation step on `samples`: squared error between
    /// `Q(s, a)` and its Bellman target, averaged over the batch.
    pub fn train_samples(&mut self, samples: &[Sample]) -> Result<TrainStats, AgentError> {
        let n = samples.len() as f64;
        let (mut loss, mut mae, mut mean_q) = (0.0, 0.0, 0.0);
        let mut acc = None;
        for s in samples {
            let target = &self.target;
            let y = bellman_target(s.reward, s.done, self.cfg.gamma, || target.q_values(&s.next_frames));
            let (q, tape) = self.online.forward(&s.frames)?;
            let err = q[s.action] - y;
            let mut dq = vec![0.0; q.len()];
            dq[s.action] = 2.0 * err / n;
            let (grads, _) = self.online.backprop(&tape, &dq)?;
            accumulate(&mut acc, grads)?;
            loss += err * err;
            mae += err.abs();
            mean_q += q[s.action];
        }
        if let Some(g) = acc {
            self.online.apply(&mut self.opts, &g)?;
        }
        self.train_steps += 1;
        if self.train_steps % self.cfg.target_update == 0 {
            self.target.copy_from(&self.online)?;
        }
        Ok(TrainStats { loss: loss / n, mean_q: mean_q / n, mae: mae / n })
    }

    /// Samples a batch from replay and trains on it; `None` until enough
    /// experience is stored.
    pub fn train_step(&mut self) -> Result<Option<TrainStats>, AgentError> {
        let batch = self.cfg.batch_size;
        let samples: Vec<Sample> = if self.recurrent() {
            if self.episodes.transitions() < self.cfg.warmup.max(1) {
                return Ok(None);
            }
            let Some(windows) = self.episodes.sample_sequences(batch, self.cfg.sequence_len, &mut self.rng) else {
                return Ok(None);
            };
            windows
                .iter()
                .map(|w| Sample {
                    frames: w.real_frames().to_vec(),
                    action: w.action,
                    reward: w.reward,
                    done: w.done,
                    next_frames: w.real_next_frames().to_vec(),
                })
                .collect()
        } else {
            if self.replay.len() < self.cfg.warmup.max(batch) {
                return Ok(None);
            }
            let Some(ts) = self.replay.sample(batch, &mut self.rng) else { return Ok(None) };
            ts.into_iter().map(Sample::from_transition).collect()
        };
        self.train_samples(&samples).map(Some)
    }
}

impl Planner for QAgent {
    fn algorithm(&self) -> Algorithm {
        self.algo
    }

    fn begin_episode(&mut self) {
        self.history.clear();
        self.current.clear();
    }

    fn act(&mut self, obs: &[f64]) -> Result<Decision, AgentError> {
        let q = if self.recurrent() {
            self.history.push_back(obs.to_vec());
            while self.history.len() > self.cfg.sequence_len {
                self.history.pop_front();
            }
            let frames: Vec<Vec<f64>> = self.history.iter().cloned().collect();
            self.online.predict(&frames)?
        } else {
            self.online.predict(&[obs.to_vec()])?
        };
        let eps = self.epsilon.value(self.env_steps);
        let action = select_action_greedy(&q, eps, &mut self.rng);
        Ok(Decision { action, q: q[action], preference: None })
    }

    fn observe(&mut self, t: Transition) -> Result<Option<TrainStats>, AgentError> {
        self.env_steps += 1;
        if self.recurrent() {
            self.current.push(t);
        } else {
            self.replay.push(t);
        }
        if self.env_steps % self.cfg.train_every == 0 {
            self.train_step()
        } else {
            Ok(None)
        }
    }

    fn end_episode(&mut self) -> Result<Option<TrainStats>, AgentError> {
        if self.recurrent() {
            let ep = core::mem::take(&mut self.current);
            self.episodes.push_episode(ep);
        }
        self.history.clear();
        Ok(None)
    }

    fn networks(&self) -> Vec<(&'static str, &Network)> {
        let names: &[&'static str] = match self.online {
            QFunction::Plain(_) => &["q"],
            QFunction::Dueling { .. } => &["trunk", "value", "advantage"],
        };
        names.iter().copied().zip(self.online.networks()).collect()
    }

    fn load_networks(&mut self, nets: Vec<Network>) -> Result<(), AgentError> {
        replace_networks(self.online.networks_mut(), nets)?;
        self.target.copy_from(&self.online)?;
        Ok(())
    }
}
