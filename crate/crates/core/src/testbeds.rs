//! Small environments whose optimal behaviour is known in closed form.

use alloc::vec;

use crate::env::{EnvError, Environment, Observation, StepInfo, StepOutcome, StepResult};

fn info(converged: bool) -> StepInfo {
    StepInfo { outcome: StepOutcome::Applied, violation: 0.0, duration_s: 1.0, converged, sparse_reward: 0.0 }
}

/// Deterministic chain of `n` states observed one-hot. Action 1 moves right;
/// moving right from the last state pays `goal_reward` and ends the episode.
/// Action 0 moves left; at state 0 it stays and pays `stay_reward`.
#[derive(Clone, Debug)]
pub struct ChainMdp {
    pub n: usize,
    pub goal_reward: f64,
    pub stay_reward: f64,
    pub max_steps: usize,
    state: usize,
    steps: usize,
    done: bool,
}

impl Default for ChainMdp {
    fn default() -> Self {
        Self::new(5)
    }
}

impl ChainMdp {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub fn new(n: usize) -> Self {
        Self { n, goal_reward: 10.0, stay_reward: 0.1, max_steps: 50, state: 0, steps: 0, done: true }
    }

    /// `(next_state, reward, terminal)`.
    pub fn transition(&self, s: usize, a: usize) -> (usize, f64, bool) {
        match a {
            Self::RIGHT if s + 1 == self.n => (s, self.goal_reward, true),
            Self::RIGHT => (s + 1, 0.0, false),
            _ if s == 0 => (0, self.stay_reward, false),
            _ => (s - 1, 0.0, false),
        }
    }

    pub fn one_hot(&self, s: usize) -> Observation {
        let mut v = vec![0.0; self.n];
        v[s] = 1.0;
        Observation(v)
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl Environment for ChainMdp {
    fn observation_len(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, _seed: u64) -> Result<Observation, EnvError> {
        self.state = 0;
        self.steps = 0;
        self.done = false;
        Ok(self.one_hot(0))
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if action >= 2 {
            return Err(EnvError::InvalidAction(action));
        }
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let (next, reward, terminal) = self.transition(self.state, action);
        self.state = next;
        self.steps += 1;
        self.done = terminal || self.steps >= self.max_steps;
        Ok(StepResult { observation: self.one_hot(next), reward, done: self.done, info: info(terminal) })
    }
}

/// One-step episodes with a constant observation; arm `i` pays `payouts[i]`.
#[derive(Clone, Debug)]
pub struct Bandit {
    pub payouts: [f64; 2],
    done: bool,
}

impl Default for Bandit {
    fn default() -> Self {
        Self { payouts: [1.0, 0.0], done: true }
    }
}

impl Environment for Bandit {
    fn observation_len(&self) -> usize {
        1
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, _seed: u64) -> Result<Observation, EnvError> {
        self.done = false;
        Ok(Observation(vec![1.0]))
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let reward = *self.payouts.get(action).ok_or(EnvError::InvalidAction(action))?;
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        self.done = true;
        Ok(StepResult { observation: Observation(vec![1.0]), reward, done: true, info: info(true) })
    }
}
