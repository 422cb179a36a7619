use alloc::vec;
use alloc::vec::Vec;

use super::config::{AgentConfig, Algorithm};
use super::planner::{replace_networks, AgentError, Decision, Planner, TrainStats};
use super::qfunc::argmax;
use super::replay::{ReplayBuffer, Transition};
use super::schedule::OuProcess;
use crate::nn::{soft_update, Activation, Gradients, LayerSpec, Network, NetworkSpec, Optimizer};
use crate::rng::{seeded, streams, SimRng};

pub(crate) fn concat(s: &[f64], a: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(s.len() + a.len());
    v.extend_from_slice(s);
    v.extend_from_slice(a);
    v
}

/// Picks `argmax(pref + noise)` and returns the noisy preference vector.
pub fn select_action_ddpg(pref: &[f64], noise: &[f64]) -> (usize, Vec<f64>) {
    let noisy: Vec<f64> = pref.iter().zip(noise).map(|(p, n)| p + n).collect();
    (argmax(&noisy), noisy)
}

/// Gradient of `mean_s Q(s, μ(s))` w.r.t. the actor parameters, negated so
/// that a descent step on it ascends Q.
pub fn actor_gradient(actor: &Network, critic: &Network, states: &[&[f64]]) -> Result<Gradients, AgentError> {
    let n = states.len() as f64;
    let obs_len = actor.spec().input_width;
    let mut acc = Gradients::zeros_like(actor);
    for s in states {
        let (a, ta) = actor.forward(&[s.to_vec()])?;
        let (_, tc) = critic.forward(&[concat(s, &a)])?;
        let dq_da = &critic.backprop(&tc, &[1.0])?.input_grads[0][obs_len..];
        let g: Vec<f64> = dq_da.iter().map(|d| -d / n).collect();
        acc.add_assign(&actor.backprop(&ta, &g)?.grads)?;
    }
    Ok(acc)
}

/// Deterministic actor-critic over the discrete action set: the actor emits
/// a preference vector, exploration adds OU noise and the arg-max index is
/// executed.
#[derive(Clone, Debug)]
pub struct DdpgAgent {
    cfg: AgentConfig,
    actor: Network,
    critic: Network,
    actor_target: Network,
    critic_target: Network,
    actor_opt: Optimizer,
    critic_opt: Optimizer,
    ou: OuProcess,
    replay: ReplayBuffer,
    rng: SimRng,
    env_steps: u64,
}

impl DdpgAgent {
    pub fn new(obs_len: usize, actions: usize, cfg: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        cfg.validate().map_err(AgentError::InvalidConfig)?;
        let h = cfg.hidden;
        let dense = |units, activation| LayerSpec::Dense { units, activation };
        let mut init = seeded(seed, streams::INIT);
        let actor = Network::new(
            NetworkSpec::new(
                obs_len,
                vec![
                    LayerSpec::Flatten,
                    dense(h, Activation::Relu),
                    dense(h, Activation::Relu),
                    dense(actions, Activation::Softmax),
                ],
            )?,
            &mut init,
        )?;
        let critic = Network::new(
            NetworkSpec::new(
                obs_len + actions,
                vec![
                    LayerSpec::Flatten,
                    dense(h, Activation::Relu),
                    dense(h, Activation::Relu),
                    dense(1, Activation::Linear),
                ],
            )?,
            &mut init,
        )?;
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_opt: Optimizer::new(cfg.optimizer, cfg.actor_lr),
            critic_opt: Optimizer::new(cfg.optimizer, cfg.critic_lr),
            ou: OuProcess::new(cfg.ou_theta, cfg.ou_sigma, cfg.ou_dt, actions),
            replay: ReplayBuffer::new(cfg.buffer_capacity),
            rng: seeded(seed, streams::AGENT),
            env_steps: 0,
            cfg,
        })
    }

    pub fn actor(&self) -> &Network {
        &self.actor
    }

    pub fn critic(&self) -> &Network {
        &self.critic
    }

    pub fn actor_target(&self) -> &Network {
        &self.actor_target
    }

    pub fn critic_target(&self) -> &Network {
        &self.critic_target
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    /// Critic regression toward `r + γ·Q′(s′, μ′(s′))`, then an actor step
    /// through the updated critic, then soft target updates.
    pub fn train_on(&mut self, batch: &[&Transition]) -> Result<TrainStats, AgentError> {
        let n = batch.len() as f64;
        let (mut loss, mut mae, mut mean_q) = (0.0, 0.0, 0.0);
        let mut acc = Gradients::zeros_like(&self.critic);
        for t in batch {
            let y = if t.done {
                t.r
            } else {
                let a_next = self.actor_target.predict(&t.s_next)?;
                t.r + self.cfg.gamma * self.critic_target.predict(&concat(&t.s_next, &a_next))?[0]
            };
            let pref = t.preference.as_deref().ok_or(AgentError::InvalidConfig("transition lacks a preference vector"))?;
            let (q, tape) = self.critic.forward(&[concat(&t.s, pref)])?;
            let err = q[0] - y;
            acc.add_assign(&self.critic.backprop(&tape, &[2.0 * err / n])?.grads)?;
            loss += err * err / n;
            mae += err.abs() / n;
            mean_q += q[0] / n;
        }
        self.critic_opt.step(&mut self.critic, &acc)?;
        let states: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
        let g = actor_gradient(&self.actor, &self.critic, &states)?;
        self.actor_opt.step(&mut self.actor, &g)?;
        soft_update(&mut self.critic_target, &self.critic, self.cfg.tau)?;
        soft_update(&mut self.actor_target, &self.actor, self.cfg.tau)?;
        Ok(TrainStats { loss, mean_q, mae })
    }
}

impl Planner for DdpgAgent {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ddpg
    }

    fn begin_episode(&mut self) {
        self.ou.reset();
    }

    fn act(&mut self, obs: &[f64]) -> Result<Decision, AgentError> {
        let pref = self.actor.predict(obs)?;
        let noise = self.ou.step(&mut self.rng).to_vec();
        let (action, noisy) = select_action_ddpg(&pref, &noise);
        let q = self.critic.predict(&concat(obs, &noisy))?[0];
        Ok(Decision { action, q, preference: Some(noisy) })
    }

    fn observe(&mut self, t: Transition) -> Result<Option<TrainStats>, AgentError> {
        self.env_steps += 1;
        self.replay.push(t);
        let batch = self.cfg.batch_size;
        if self.env_steps % self.cfg.train_every != 0 || self.replay.len() < self.cfg.warmup.max(batch) {
            return Ok(None);
        }
        let mut rng = self.rng.clone();
        let sampled: Vec<Transition> = match self.replay.sample(batch, &mut rng) {
            Some(ts) => ts.into_iter().cloned().collect(),
            None => return Ok(None),
        };
        self.rng = rng;
        let refs: Vec<&Transition> = sampled.iter().collect();
        self.train_on(&refs).map(Some)
    }

    fn end_episode(&mut self) -> Result<Option<TrainStats>, AgentError> {
        Ok(None)
    }

    fn networks(&self) -> Vec<(&'static str, &Network)> {
        vec![("actor", &self.actor), ("critic", &self.critic)]
    }

    fn load_networks(&mut self, nets: Vec<Network>) -> Result<(), AgentError> {
        replace_networks(vec![&mut self.actor, &mut self.critic], nets)?;
        self.actor_target.copy_params_from(&self.actor)?;
        self.critic_target.copy_params_from(&self.critic)?;
        Ok(())
    }
}
