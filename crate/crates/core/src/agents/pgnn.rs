use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::config::{AgentConfig, Algorithm};
use super::planner::{replace_networks, AgentError, Decision, Planner, TrainStats};
use super::replay::Transition;
use super::returns::{discounted_returns, normalize_returns};
use crate::nn::{cross_entropy, Activation, Gradients, LayerSpec, Network, NetworkSpec, Optimizer, PROB_FLOOR};
use crate::rng::{seeded, streams, SimRng};

/// Draws an index from a probability vector by inverse CDF.
pub fn sample_categorical(probs: &[f64], rng: &mut SimRng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

#[derive(Clone, Debug, PartialEq)]
struct Step {
    s: Vec<f64>,
    a: usize,
    r: f64,
}

/// REINFORCE with returns normalised over a batch of episodes.
#[derive(Clone, Debug)]
pub struct PgAgent {
    cfg: AgentConfig,
    policy: Network,
    opt: Optimizer,
    rng: SimRng,
    episode: Vec<Step>,
    batch: Vec<Vec<Step>>,
}

impl PgAgent {
    pub fn new(obs_len: usize, actions: usize, cfg: AgentConfig, seed: u64) -> Result<Self, AgentError> {
        cfg.validate().map_err(AgentError::InvalidConfig)?;
        let mut layers = vec![LayerSpec::Flatten];
        if let Some(h) = cfg.pg_hidden {
            layers.push(LayerSpec::Dense { units: h, activation: Activation::Relu });
        }
        layers.push(LayerSpec::Dense { units: actions, activation: Activation::Softmax });
        let policy = Network::new(NetworkSpec::new(obs_len, layers)?, &mut seeded(seed, streams::INIT))?;
        Ok(Self {
            opt: Optimizer::new(cfg.optimizer, cfg.pg_lr),
            policy,
            rng: seeded(seed, streams::AGENT),
            episode: Vec::new(),
            batch: Vec::new(),
            cfg,
        })
    }

    pub fn policy(&self) -> &Network {
        &self.policy
    }

    pub fn policy_mut(&mut self) -> &mut Network {
        &mut self.policy
    }

    /// Gradient of `−mean_t Ĝ_t·ln π(a_t|s_t)` over `(s, a, Ĝ)` triples, with
    /// the loss and mean log-probability.
    pub fn policy_gradient(&self, steps: &[(Vec<f64>, usize, f64)]) -> Result<(Gradients, f64, f64), AgentError> {
        let n = steps.len() as f64;
        let mut acc = Gradients::zeros_like(&self.policy);
        let (mut loss, mut logp) = (0.0, 0.0);
        for (s, a, g) in steps {
            let (p, tape) = self.policy.forward(core::slice::from_ref(s))?;
            let ce = cross_entropy(&p, *a, *g)?;
            let dp: Vec<f64> = ce.grad.iter().map(|d| d / n).collect();
            acc.add_assign(&self.policy.backprop(&tape, &dp)?.grads)?;
            loss += ce.value / n;
            logp += libm::log(p[*a].max(PROB_FLOOR)) / n;
        }
        Ok((acc, loss, logp))
    }

    /// One update from a batch of finished episodes.
    pub fn train_batch(&mut self, episodes: &[Vec<(Vec<f64>, usize, f64)>]) -> Result<TrainStats, AgentError> {
        let returns: Vec<Vec<f64>> = episodes
            .iter()
            .map(|ep| discounted_returns(&ep.iter().map(|x| x.2).collect::<Vec<_>>(), self.cfg.gamma))
            .collect();
        let norm = normalize_returns(&returns);
        let steps: Vec<(Vec<f64>, usize, f64)> = episodes
            .iter()
            .zip(&norm)
            .flat_map(|(ep, g)| ep.iter().zip(g).map(|((s, a, _), g)| (s.clone(), *a, *g)))
            .collect();
        if steps.is_empty() {
            return Ok(TrainStats { loss: 0.0, mean_q: f64::NAN, mae: f64::NAN });
        }
        let (grads, loss, logp) = self.policy_gradient(&steps)?;
        self.opt.step(&mut self.policy, &grads)?;
        Ok(TrainStats { loss, mean_q: logp, mae: f64::NAN })
    }
}

impl Planner for PgAgent {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Pgnn
    }

    fn begin_episode(&mut self) {
        self.episode.clear();
    }

    fn act(&mut self, obs: &[f64]) -> Result<Decision, AgentError> {
        let p = self.policy.predict(obs)?;
        let action = sample_categorical(&p, &mut self.rng);
        Ok(Decision { action, q: libm::log(p[action].max(PROB_FLOOR)), preference: None })
    }

    fn observe(&mut self, t: Transition) -> Result<Option<TrainStats>, AgentError> {
        self.episode.push(Step { s: t.s, a: t.a, r: t.r });
        Ok(None)
    }

    fn end_episode(&mut self) -> Result<Option<TrainStats>, AgentError> {
        let ep = core::mem::take(&mut self.episode);
        if !ep.is_empty() {
            self.batch.push(ep);
        }
        if self.batch.len() < self.cfg.pg_batch_episodes {
            return Ok(None);
        }
        let batch: Vec<Vec<(Vec<f64>, usize, f64)>> = core::mem::take(&mut self.batch)
            .into_iter()
            .map(|ep| ep.into_iter().map(|s| (s.s, s.a, s.r)).collect())
            .collect();
        self.train_batch(&batch).map(Some)
    }

    fn networks(&self) -> Vec<(&'static str, &Network)> {
        vec![("policy", &self.policy)]
    }

    fn load_networks(&mut self, nets: Vec<Network>) -> Result<(), AgentError> {
        replace_networks(vec![&mut self.policy], nets)
    }
}
