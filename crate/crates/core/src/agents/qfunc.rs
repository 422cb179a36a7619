use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::config::DuelingMode;
use super::replay::Transition;
use crate::nn::{Gradients, Network, NnError, Optimizer, Tape};
use crate::rng::SimRng;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice over `q`.
pub fn select_action_greedy(q: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    let u: f64 = rng.random();
    if u < epsilon {
        rng.random_range(0..q.len())
    } else {
        argmax(q)
    }
}

pub fn dueling_aggregate(v: f64, adv: &[f64], mode: DuelingMode) -> Vec<f64> {
    let shift = match mode {
        DuelingMode::MeanCentered => adv.iter().sum::<f64>() / adv.len() as f64,
        DuelingMode::Additive => 0.0,
    };
    adv.iter().map(|a| v + a - shift).collect()
}

/// Anything that maps a state (as a frame sequence) to action values.
pub trait QEstimator {
    fn q_values(&self, frames: &[Vec<f64>]) -> Vec<f64>;
}

/// `y = r + γ·max_a′ Q(s′, a′)` for non-terminal transitions, `y = r` for
/// terminal ones. `s′` is not evaluated when `done` is set.
pub fn bellman_target(r: f64, done: bool, gamma: f64, next: impl FnOnce() -> Vec<f64>) -> f64 {
    if done {
        return r;
    }
    let q = next();
    r + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn bellman_targets(batch: &[&Transition], target: &dyn QEstimator, gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| bellman_target(t.r, t.done, gamma, || target.q_values(core::slice::from_ref(&t.s_next))))
        .collect()
}

/// Q-network: a single network, or a shared trunk feeding value and
/// advantage heads.
#[derive(Clone, Debug, PartialEq)]
pub enum QFunction {
    Plain(Network),
    Dueling { trunk: Network, value: Network, advantage: Network, mode: DuelingMode },
}

#[derive(Clone, Debug)]
pub struct QTape {
    tapes: Vec<Tape>,
}

impl QFunction {
    pub fn networks(&self) -> Vec<&Network> {
        match self {
            QFunction::Plain(n) => vec![n],
            QFunction::Dueling { trunk, value, advantage, .. } => vec![trunk, value, advantage],
        }
    }

    pub fn networks_mut(&mut self) -> Vec<&mut Network> {
        match self {
            QFunction::Plain(n) => vec![n],
            QFunction::Dueling { trunk, value, advantage, .. } => vec![trunk, value, advantage],
        }
    }

    pub fn forward(&self, frames: &[Vec<f64>]) -> Result<(Vec<f64>, QTape), NnError> {
        match self {
            QFunction::Plain(n) => {
                let (q, t) = n.forward(frames)?;
                Ok((q, QTape { tapes: vec![t] }))
            }
            QFunction::Dueling { trunk, value, advantage, mode } => {
                let (h, t0) = trunk.forward(frames)?;
                let (v, t1) = value.forward(core::slice::from_ref(&h))?;
                let (adv, t2) = advantage.forward(core::slice::from_ref(&h))?;
                Ok((dueling_aggregate(v[0], &adv, *mode), QTape { tapes: vec![t0, t1, t2] }))
            }
        }
    }

    pub fn predict(&self, frames: &[Vec<f64>]) -> Result<Vec<f64>, NnError> {
        match self {
            QFunction::Plain(n) => n.predict_seq(frames),
            QFunction::Dueling { trunk, value, advantage, mode } => {
                let h = trunk.predict_seq(frames)?;
                let v = value.predict(&h)?;
                let adv = advantage.predict(&h)?;
                Ok(dueling_aggregate(v[0], &adv, *mode))
            }
        }
    }

    /// Parameter gradients (one per network) and input gradients for an
    /// upstream gradient `dq` on the Q vector.
    pub fn backprop(&self, tape: &QTape, dq: &[f64]) -> Result<(Vec<Gradients>, Vec<Vec<f64>>), NnError> {
        match self {
            QFunction::Plain(n) => {
                let b = n.backprop(&tape.tapes[0], dq)?;
                Ok((vec![b.grads], b.input_grads))
            }
            QFunction::Dueling { trunk, value, advantage, mode } => {
                let total: f64 = dq.iter().sum();
                let shift = match mode {
                    DuelingMode::MeanCentered => total / dq.len() as f64,
                    DuelingMode::Additive => 0.0,
                };
                let dadv: Vec<f64> = dq.iter().map(|g| g - shift).collect();
                let bv = value.backprop(&tape.tapes[1], &[total])?;
                let ba = advantage.backprop(&tape.tapes[2], &dadv)?;
                let dh: Vec<f64> = bv.input_grads[0].iter().zip(&ba.input_grads[0]).map(|(a, b)| a + b).collect();
                let bt = trunk.backprop(&tape.tapes[0], &dh)?;
                Ok((vec![bt.grads, bv.grads, ba.grads], bt.input_grads))
            }
        }
    }

    pub fn apply(&mut self, opts: &mut [Optimizer], grads: &[Gradients]) -> Result<(), NnError> {
        for ((net, opt), g) in self.networks_mut().into_iter().zip(opts.iter_mut()).zip(grads) {
            opt.step(net, g)?;
        }
        Ok(())
    }

    pub fn copy_from(&mut self, other: &QFunction) -> Result<(), NnError> {
        for (a, b) in self.networks_mut().into_iter().zip(other.networks()) {
            a.copy_params_from(b)?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.networks().iter().all(|n| n.is_finite())
    }
}

impl QEstimator for QFunction {
    fn q_values(&self, frames: &[Vec<f64>]) -> Vec<f64> {
        self.predict(frames).unwrap_or_default()
    }
}

/// Accumulates per-network gradients over a batch.
pub(crate) fn accumulate(acc: &mut Option<Vec<Gradients>>, grads: Vec<Gradients>) -> Result<(), NnError> {
    match acc {
        None => *acc = Some(grads),
        Some(a) => {
            for (x, y) in a.iter_mut().zip(&grads) {
                x.add_assign(y)?;
            }
        }
    }
    Ok(())
}
