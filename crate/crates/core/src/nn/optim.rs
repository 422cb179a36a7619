use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::error::NnError;
use super::network::{Gradients, Network};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub const fn adam() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Gradient-descent optimizer. Adam moments are allocated on the first step
/// and follow the network's flat parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Self { kind, lr, m: Vec::new(), v: Vec::new(), t: 0 }
    }

    pub fn sgd(lr: f64) -> Self {
        Self::new(OptimizerKind::Sgd, lr)
    }

    pub fn adam(lr: f64) -> Self {
        Self::new(OptimizerKind::adam(), lr)
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Moves `net` against `grads`. Fails without touching the network when
    /// the gradient layout does not match.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<(), NnError> {
        let g: Vec<f64> = grads.flat();
        if g.len() != net.param_count() {
            return Err(NnError::LayoutMismatch);
        }
        self.t += 1;
        let update: Vec<f64> = match self.kind {
            OptimizerKind::Sgd => g.iter().map(|x| -self.lr * x).collect(),
            OptimizerKind::Adam { beta1, beta2, eps } => {
                if self.m.len() != g.len() {
                    self.m = vec![0.0; g.len()];
                    self.v = vec![0.0; g.len()];
                }
                let t = self.t as f64;
                let c1 = 1.0 - libm::pow(beta1, t);
                let c2 = 1.0 - libm::pow(beta2, t);
                g.iter()
                    .zip(self.m.iter_mut().zip(self.v.iter_mut()))
                    .map(|(&gi, (m, v))| {
                        *m = beta1 * *m + (1.0 - beta1) * gi;
                        *v = beta2 * *v + (1.0 - beta2) * gi * gi;
                        -self.lr * (*m / c1) / (libm::sqrt(*v / c2) + eps)
                    })
                    .collect()
            }
        };
        let mut k = 0;
        for s in net.param_slices_mut() {
            for p in s.iter_mut() {
                *p += update[k];
                k += 1;
            }
        }
        Ok(())
    }
}
