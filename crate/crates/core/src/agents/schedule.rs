use alloc::vec;
use alloc::vec::Vec;

use crate::rng::{standard_normal, SimRng};

/// Linear decay from `start` to `min` over `decay_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub min: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.min;
        }
        let frac = step as f64 / self.decay_steps as f64;
        (self.start - (self.start - self.min) * frac).clamp(self.min, self.start)
    }
}

/// Discrete Ornstein-Uhlenbeck process, one component per action.
#[derive(Clone, Debug, PartialEq)]
pub struct OuProcess {
    pub theta: f64,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub dt: f64,
    pub x: Vec<f64>,
}

impl OuProcess {
    pub fn new(theta: f64, sigma: f64, dt: f64, dim: usize) -> Self {
        Self { theta, mu: vec![0.0; dim], sigma, dt, x: vec![0.0; dim] }
    }

    pub fn reset(&mut self) {
        self.x.clone_from(&self.mu);
    }

    /// `x ← x + θ(μ − x)dt + σ√dt·N(0, 1)` per component.
    pub fn step(&mut self, rng: &mut SimRng) -> &[f64] {
        let sd = self.sigma * libm::sqrt(self.dt);
        for (x, mu) in self.x.iter_mut().zip(&self.mu) {
            *x += self.theta * (mu - *x) * self.dt + sd * standard_normal(rng);
        }
        &self.x
    }

    /// Stationary variance of the discretised process,
    /// `σ²dt / (1 − (1 − θdt)²)`.
    pub fn stationary_variance(&self) -> f64 {
        let a = 1.0 - self.theta * self.dt;
        self.sigma * self.sigma * self.dt / (1.0 - a * a)
    }
}
