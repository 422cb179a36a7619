use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{standard_normal, SimRng};

/// Demand generator for one service, in millicores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadModel {
    pub base: f64,
    pub amplitude: f64,
    /// Sinusoid period in ticks.
    pub period: f64,
    pub sigma: f64,
    pub spike_prob: f64,
    /// A spike adds `(spike_multiplier − 1)·base` for one tick.
    pub spike_multiplier: f64,
}

impl Default for WorkloadModel {
    fn default() -> Self {
        Self { base: 1000.0, amplitude: 0.0, period: 100.0, sigma: 0.0, spike_prob: 0.0, spike_multiplier: 1.0 }
    }
}

impl WorkloadModel {
    pub fn constant(base: f64) -> Self {
        Self { base, ..Self::default() }
    }

    /// Always consumes one normal and one uniform draw so that the stream
    /// position does not depend on the parameters.
    pub fn demand(&self, t: u64, rng: &mut SimRng) -> f64 {
        let noise = standard_normal(rng);
        let u: f64 = rng.random();
        let phase = 2.0 * core::f64::consts::PI * t as f64 / self.period;
        let mut d = self.base + self.amplitude * libm::sin(phase) + self.sigma * noise;
        if u < self.spike_prob {
            d += (self.spike_multiplier - 1.0) * self.base;
        }
        if d.is_finite() {
            d.max(0.0)
        } else {
            0.0
        }
    }
}
