use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub c_conv: f64,
    pub c_fail: f64,
    pub c_step: f64,
    pub c_viol: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { c_conv: 100.0, c_fail: 10.0, c_step: 1.0, c_viol: 5.0 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if [self.c_conv, self.c_fail, self.c_step, self.c_viol].iter().all(|c| c.is_finite() && *c >= 0.0) {
            Ok(())
        } else {
            Err("reward constants must be finite and non-negative")
        }
    }

    /// `c_conv·[converged] − c_fail·[rejected] − c_step − c_viol·violation`.
    pub fn shaped(&self, rejected: bool, violation: f64, converged: bool) -> f64 {
        let mut r = -self.c_step - self.c_viol * violation;
        if converged {
            r += self.c_conv;
        }
        if rejected {
            r -= self.c_fail;
        }
        r
    }

    /// Terminal-only variant: `c_conv` on convergence, zero otherwise.
    pub fn sparse(&self, converged: bool) -> f64 {
        if converged {
            self.c_conv
        } else {
            0.0
        }
    }
}
