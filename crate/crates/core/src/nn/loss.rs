use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::error::{check_len, NnError};

/// Probabilities are clamped to this before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LossTarget<'a> {
    /// Regression target, same width as the prediction.
    Values(&'a [f64]),
    /// Chosen class and the weight applied to its negative log-likelihood.
    Index { index: usize, weight: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Gradient w.r.t. the prediction.
    pub grad: Vec<f64>,
    /// Set when a probability fell below [`PROB_FLOOR`].
    pub clamped: bool,
}

/// Mean squared error; the gradient is `2(p − t)/n`.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<LossValue, NnError> {
    check_len("mse target", pred.len(), target.len())?;
    if pred.is_empty() {
        return Err(NnError::EmptySequence);
    }
    let n = pred.len() as f64;
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            value += d * d;
            2.0 * d / n
        })
        .collect();
    Ok(LossValue { value: value / n, grad, clamped: false })
}

/// `−w·ln p[index]` with `p` floored at [`PROB_FLOOR`]. The gradient is taken
/// w.r.t. the probabilities and is zero once clamped.
pub fn cross_entropy(probs: &[f64], index: usize, weight: f64) -> Result<LossValue, NnError> {
    let p = *probs.get(index).ok_or(NnError::IndexOutOfRange { index, len: probs.len() })?;
    let clamped = !(p >= PROB_FLOOR);
    let mut grad = vec![0.0; probs.len()];
    if !clamped {
        grad[index] = -weight / p;
    }
    let value = -weight * libm::log(if clamped { PROB_FLOOR } else { p });
    Ok(LossValue { value, grad, clamped })
}

pub fn loss(kind: LossKind, pred: &[f64], target: &LossTarget<'_>) -> Result<LossValue, NnError> {
    match (kind, target) {
        (LossKind::Mse, LossTarget::Values(t)) => mse(pred, t),
        (LossKind::CrossEntropy, LossTarget::Index { index, weight }) => cross_entropy(pred, *index, *weight),
        _ => Err(NnError::InvalidSpec("loss kind does not match target".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_of_known_values() {
        let l = mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((l.value - 2.5).abs() < 1e-12);
        assert_eq!(l.grad, vec![1.0, 2.0]);
    }

    #[test]
    fn mse_is_zero_at_target() {
        let l = mse(&[0.3, -0.7], &[0.3, -0.7]).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn mse_rejects_width_mismatch() {
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cross_entropy_of_uniform_is_log_n() {
        let l = cross_entropy(&[0.25; 4], 2, 1.0).unwrap();
        assert!((l.value - libm::log(4.0)).abs() < 1e-12);
        assert!(!l.clamped);
        assert_eq!(l.grad[2], -4.0);
    }

    #[test]
    fn cross_entropy_clamps_zero_probability() {
        let l = cross_entropy(&[1.0, 0.0], 1, 1.0).unwrap();
        assert!(l.value.is_finite());
        assert!((l.value - 12.0 * libm::log(10.0)).abs() < 1e-9);
        assert!(l.clamped);
    }

    #[test]
    fn cross_entropy_index_out_of_range() {
        assert_eq!(
            cross_entropy(&[0.5, 0.5], 2, 1.0).unwrap_err(),
            NnError::IndexOutOfRange { index: 2, len: 2 }
        );
    }

    #[test]
    fn dispatch_checks_target_kind() {
        assert!(loss(LossKind::Mse, &[0.0], &LossTarget::Index { index: 0, weight: 1.0 }).is_err());
        assert!(loss(LossKind::CrossEntropy, &[1.0], &LossTarget::Index { index: 0, weight: 1.0 }).is_ok());
    }
}
