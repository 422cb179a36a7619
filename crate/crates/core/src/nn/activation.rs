use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Linear,
    Tanh,
    Sigmoid,
    Softmax,
}

impl Activation {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Linear => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
            Activation::Softmax => 4,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Activation::Relu,
            1 => Activation::Linear,
            2 => Activation::Tanh,
            3 => Activation::Sigmoid,
            4 => Activation::Softmax,
            _ => return None,
        })
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
        })
    }
}

impl FromStr for Activation {
    type Err = UnknownActivation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "softmax" => Ok(Activation::Softmax),
            _ => Err(UnknownActivation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown activation kind")]
pub struct UnknownActivation;

/// Numerically stable logistic function.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

pub fn activate(kind: Activation, x: &[f64]) -> Vec<f64> {
    match kind {
        Activation::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
        Activation::Linear => x.to_vec(),
        Activation::Tanh => x.iter().map(|&v| libm::tanh(v)).collect(),
        Activation::Sigmoid => x.iter().map(|&v| sigmoid(v)).collect(),
        Activation::Softmax => softmax(x),
    }
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Maps a gradient w.r.t. the activation output back to the pre-activation.
pub fn activation_backward(kind: Activation, pre: &[f64], out: &[f64], grad_out: &[f64]) -> Vec<f64> {
    match kind {
        Activation::Relu => pre
            .iter()
            .zip(grad_out)
            .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
            .collect(),
        Activation::Linear => grad_out.to_vec(),
        Activation::Tanh => out.iter().zip(grad_out).map(|(&y, &g)| g * (1.0 - y * y)).collect(),
        Activation::Sigmoid => out.iter().zip(grad_out).map(|(&y, &g)| g * y * (1.0 - y)).collect(),
        Activation::Softmax => {
            let dot: f64 = out.iter().zip(grad_out).map(|(y, g)| y * g).sum();
            out.iter().zip(grad_out).map(|(&y, &g)| y * (g - dot)).collect()
        }
    }
}
