//! Minimal neural-network engine.
//!
//! Parameters live in plain row-major matrices; every layer carries its own
//! forward cache and reverse-mode gradient, including backpropagation through
//! time for the GRU. There is no autograd graph: [`Network::forward`] records a
//! [`Tape`] and [`Network::backprop`] walks it backwards.

mod activation;
mod codec;
mod dense;
mod error;
mod gru;
mod loss;
mod matrix;
mod network;
mod optim;

pub use activation::{activate, activation_backward, Activation};
pub use codec::{load_params, save_params, CodecError, CodecErrorKind, FORMAT_VERSION, MAGIC};
pub use dense::{dense_forward, DenseParams};
pub use error::NnError;
pub use gru::{gru_sequence_forward, gru_step, GruGradients, GruParams, GruStepCache};
pub use loss::{cross_entropy, loss, mse, LossKind, LossTarget, LossValue, PROB_FLOOR};
pub use matrix::Matrix2D;
pub use network::{
    soft_update, Backward, Gradients, LayerParams, LayerSpec, Network, NetworkSpec, Tape,
};
pub use optim::{Optimizer, OptimizerKind};
