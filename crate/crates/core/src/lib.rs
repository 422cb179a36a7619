//! Core of the adapt-swarm testbed.
//!
//! A simulated container cluster whose adaptation actions are chosen by one of
//! five neural planners and ratified by a simplified Raft ballot before they
//! are executed. Everything here is deterministic given a seed and needs only
//! `alloc`; file formats, the CLI and reporting live in the `adapt-swarm`
//! crate.
//!
//! Module map:
//!
//! * [`nn`]: dense and GRU layers with hand-written backpropagation, losses,
//!   optimizers and a binary parameter format.
//! * [`cluster`]: nodes, services, workload and failure model.
//! * [`raft`]: leader election and majority voting over proposed actions.
//! * [`env`]: observation/action/reward wrapper exposing a step/reset API.
//! * [`agents`]: DQN, dueling DQN, DRQN, policy gradient and DDPG planners.
//! * [`testbeds`]: tiny environments with known optimal behaviour.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod action;
pub mod agents;
pub mod cluster;
pub mod env;
pub mod nn;
pub mod raft;
pub mod rng;
pub mod testbeds;

pub use action::{AdaptationAction, ActionBindings, ACTION_COUNT};
pub use agents::{Algorithm, EpisodeMetrics};
pub use cluster::{ClusterConfig, ClusterState, NodeId};
pub use env::{AdaptationEnv, EnvConfig, Environment, Observation, StepResult};
