//! Experiment runner, aggregation, plots and reports for the adapt-swarm
//! testbed.

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod metrics;
pub mod plot;
pub mod report;
pub mod runner;
