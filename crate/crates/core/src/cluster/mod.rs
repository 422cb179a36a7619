//! Simulated container cluster.
//!
//! Nodes host replicas of a few services. Each tick draws demand from a
//! workload model, turns it into utilisation against the healthy allocation
//! and may kill nodes at random. Adaptation actions change replica counts or
//! per-replica limits; infeasible actions are rejected without side effects.

mod config;
mod state;
mod workload;

pub use config::{Bounds, ClusterConfig, ClusterError, NodeCapacity, ServiceConfig, SloBand};
pub use state::{
    ActionOutcome, ClusterState, MetricsSample, NodeId, NodeMetrics, NodeRole, NodeState, RejectReason, ServiceState,
    OVERLOAD,
};
pub use workload::WorkloadModel;
