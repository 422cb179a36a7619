use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::workload::WorkloadModel;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("cluster needs at least one manager")]
    NoManagers,
    #[error("cluster needs at least one service")]
    NoServices,
    #[error("invalid cluster config: {0}")]
    InvalidConfig(String),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeCapacity {
    pub cpu_millicores: f64,
    pub mem_mb: f64,
    pub disk_gb: f64,
    pub net_mbps: f64,
}

impl Default for NodeCapacity {
    fn default() -> Self {
        Self { cpu_millicores: 4000.0, mem_mb: 8192.0, disk_gb: 100.0, net_mbps: 1000.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SloBand {
    pub low: f64,
    pub high: f64,
}

impl Default for SloBand {
    fn default() -> Self {
        Self { low: 0.2, high: 0.8 }
    }
}

impl SloBand {
    pub fn contains(&self, u: f64) -> bool {
        (self.low..=self.high).contains(&u)
    }

    /// Distance of `u` outside the band.
    pub fn violation(&self, u: f64) -> f64 {
        (u - self.high).max(0.0) + (self.low - u).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub workload: WorkloadModel,
    pub initial_replicas: usize,
    pub cpu_limit: f64,
    pub mem_limit: f64,
    pub min_replicas: usize,
    pub max_replicas: usize,
    /// How many times the service may be split before merging back.
    pub max_split_level: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            workload: WorkloadModel::default(),
            initial_replicas: 2,
            cpu_limit: 500.0,
            mem_limit: 512.0,
            min_replicas: 1,
            max_replicas: 8,
            max_split_level: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub managers: usize,
    pub workers: usize,
    /// Observation slots reserved for nodes; defaults to the node count.
    pub max_nodes: Option<usize>,
    pub capacity: NodeCapacity,
    pub services: Vec<ServiceConfig>,
    pub slo: SloBand,
    pub cpu_limit_bounds: Bounds,
    pub mem_limit_bounds: Bounds,
    /// Multiplicative step for vertical scaling.
    pub vertical_step: f64,
    /// Per node, per tick.
    pub p_fail: f64,
    /// Fraction of disk capacity used at start.
    pub disk_initial: f64,
    /// Disk fraction gained per tick.
    pub disk_growth: f64,
    /// Disk fraction freed on a node when a replica leaves it.
    pub disk_reclaim: f64,
    /// Memory drawn per millicore of CPU in use, MB.
    pub mem_per_millicore: f64,
    /// Network throughput per millicore of CPU in use, MB/s.
    pub net_per_millicore: f64,
}

impl Default for ClusterConfig {
    /// Three managers, two workers and two services. Service 0 needs about
    /// three more replicas to enter the SLO band; service 1 needs about three
    /// CPU limit increases.
    fn default() -> Self {
        let web = ServiceConfig {
            workload: WorkloadModel {
                base: 1800.0,
                amplitude: 400.0,
                period: 100.0,
                sigma: 50.0,
                spike_prob: 0.01,
                spike_multiplier: 1.5,
            },
            ..ServiceConfig::default()
        };
        let worker = ServiceConfig {
            workload: WorkloadModel {
                base: 1400.0,
                amplitude: 150.0,
                period: 150.0,
                sigma: 20.0,
                spike_prob: 0.01,
                spike_multiplier: 1.5,
            },
            ..ServiceConfig::default()
        };
        Self {
            managers: 3,
            workers: 2,
            max_nodes: None,
            capacity: NodeCapacity::default(),
            services: vec![web, worker],
            slo: SloBand::default(),
            cpu_limit_bounds: Bounds { min: 100.0, max: 2000.0 },
            mem_limit_bounds: Bounds { min: 128.0, max: 4096.0 },
            vertical_step: 0.25,
            p_fail: 0.002,
            disk_initial: 0.2,
            disk_growth: 0.001,
            disk_reclaim: 0.05,
            mem_per_millicore: 1.0,
            net_per_millicore: 0.1,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), ClusterError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ClusterError::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

fn probability(name: &str, v: f64) -> Result<(), ClusterError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ClusterError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl ClusterConfig {
    pub fn node_count(&self) -> usize {
        self.managers + self.workers
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes.unwrap_or(self.node_count())
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.managers == 0 {
            return Err(ClusterError::NoManagers);
        }
        if self.services.is_empty() {
            return Err(ClusterError::NoServices);
        }
        if self.max_nodes() < self.node_count() {
            return Err(ClusterError::InvalidConfig(format!(
                "max_nodes {} is below the node count {}",
                self.max_nodes(),
                self.node_count()
            )));
        }
        let c = &self.capacity;
        positive("capacity.cpu_millicores", c.cpu_millicores)?;
        positive("capacity.mem_mb", c.mem_mb)?;
        positive("capacity.disk_gb", c.disk_gb)?;
        positive("capacity.net_mbps", c.net_mbps)?;
        if !(self.slo.low >= 0.0 && self.slo.low < self.slo.high) {
            return Err(ClusterError::InvalidConfig("slo band needs 0 <= low < high".into()));
        }
        for (name, b) in [("cpu_limit_bounds", self.cpu_limit_bounds), ("mem_limit_bounds", self.mem_limit_bounds)] {
            positive(name, b.min)?;
            if b.max < b.min {
                return Err(ClusterError::InvalidConfig(format!("{name}: max below min")));
            }
        }
        positive("vertical_step", self.vertical_step)?;
        if self.vertical_step >= 1.0 {
            return Err(ClusterError::InvalidConfig("vertical_step must be below 1".into()));
        }
        probability("p_fail", self.p_fail)?;
        probability("disk_initial", self.disk_initial)?;
        probability("disk_growth", self.disk_growth)?;
        probability("disk_reclaim", self.disk_reclaim)?;
        if !(self.mem_per_millicore >= 0.0 && self.net_per_millicore >= 0.0) {
            return Err(ClusterError::InvalidConfig("resource ratios must be non-negative".into()));
        }
        for (i, s) in self.services.iter().enumerate() {
            let w = &s.workload;
            positive(&format!("services[{i}].workload.period"), w.period)?;
            probability(&format!("services[{i}].workload.spike_prob"), w.spike_prob)?;
            if !(w.sigma >= 0.0 && w.spike_multiplier >= 0.0 && w.base.is_finite() && w.amplitude.is_finite()) {
                return Err(ClusterError::InvalidConfig(format!("services[{i}].workload has invalid parameters")));
            }
            if s.min_replicas == 0 || s.min_replicas > s.max_replicas {
                return Err(ClusterError::InvalidConfig(format!("services[{i}]: need 1 <= min_replicas <= max_replicas")));
            }
            if !(s.min_replicas..=s.max_replicas).contains(&s.initial_replicas) {
                return Err(ClusterError::InvalidConfig(format!("services[{i}]: initial_replicas outside bounds")));
            }
            let cb = self.cpu_limit_bounds;
            let mb = self.mem_limit_bounds;
            if !(cb.min..=cb.max).contains(&s.cpu_limit) || !(mb.min..=mb.max).contains(&s.mem_limit) {
                return Err(ClusterError::InvalidConfig(format!("services[{i}]: limits outside bounds")));
            }
        }
        Ok(())
    }
}
