use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{ClusterConfig, ClusterError, SloBand};
use crate::action::{ActionBindings, AdaptationAction};
use crate::rng::{seeded, streams, SimRng};

pub type NodeId = usize;

/// Utilisation ceiling used to represent overload.
pub const OVERLOAD: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Leader,
    Manager,
    Worker,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub role: NodeRole,
    pub alive: bool,
    pub cpu_capacity: f64,
    pub mem_capacity: f64,
    pub disk_capacity: f64,
    pub net_capacity: f64,
    /// Fraction of disk in use.
    pub disk_used: f64,
}

impl NodeState {
    pub fn is_manager(&self) -> bool {
        self.role != NodeRole::Worker
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceState {
    pub id: usize,
    pub cpu_limit: f64,
    pub mem_limit: f64,
    /// Node hosting each replica.
    pub placement: Vec<NodeId>,
    pub healthy: Vec<bool>,
    pub split_level: u32,
}

impl ServiceState {
    pub fn replicas(&self) -> usize {
        self.placement.len()
    }

    pub fn healthy_replicas(&self) -> usize {
        self.healthy.iter().filter(|&&h| h).count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NodeMetrics {
    pub cpu_util: f64,
    pub mem_util: f64,
    pub disk_util: f64,
    pub net_util: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsSample {
    pub clock: u64,
    pub nodes: Vec<NodeMetrics>,
    /// Demand in millicores per service.
    pub demand: Vec<f64>,
    /// CPU utilisation of each service against its healthy allocation.
    pub service_util: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    AtBound,
    InsufficientCapacity,
    NoFailedNode,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            RejectReason::AtBound => "at_bound",
            RejectReason::InsufficientCapacity => "insufficient_capacity",
            RejectReason::NoFailedNode => "no_failed_node",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionOutcome {
    Applied,
    Rejected(RejectReason),
}

/// Ground truth of the simulated cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    config: ClusterConfig,
    nodes: Vec<NodeState>,
    services: Vec<ServiceState>,
    clock: u64,
    rng: SimRng,
    metrics: MetricsSample,
}

impl ClusterState {
    /// Builds the initial cluster: every node alive, node 0 leading, replicas
    /// placed one at a time by the placement rule.
    pub fn new(config: ClusterConfig, seed: u64) -> Result<Self, ClusterError> {
        config.validate()?;
        let cap = config.capacity;
        let nodes = (0..config.node_count())
            .map(|id| NodeState {
                id,
                role: if id == 0 {
                    NodeRole::Leader
                } else if id < config.managers {
                    NodeRole::Manager
                } else {
                    NodeRole::Worker
                },
                alive: true,
                cpu_capacity: cap.cpu_millicores,
                mem_capacity: cap.mem_mb,
                disk_capacity: cap.disk_gb,
                net_capacity: cap.net_mbps,
                disk_used: config.disk_initial,
            })
            .collect();
        let services = config
            .services
            .iter()
            .enumerate()
            .map(|(id, s)| ServiceState {
                id,
                cpu_limit: s.cpu_limit,
                mem_limit: s.mem_limit,
                placement: Vec::new(),
                healthy: Vec::new(),
                split_level: 0,
            })
            .collect();
        let mut state = Self {
            nodes,
            services,
            clock: 0,
            rng: seeded(seed, streams::CLUSTER),
            metrics: MetricsSample::default(),
            config,
        };
        for s in 0..state.services.len() {
            for _ in 0..state.config.services[s].initial_replicas {
                let node = state
                    .place(s)
                    .ok_or_else(|| ClusterError::InvalidConfig("initial replicas do not fit the nodes".into()))?;
                state.services[s].placement.push(node);
                state.services[s].healthy.push(true);
            }
        }
        state.sample_metrics();
        Ok(state)
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn services(&self) -> &[ServiceState] {
        &self.services
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn metrics(&self) -> &MetricsSample {
        &self.metrics
    }

    pub fn leader(&self) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.alive && n.role == NodeRole::Leader).map(|n| n.id)
    }

    /// Node ids of all managers, alive or not.
    pub fn manager_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.is_manager()).map(|n| n.id).collect()
    }

    /// Hands the leader role to `leader` (which must be a manager) and demotes
    /// every other manager.
    pub fn set_leader(&mut self, leader: Option<NodeId>) {
        for n in self.nodes.iter_mut().filter(|n| n.is_manager()) {
            n.role = if Some(n.id) == leader { NodeRole::Leader } else { NodeRole::Manager };
        }
    }

    /// Allocated CPU and memory on `node`.
    pub fn allocation(&self, node: NodeId) -> (f64, f64) {
        let mut cpu = 0.0;
        let mut mem = 0.0;
        for s in &self.services {
            let k = s.placement.iter().filter(|&&p| p == node).count() as f64;
            cpu += k * s.cpu_limit;
            mem += k * s.mem_limit;
        }
        (cpu, mem)
    }

    /// Every node's allocated limits fit its capacity.
    pub fn capacity_ok(&self) -> bool {
        self.nodes.iter().all(|n| {
            let (cpu, mem) = self.allocation(n.id);
            cpu <= n.cpu_capacity + 1e-9 && mem <= n.mem_capacity + 1e-9
        })
    }

    /// Target for one more replica of `service`: the alive node with the
    /// lowest allocated CPU fraction that still has room, ties to the lowest
    /// id.
    pub fn place(&self, service: usize) -> Option<NodeId> {
        let s = &self.services[service];
        let mut best: Option<(f64, NodeId)> = None;
        for n in self.nodes.iter().filter(|n| n.alive) {
            let (cpu, mem) = self.allocation(n.id);
            if cpu + s.cpu_limit > n.cpu_capacity + 1e-9 || mem + s.mem_limit > n.mem_capacity + 1e-9 {
                continue;
            }
            let load = cpu / n.cpu_capacity;
            if best.is_none_or(|(b, _)| load < b) {
                best = Some((load, n.id));
            }
        }
        best.map(|(_, id)| id)
    }

    fn node(&self, id: NodeId) -> Result<&NodeState, ClusterError> {
        self.nodes.get(id).ok_or(ClusterError::UnknownNode(id))
    }

    /// Kills a node; its replicas stay placed but become unhealthy.
    pub fn inject_failure(&mut self, id: NodeId) -> Result<(), ClusterError> {
        self.node(id)?;
        self.kill(id);
        Ok(())
    }

    fn kill(&mut self, id: NodeId) {
        self.nodes[id].alive = false;
        for s in &mut self.services {
            for (p, h) in s.placement.iter().zip(s.healthy.iter_mut()) {
                if *p == id {
                    *h = false;
                }
            }
        }
    }

    /// Revives a node and reschedules the replicas that were stranded on it.
    /// Returns false when the node was already alive.
    pub fn recover(&mut self, id: NodeId) -> Result<bool, ClusterError> {
        if self.node(id)?.alive {
            return Ok(false);
        }
        // The revived node can always take back its own replicas.
        let placed = self.revive(id);
        debug_assert!(placed);
        Ok(true)
    }

    fn revive(&mut self, id: NodeId) -> bool {
        self.nodes[id].alive = true;
        let mut stranded = Vec::new();
        for s in &mut self.services {
            let mut i = 0;
            while i < s.placement.len() {
                if s.placement[i] == id && !s.healthy[i] {
                    s.placement.remove(i);
                    s.healthy.remove(i);
                    stranded.push(s.id);
                } else {
                    i += 1;
                }
            }
        }
        for svc in stranded {
            match self.place(svc) {
                Some(node) => {
                    self.services[svc].placement.push(node);
                    self.services[svc].healthy.push(true);
                }
                None => return false,
            }
        }
        true
    }

    /// Applies an action if it is feasible. Rejected actions leave the state
    /// untouched.
    pub fn apply_action(&mut self, action: AdaptationAction, bindings: &ActionBindings) -> ActionOutcome {
        let mut next = self.clone();
        match next.mutate(action, bindings) {
            Ok(()) if next.capacity_ok() => {
                *self = next;
                ActionOutcome::Applied
            }
            Ok(()) => ActionOutcome::Rejected(RejectReason::InsufficientCapacity),
            Err(r) => ActionOutcome::Rejected(r),
        }
    }

    /// Dry run of [`ClusterState::apply_action`].
    pub fn is_feasible(&self, action: AdaptationAction, bindings: &ActionBindings) -> Result<(), RejectReason> {
        let mut next = self.clone();
        next.mutate(action, bindings)?;
        if next.capacity_ok() {
            Ok(())
        } else {
            Err(RejectReason::InsufficientCapacity)
        }
    }

    fn mutate(&mut self, action: AdaptationAction, bindings: &ActionBindings) -> Result<(), RejectReason> {
        use AdaptationAction::*;
        if action == NoOp {
            return Ok(());
        }
        if action == AutoRecover {
            let dead: Vec<NodeId> = self.nodes.iter().filter(|n| !n.alive).map(|n| n.id).collect();
            if dead.is_empty() {
                return Err(RejectReason::NoFailedNode);
            }
            for id in dead {
                if !self.revive(id) {
                    return Err(RejectReason::InsufficientCapacity);
                }
            }
            return Ok(());
        }
        let svc = bindings.service(action).filter(|&s| s < self.services.len()).ok_or(RejectReason::AtBound)?;
        let cfg = self.config.services[svc].clone();
        let step = self.config.vertical_step;
        let cpu_b = self.config.cpu_limit_bounds;
        let mem_b = self.config.mem_limit_bounds;
        let within = |v: f64, lo: f64, hi: f64| v >= lo - 1e-9 && v <= hi + 1e-9;
        match action {
            ScaleOut => {
                if self.services[svc].replicas() >= cfg.max_replicas {
                    return Err(RejectReason::AtBound);
                }
                let node = self.place(svc).ok_or(RejectReason::InsufficientCapacity)?;
                self.services[svc].placement.push(node);
                self.services[svc].healthy.push(true);
            }
            ScaleIn => {
                if self.services[svc].replicas() <= cfg.min_replicas {
                    return Err(RejectReason::AtBound);
                }
                let victim = self.scale_in_victim(svc);
                self.remove_replica(svc, victim);
            }
            ScaleUpCpu | ScaleDownCpu => {
                let factor = if action == ScaleUpCpu { 1.0 + step } else { 1.0 - step };
                let v = self.services[svc].cpu_limit * factor;
                if !within(v, cpu_b.min, cpu_b.max) {
                    return Err(RejectReason::AtBound);
                }
                self.services[svc].cpu_limit = v;
            }
            ScaleUpMem | ScaleDownMem => {
                let factor = if action == ScaleUpMem { 1.0 + step } else { 1.0 - step };
                let v = self.services[svc].mem_limit * factor;
                if !within(v, mem_b.min, mem_b.max) {
                    return Err(RejectReason::AtBound);
                }
                self.services[svc].mem_limit = v;
            }
            ComposeSplit => {
                let s = &mut self.services[svc];
                let (cpu, mem) = (s.cpu_limit / 2.0, s.mem_limit / 2.0);
                if s.split_level >= cfg.max_split_level
                    || 2 * s.replicas() > cfg.max_replicas
                    || !within(cpu, cpu_b.min, cpu_b.max)
                    || !within(mem, mem_b.min, mem_b.max)
                {
                    return Err(RejectReason::AtBound);
                }
                // Each replica gains a twin on the same node.
                let n = s.replicas();
                for i in 0..n {
                    s.placement.push(s.placement[i]);
                    s.healthy.push(s.healthy[i]);
                }
                s.cpu_limit = cpu;
                s.mem_limit = mem;
                s.split_level += 1;
            }
            ComposeMerge => {
                let s = &self.services[svc];
                let (cpu, mem) = (s.cpu_limit * 2.0, s.mem_limit * 2.0);
                let keep = s.replicas().div_ceil(2);
                if s.split_level == 0
                    || keep < cfg.min_replicas
                    || !within(cpu, cpu_b.min, cpu_b.max)
                    || !within(mem, mem_b.min, mem_b.max)
                {
                    return Err(RejectReason::AtBound);
                }
                while self.services[svc].replicas() > keep {
                    let victim = self.scale_in_victim(svc);
                    self.remove_replica(svc, victim);
                }
                let s = &mut self.services[svc];
                s.cpu_limit = cpu;
                s.mem_limit = mem;
                s.split_level -= 1;
            }
            NoOp | AutoRecover => unreachable!(),
        }
        Ok(())
    }

    /// Replica removed by a scale-in: an unhealthy one if any, otherwise the
    /// one on the node with the highest allocated CPU fraction (ties to the
    /// highest id).
    fn scale_in_victim(&self, svc: usize) -> usize {
        let s = &self.services[svc];
        if let Some(i) = s.healthy.iter().rposition(|h| !h) {
            return i;
        }
        let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
        for (i, &node) in s.placement.iter().enumerate() {
            let load = self.allocation(node).0 / self.nodes[node].cpu_capacity;
            if load > best.0 || (load == best.0 && node >= best.1) {
                best = (load, node, i);
            }
        }
        best.2
    }

    fn remove_replica(&mut self, svc: usize, i: usize) {
        let node = self.services[svc].placement.remove(i);
        self.services[svc].healthy.remove(i);
        let n = &mut self.nodes[node];
        n.disk_used = (n.disk_used - self.config.disk_reclaim).max(0.0);
    }

    /// Advances the clock by one second: random failures, disk growth, fresh
    /// demand and a new metrics sample.
    pub fn tick(&mut self) {
        self.clock += 1;
        for id in 0..self.nodes.len() {
            let u: f64 = self.rng.random();
            if self.nodes[id].alive && u < self.config.p_fail {
                self.kill(id);
            }
        }
        let growth = self.config.disk_growth;
        for n in self.nodes.iter_mut().filter(|n| n.alive) {
            n.disk_used = (n.disk_used + growth).min(1.0);
        }
        self.sample_metrics();
    }

    fn sample_metrics(&mut self) {
        let demand: Vec<f64> = self
            .config
            .services
            .iter()
            .map(|s| s.workload.demand(self.clock, &mut self.rng))
            .collect();
        let service_util: Vec<f64> = self
            .services
            .iter()
            .zip(&demand)
            .map(|(s, &d)| {
                let alloc = s.healthy_replicas() as f64 * s.cpu_limit;
                if alloc > 0.0 {
                    (d / alloc).clamp(0.0, OVERLOAD)
                } else if d > 0.0 {
                    OVERLOAD
                } else {
                    0.0
                }
            })
            .collect();
        let mut nodes = vec![NodeMetrics::default(); self.nodes.len()];
        for (s, &u) in self.services.iter().zip(&service_util) {
            for (&p, &h) in s.placement.iter().zip(&s.healthy) {
                if !h {
                    continue;
                }
                let cpu = u * s.cpu_limit;
                let m = &mut nodes[p];
                m.cpu_util += cpu;
                m.mem_util += (cpu * self.config.mem_per_millicore).min(s.mem_limit);
                m.net_util += cpu * self.config.net_per_millicore;
            }
        }
        for (m, n) in nodes.iter_mut().zip(&self.nodes) {
            if n.alive {
                m.cpu_util = (m.cpu_util / n.cpu_capacity).clamp(0.0, OVERLOAD);
                m.mem_util = (m.mem_util / n.mem_capacity).clamp(0.0, OVERLOAD);
                m.net_util = (m.net_util / n.net_capacity).clamp(0.0, OVERLOAD);
                m.disk_util = n.disk_used.clamp(0.0, 1.0);
            } else {
                *m = NodeMetrics::default();
            }
        }
        self.metrics = MetricsSample { clock: self.clock, nodes, demand, service_util };
    }

    /// Number of replicas sitting on dead nodes.
    pub fn stranded_replicas(&self) -> usize {
        self.services
            .iter()
            .flat_map(|s| s.placement.iter())
            .filter(|&&p| !self.nodes[p].alive)
            .count()
    }

    /// Converged when every service is inside the SLO band, every replica is
    /// healthy, no dead node hosts a replica and the last action was not
    /// rejected.
    pub fn is_converged(&self, slo: &SloBand, last_rejected: bool) -> bool {
        !last_rejected
            && self.metrics.service_util.iter().all(|&u| slo.contains(u))
            && self.services.iter().all(|s| s.healthy.iter().all(|&h| h))
            && self.stranded_replicas() == 0
    }

    /// Summed distance of service utilisations outside the band.
    pub fn violation(&self, slo: &SloBand) -> f64 {
        self.metrics.service_util.iter().map(|&u| slo.violation(u)).sum()
    }

    /// Deterministic text dump of the whole state, floats in hex bit form.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "clock {}", self.clock);
        let _ = writeln!(out, "rng {:032x}", self.rng.get_word_pos());
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "node {} {:?} alive={} disk={:016x}",
                n.id,
                n.role,
                n.alive,
                n.disk_used.to_bits()
            );
        }
        for s in &self.services {
            let _ = writeln!(
                out,
                "service {} cpu={:016x} mem={:016x} level={} placement={:?} healthy={:?}",
                s.id,
                s.cpu_limit.to_bits(),
                s.mem_limit.to_bits(),
                s.split_level,
                s.placement,
                s.healthy
            );
        }
        for (i, m) in self.metrics.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "metrics node {i} {:016x} {:016x} {:016x} {:016x}",
                m.cpu_util.to_bits(),
                m.mem_util.to_bits(),
                m.disk_util.to_bits(),
                m.net_util.to_bits()
            );
        }
        for (i, (d, u)) in self.metrics.demand.iter().zip(&self.metrics.service_util).enumerate() {
            let _ = writeln!(out, "metrics service {i} demand={:016x} util={:016x}", d.to_bits(), u.to_bits());
        }
        out
    }
}
