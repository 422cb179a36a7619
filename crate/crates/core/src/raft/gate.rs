use alloc::vec::Vec;

use super::message::{Bus, BusStats, Envelope, FaultProfile, PeerId, ProposalId};
use super::monitor::SafetyMonitor;
use super::peer::{BallotOutcome, Output, Peer, RaftConfig, RaftError, Role};
use crate::rng::{seeded, streams, SimRng};

/// Local feasibility check a manager applies before approving an action.
pub trait Feasibility<A> {
    fn feasible(&mut self, voter: PeerId, action: &A) -> bool;
}

impl<A, F: FnMut(PeerId, &A) -> bool> Feasibility<A> for F {
    fn feasible(&mut self, voter: PeerId, action: &A) -> bool {
        self(voter, action)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ratification {
    Committed(ProposalId),
    Rejected(ProposalId),
    NoLeader,
}

/// Upper bound on same-tick delivery rounds, guarding zero-delay loops.
const MAX_DELIVERIES_PER_TICK: usize = 10_000;

/// A cluster of managers, their bus and a safety monitor, stepped one tick
/// at a time.
#[derive(Debug)]
pub struct RaftGate<A> {
    peers: Vec<Peer<A>>,
    bus: Bus<A>,
    cfg: RaftConfig,
    faults: FaultProfile,
    rng: SimRng,
    now: u64,
    monitor: SafetyMonitor,
    restarts: Vec<(u64, PeerId)>,
}

impl<A: Clone> RaftGate<A> {
    /// `n` managers with peer 0 leading term 1.
    pub fn new(n: usize, cfg: RaftConfig, faults: FaultProfile, seed: u64) -> Self {
        assert!(n > 0, "raft gate needs at least one manager");
        let mut rng = seeded(seed, streams::RAFT);
        let peers = (0..n).map(|id| Peer::new(id, n, cfg, 0, &mut rng)).collect();
        let mut gate = Self {
            peers,
            bus: Bus::default(),
            cfg,
            faults,
            rng,
            now: 0,
            monitor: SafetyMonitor::default(),
            restarts: Vec::new(),
        };
        for i in 0..n {
            let out = gate.peers[i].bootstrap(1, 0, 0);
            gate.dispatch(out);
        }
        gate
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn peers(&self) -> &[Peer<A>] {
        &self.peers
    }

    pub fn monitor(&self) -> &SafetyMonitor {
        &self.monitor
    }

    pub fn bus_stats(&self) -> BusStats {
        self.bus.stats()
    }

    pub fn config(&self) -> &RaftConfig {
        &self.cfg
    }

    /// The alive leader with the highest term, if any.
    pub fn leader(&self) -> Option<PeerId> {
        self.peers
            .iter()
            .filter(|p| p.is_alive() && p.role() == Role::Leader)
            .max_by_key(|p| p.term())
            .map(|p| p.id())
    }

    pub fn max_term(&self) -> u64 {
        self.peers.iter().map(|p| p.term()).max().unwrap_or(0)
    }

    fn dispatch(&mut self, out: Output<A>) {
        for e in &out.events {
            self.monitor.observe(e);
        }
        for env in out.messages {
            self.bus.send(env, self.now, &self.faults, &mut self.rng);
        }
    }

    pub fn crash(&mut self, peer: PeerId) -> Result<(), RaftError> {
        self.peers.get_mut(peer).ok_or(RaftError::UnknownPeer(peer))?.crash();
        Ok(())
    }

    pub fn restart(&mut self, peer: PeerId) -> Result<(), RaftError> {
        let now = self.now;
        let p = self.peers.get_mut(peer).ok_or(RaftError::UnknownPeer(peer))?;
        p.restart(now, &mut self.rng);
        Ok(())
    }

    pub fn set_alive(&mut self, peer: PeerId, alive: bool) -> Result<(), RaftError> {
        match (self.peers.get(peer).map(|p| p.is_alive()), alive) {
            (None, _) => Err(RaftError::UnknownPeer(peer)),
            (Some(true), false) => self.crash(peer),
            (Some(false), true) => self.restart(peer),
            _ => Ok(()),
        }
    }

    /// Advances one tick: scheduled crashes, timers, then every due message.
    pub fn tick(&mut self, feas: &mut dyn Feasibility<A>) {
        self.now += 1;
        let now = self.now;
        let crashes: Vec<_> = self.faults.crashes.iter().filter(|c| c.tick == now).copied().collect();
        for c in crashes {
            if c.node < self.peers.len() {
                self.peers[c.node].crash();
                if let Some(d) = c.restart_after {
                    self.restarts.push((now + d, c.node));
                }
            }
        }
        let due: Vec<PeerId> = self.restarts.iter().filter(|(t, _)| *t == now).map(|&(_, p)| p).collect();
        self.restarts.retain(|(t, _)| *t != now);
        for p in due {
            self.peers[p].restart(now, &mut self.rng);
        }
        for i in 0..self.peers.len() {
            let out = self.peers[i].on_tick(now, &mut self.rng);
            self.dispatch(out);
        }
        let mut delivered = 0;
        while let Some(env) = self.bus.pop_due(now) {
            self.deliver(env, feas);
            delivered += 1;
            if delivered >= MAX_DELIVERIES_PER_TICK {
                break;
            }
        }
    }

    fn deliver(&mut self, env: Envelope<A>, feas: &mut dyn Feasibility<A>) {
        let Envelope { from, to, msg } = env;
        let Some(peer) = self.peers.get_mut(to) else { return };
        let mut check = |voter: PeerId, a: &A| feas.feasible(voter, a);
        let out = peer.handle(self.now, from, msg, &mut check, &mut self.rng);
        self.dispatch(out);
    }

    /// Ticks until some peer leads. Fails once the highest term has advanced
    /// by more than `max_rounds` without a leader.
    pub fn run_election(&mut self, max_rounds: u64, feas: &mut dyn Feasibility<A>) -> Result<(PeerId, u64), RaftError> {
        let start = self.max_term();
        loop {
            if let Some(l) = self.leader() {
                return Ok((l, self.peers[l].term()));
            }
            if self.max_term() > start + max_rounds || self.peers.iter().all(|p| !p.is_alive()) {
                return Err(RaftError::ElectionFailed(max_rounds));
            }
            self.tick(feas);
        }
    }

    /// Puts `action` to a vote and ticks until the ballot settles or
    /// `budget` ticks pass. Without a leader the budget is spent waiting for
    /// an election first.
    pub fn ratify(&mut self, action: A, feas: &mut dyn Feasibility<A>, budget: u64) -> Ratification {
        let deadline = self.now + budget;
        let leader = loop {
            if let Some(l) = self.leader() {
                break l;
            }
            if self.now >= deadline {
                return Ratification::NoLeader;
            }
            self.tick(feas);
        };
        let own = feas.feasible(leader, &action);
        let now = self.now;
        let (id, out) = match self.peers[leader].propose(now, action, own) {
            Ok(v) => v,
            Err(_) => return Ratification::NoLeader,
        };
        self.dispatch(out);
        loop {
            let outcome = self.peers[leader].ballot().filter(|b| b.entry.id == id).map(|b| b.outcome);
            match outcome {
                Some(BallotOutcome::Committed) => return Ratification::Committed(id),
                Some(BallotOutcome::Rejected) | None => return Ratification::Rejected(id),
                Some(BallotOutcome::Pending) if self.now >= deadline => {
                    self.peers[leader].abandon_ballot();
                    return Ratification::Rejected(id);
                }
                Some(BallotOutcome::Pending) => self.tick(feas),
            }
        }
    }
}
