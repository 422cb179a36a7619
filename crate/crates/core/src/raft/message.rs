use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::SimRng;

pub type PeerId = usize;

/// Identity of a log entry: the proposing leader's term and a per-term
/// sequence number. Ordered lexicographically, which is also the log
/// freshness order used by elections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProposalId {
    pub term: u64,
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry<A> {
    pub id: ProposalId,
    pub action: A,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Message<A> {
    VoteRequest { term: u64, last_id: Option<ProposalId> },
    VoteGrant { term: u64 },
    Propose { term: u64, entry: Entry<A>, prev_len: usize, prev_id: Option<ProposalId> },
    Vote { term: u64, proposal: ProposalId, approve: bool },
    Heartbeat { term: u64, prev_len: usize, prev_id: Option<ProposalId>, entries: Vec<Entry<A>>, commit_len: usize },
    HeartbeatAck { term: u64, success: bool, log_len: usize },
}

impl<A> Message<A> {
    pub fn term(&self) -> u64 {
        match *self {
            Message::VoteRequest { term, .. }
            | Message::VoteGrant { term }
            | Message::Propose { term, .. }
            | Message::Vote { term, .. }
            | Message::Heartbeat { term, .. }
            | Message::HeartbeatAck { term, .. } => term,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Message::VoteRequest { .. } => "vote_request",
            Message::VoteGrant { .. } => "vote_grant",
            Message::Propose { .. } => "propose",
            Message::Vote { .. } => "vote",
            Message::Heartbeat { .. } => "heartbeat",
            Message::HeartbeatAck { .. } => "heartbeat_ack",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope<A> {
    pub from: PeerId,
    pub to: PeerId,
    pub msg: Message<A>,
}

/// A scheduled crash; `restart_after` ticks later the peer comes back with
/// its term, vote and log intact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crash {
    pub tick: u64,
    pub node: usize,
    #[serde(default)]
    pub restart_after: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultProfile {
    pub drop_prob: f64,
    pub delay_min: u64,
    pub delay_max: u64,
    pub crashes: Vec<Crash>,
}

impl FaultProfile {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err("drop_prob must lie in [0, 1]");
        }
        if self.delay_min > self.delay_max {
            return Err("delay_min exceeds delay_max");
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Queued<A> {
    deliver_at: u64,
    seq: u64,
    env: Envelope<A>,
}

impl<A> PartialEq for Queued<A> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl<A> Eq for Queued<A> {}
impl<A> PartialOrd for Queued<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<A> Ord for Queued<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}
impl<A> Queued<A> {
    fn key(&self) -> (u64, u64) {
        (self.deliver_at, self.seq)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BusStats {
    pub sent: u64,
    pub dropped: u64,
    pub delivered: u64,
}

/// Message bus with seeded drops and delays. Drop and delay are decided when
/// a message is sent; delivery is ordered by (due tick, send order).
#[derive(Debug)]
pub struct Bus<A> {
    queue: BinaryHeap<Reverse<Queued<A>>>,
    next_seq: u64,
    stats: BusStats,
}

impl<A> Default for Bus<A> {
    fn default() -> Self {
        Self { queue: BinaryHeap::new(), next_seq: 0, stats: BusStats::default() }
    }
}

impl<A> Bus<A> {
    pub fn send(&mut self, env: Envelope<A>, now: u64, faults: &FaultProfile, rng: &mut SimRng) {
        self.stats.sent += 1;
        let drop: f64 = rng.random();
        let delay = if faults.delay_max > faults.delay_min {
            rng.random_range(faults.delay_min..=faults.delay_max)
        } else {
            faults.delay_min
        };
        if drop < faults.drop_prob {
            self.stats.dropped += 1;
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Queued { deliver_at: now + delay, seq, env }));
    }

    /// Next message due at or before `now`.
    pub fn pop_due(&mut self, now: u64) -> Option<Envelope<A>> {
        if self.queue.peek().is_some_and(|Reverse(q)| q.deliver_at <= now) {
            self.stats.delivered += 1;
            self.queue.pop().map(|Reverse(q)| q.env)
        } else {
            None
        }
    }

    /// Drains every message due by `now`, in delivery order.
    pub fn step_bus(&mut self, now: u64) -> Vec<Envelope<A>> {
        core::iter::from_fn(|| self.pop_due(now)).collect()
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn stats(&self) -> BusStats {
        self.stats
    }
}
