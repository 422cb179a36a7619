use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::message::{Entry, Envelope, Message, PeerId, ProposalId};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaftConfig {
    pub election_timeout_min: u64,
    pub election_timeout_max: u64,
    pub heartbeat_interval: u64,
    /// Ticks a ballot may stay open before it is rejected.
    pub vote_timeout: u64,
}

impl Default for RaftConfig {
    fn default() -> Self {
        Self { election_timeout_min: 10, election_timeout_max: 20, heartbeat_interval: 3, vote_timeout: 10 }
    }
}

impl RaftConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.election_timeout_min == 0 || self.election_timeout_min > self.election_timeout_max {
            return Err("need 0 < election_timeout_min <= election_timeout_max");
        }
        if self.heartbeat_interval == 0 || self.heartbeat_interval >= self.election_timeout_min {
            return Err("heartbeat_interval must be positive and below the election timeout");
        }
        if self.vote_timeout == 0 {
            return Err("vote_timeout must be positive");
        }
        Ok(())
    }
}

/// Smallest number of approvals that commits a ballot among `n` managers.
pub fn quorum(n: usize) -> usize {
    n / 2 + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Follower,
    Candidate,
    Leader,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallotOutcome {
    Pending,
    Committed,
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ballot<A> {
    pub entry: Entry<A>,
    pub prev_len: usize,
    pub votes: BTreeMap<PeerId, bool>,
    pub outcome: BallotOutcome,
    pub opened_at: u64,
}

impl<A> Ballot<A> {
    pub fn approvals(&self) -> usize {
        self.votes.values().filter(|&&v| v).count()
    }

    pub fn denials(&self) -> usize {
        self.votes.values().filter(|&&v| !v).count()
    }

    /// Settles the outcome once it is decided. A settled outcome never changes.
    fn tally(&mut self, n: usize) {
        if self.outcome != BallotOutcome::Pending {
            return;
        }
        if self.approvals() >= quorum(n) {
            self.outcome = BallotOutcome::Committed;
        } else if self.denials() > n - quorum(n) {
            self.outcome = BallotOutcome::Rejected;
        }
    }

    fn close(&mut self) {
        if self.outcome == BallotOutcome::Pending {
            self.outcome = BallotOutcome::Rejected;
        }
    }
}

/// Observable facts checked by the safety monitor.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    BecameLeader { term: u64, peer: PeerId, log: Vec<ProposalId> },
    Granted { term: u64, voter: PeerId, candidate: PeerId },
    Committed { id: ProposalId, position: usize, approvals: usize, managers: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output<A> {
    pub messages: Vec<Envelope<A>>,
    pub events: Vec<Event>,
}

impl<A> Default for Output<A> {
    fn default() -> Self {
        Self { messages: Vec::new(), events: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RaftError {
    #[error("peer is not the leader")]
    NotLeader,
    #[error("a ballot is already open")]
    BallotPending,
    #[error("no leader elected within {0} rounds")]
    ElectionFailed(u64),
    #[error("unknown peer {0}")]
    UnknownPeer(PeerId),
}

/// One manager's replica of the consensus state machine.
#[derive(Clone, Debug, PartialEq)]
pub struct Peer<A> {
    id: PeerId,
    n: usize,
    cfg: RaftConfig,
    term: u64,
    role: Role,
    voted_for: Option<PeerId>,
    log: Vec<Entry<A>>,
    commit_len: usize,
    alive: bool,
    election_deadline: u64,
    last_heartbeat: u64,
    grants: BTreeSet<PeerId>,
    next_len: Vec<usize>,
    next_seq: u64,
    ballot: Option<Ballot<A>>,
    votes_cast: BTreeMap<ProposalId, bool>,
}

impl<A: Clone> Peer<A> {
    pub fn new(id: PeerId, n: usize, cfg: RaftConfig, now: u64, rng: &mut SimRng) -> Self {
        let mut p = Self {
            id,
            n,
            cfg,
            term: 0,
            role: Role::Follower,
            voted_for: None,
            log: Vec::new(),
            commit_len: 0,
            alive: true,
            election_deadline: 0,
            last_heartbeat: 0,
            grants: BTreeSet::new(),
            next_len: vec![0; n],
            next_seq: 0,
            ballot: None,
            votes_cast: BTreeMap::new(),
        };
        p.reset_timer(now, rng);
        p
    }

    /// Installs `leader` for `term` without an election, as at cluster start.
    pub fn bootstrap(&mut self, term: u64, leader: PeerId, now: u64) -> Output<A> {
        self.term = term;
        self.voted_for = Some(leader);
        let mut out = Output::default();
        if self.id == leader {
            self.become_leader(now, &mut out);
        }
        out
    }

    pub fn id(&self) -> PeerId {
        self.id
    }

    pub fn term(&self) -> u64 {
        self.term
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn voted_for(&self) -> Option<PeerId> {
        self.voted_for
    }

    pub fn log(&self) -> &[Entry<A>] {
        &self.log
    }

    pub fn commit_len(&self) -> usize {
        self.commit_len
    }

    pub fn ballot(&self) -> Option<&Ballot<A>> {
        self.ballot.as_ref()
    }

    pub fn last_id(&self) -> Option<ProposalId> {
        self.log.last().map(|e| e.id)
    }

    fn reset_timer(&mut self, now: u64, rng: &mut SimRng) {
        let t = rng.random_range(self.cfg.election_timeout_min..=self.cfg.election_timeout_max);
        self.election_deadline = now + t;
    }

    fn send(&self, out: &mut Output<A>, to: PeerId, msg: Message<A>) {
        out.messages.push(Envelope { from: self.id, to, msg });
    }

    fn others(&self) -> impl Iterator<Item = PeerId> + use<A> {
        let me = self.id;
        (0..self.n).filter(move |&p| p != me)
    }

    fn step_down(&mut self, term: u64) {
        if term > self.term {
            self.term = term;
            self.voted_for = None;
        }
        self.role = Role::Follower;
        self.grants.clear();
        if let Some(b) = &mut self.ballot {
            b.close();
        }
    }

    fn become_leader(&mut self, now: u64, out: &mut Output<A>) {
        self.role = Role::Leader;
        self.grants.clear();
        self.next_seq = 0;
        self.next_len = vec![self.log.len(); self.n];
        // Everything inherited is treated as committed from here on.
        self.commit_len = self.log.len();
        out.events.push(Event::BecameLeader {
            term: self.term,
            peer: self.id,
            log: self.log.iter().map(|e| e.id).collect(),
        });
        self.broadcast_heartbeat(now, out);
    }

    fn broadcast_heartbeat(&mut self, now: u64, out: &mut Output<A>) {
        self.last_heartbeat = now;
        for to in self.others() {
            let prev_len = self.next_len[to].min(self.log.len());
            let msg = Message::Heartbeat {
                term: self.term,
                prev_len,
                prev_id: prev_len.checked_sub(1).map(|i| self.log[i].id),
                entries: self.log[prev_len..].to_vec(),
                commit_len: self.commit_len,
            };
            self.send(out, to, msg);
        }
    }

    fn start_election(&mut self, now: u64, rng: &mut SimRng, out: &mut Output<A>) {
        self.term += 1;
        self.role = Role::Candidate;
        self.voted_for = Some(self.id);
        self.grants = BTreeSet::from([self.id]);
        self.reset_timer(now, rng);
        out.events.push(Event::Granted { term: self.term, voter: self.id, candidate: self.id });
        if self.grants.len() >= quorum(self.n) {
            self.become_leader(now, out);
            return;
        }
        let msg = Message::VoteRequest { term: self.term, last_id: self.last_id() };
        for to in self.others() {
            self.send(out, to, msg.clone());
        }
    }

    /// Timer-driven work: heartbeats, ballot expiry and election timeouts.
    pub fn on_tick(&mut self, now: u64, rng: &mut SimRng) -> Output<A> {
        let mut out = Output::default();
        if !self.alive {
            return out;
        }
        match self.role {
            Role::Leader => {
                if let Some(b) = &mut self.ballot {
                    if b.outcome == BallotOutcome::Pending && now >= b.opened_at + self.cfg.vote_timeout {
                        b.close();
                    }
                }
                if now >= self.last_heartbeat + self.cfg.heartbeat_interval {
                    self.broadcast_heartbeat(now, &mut out);
                }
            }
            Role::Follower | Role::Candidate => {
                if now >= self.election_deadline {
                    self.start_election(now, rng, &mut out);
                }
            }
        }
        out
    }

    /// Opens a ballot on `action`; the leader casts its own vote immediately.
    pub fn propose(&mut self, now: u64, action: A, feasible: bool) -> Result<(ProposalId, Output<A>), RaftError> {
        if !self.alive || self.role != Role::Leader {
            return Err(RaftError::NotLeader);
        }
        if self.ballot.as_ref().is_some_and(|b| b.outcome == BallotOutcome::Pending) {
            return Err(RaftError::BallotPending);
        }
        let id = ProposalId { term: self.term, seq: self.next_seq };
        self.next_seq += 1;
        let entry = Entry { id, action };
        let prev_len = self.log.len();
        let prev_id = self.last_id();
        let mut out = Output::default();
        for to in self.others() {
            let msg = Message::Propose { term: self.term, entry: entry.clone(), prev_len, prev_id };
            self.send(&mut out, to, msg);
        }
        self.ballot = Some(Ballot { entry, prev_len, votes: BTreeMap::new(), outcome: BallotOutcome::Pending, opened_at: now });
        self.votes_cast.insert(id, feasible);
        self.record_vote(self.id, id, feasible, &mut out);
        Ok((id, out))
    }

    fn record_vote(&mut self, voter: PeerId, id: ProposalId, approve: bool, out: &mut Output<A>) {
        let n = self.n;
        let Some(b) = &mut self.ballot else { return };
        if b.entry.id != id || b.outcome != BallotOutcome::Pending {
            return;
        }
        b.votes.entry(voter).or_insert(approve);
        b.tally(n);
        if b.outcome == BallotOutcome::Committed {
            let position = self.log.len();
            debug_assert_eq!(position, b.prev_len);
            let approvals = b.approvals();
            self.log.push(b.entry.clone());
            self.commit_len = self.log.len();
            out.events.push(Event::Committed { id, position, approvals, managers: n });
        }
    }

    fn consistent(&self, prev_len: usize, prev_id: Option<ProposalId>) -> bool {
        self.log.len() >= prev_len && prev_len.checked_sub(1).map(|i| self.log[i].id) == prev_id
    }

    /// Handles one delivered message. `feasible` answers this peer's local
    /// check of a proposed action.
    pub fn handle(
        &mut self,
        now: u64,
        from: PeerId,
        msg: Message<A>,
        feasible: &mut dyn FnMut(PeerId, &A) -> bool,
        rng: &mut SimRng,
    ) -> Output<A> {
        let mut out = Output::default();
        if !self.alive {
            return out;
        }
        if msg.term() > self.term {
            self.step_down(msg.term());
        }
        match msg {
            Message::VoteRequest { term, last_id } => {
                let free = self.voted_for.is_none_or(|v| v == from);
                if term == self.term && self.role == Role::Follower && free && last_id >= self.last_id() {
                    self.voted_for = Some(from);
                    self.reset_timer(now, rng);
                    out.events.push(Event::Granted { term, voter: self.id, candidate: from });
                    self.send(&mut out, from, Message::VoteGrant { term });
                }
            }
            Message::VoteGrant { term } => {
                if term == self.term && self.role == Role::Candidate {
                    self.grants.insert(from);
                    if self.grants.len() >= quorum(self.n) {
                        self.become_leader(now, &mut out);
                    }
                }
            }
            Message::Propose { term, entry, prev_len, prev_id } => {
                let id = entry.id;
                if term < self.term {
                    self.send(&mut out, from, Message::Vote { term: self.term, proposal: id, approve: false });
                    return out;
                }
                if self.role == Role::Leader {
                    return out;
                }
                self.role = Role::Follower;
                self.reset_timer(now, rng);
                let approve = match self.votes_cast.get(&id) {
                    Some(&v) => v,
                    None => {
                        let ok = self.consistent(prev_len, prev_id) && feasible(self.id, &entry.action);
                        if ok && self.log.get(prev_len).map(|e| e.id) != Some(id) {
                            self.log.truncate(prev_len);
                            self.log.push(entry);
                        }
                        self.votes_cast.insert(id, ok);
                        ok
                    }
                };
                self.send(&mut out, from, Message::Vote { term: self.term, proposal: id, approve });
            }
            Message::Vote { term, proposal, approve } => {
                if term == self.term && self.role == Role::Leader {
                    self.record_vote(from, proposal, approve, &mut out);
                }
            }
            Message::Heartbeat { term, prev_len, prev_id, entries, commit_len } => {
                if term < self.term {
                    let ack = Message::HeartbeatAck { term: self.term, success: false, log_len: self.log.len() };
                    self.send(&mut out, from, ack);
                    return out;
                }
                if self.role == Role::Leader {
                    return out;
                }
                self.role = Role::Follower;
                self.reset_timer(now, rng);
                if !self.consistent(prev_len, prev_id) {
                    let ack = Message::HeartbeatAck { term, success: false, log_len: self.log.len() };
                    self.send(&mut out, from, ack);
                    return out;
                }
                // Only a conflicting entry truncates; a longer tail is kept.
                let end = prev_len + entries.len();
                for (k, e) in entries.into_iter().enumerate() {
                    let at = prev_len + k;
                    match self.log.get(at) {
                        Some(mine) if mine.id == e.id => {}
                        _ => {
                            self.log.truncate(at);
                            self.log.push(e);
                        }
                    }
                }
                self.commit_len = self.commit_len.max(commit_len.min(end));
                self.send(&mut out, from, Message::HeartbeatAck { term, success: true, log_len: end });
            }
            Message::HeartbeatAck { term, success, log_len } => {
                if term == self.term && self.role == Role::Leader {
                    self.next_len[from] = if success {
                        log_len
                    } else {
                        self.next_len[from].saturating_sub(1).min(log_len)
                    };
                }
            }
        }
        out
    }

    /// Closes an open ballot as rejected.
    pub fn abandon_ballot(&mut self) {
        if let Some(b) = &mut self.ballot {
            b.close();
        }
    }

    /// Stops the peer. Term, vote and log survive, as if persisted.
    pub fn crash(&mut self) {
        self.alive = false;
        self.role = Role::Follower;
        self.grants.clear();
        if let Some(b) = &mut self.ballot {
            b.close();
        }
    }

    pub fn restart(&mut self, now: u64, rng: &mut SimRng) {
        if !self.alive {
            self.alive = true;
            self.reset_timer(now, rng);
        }
    }
}
