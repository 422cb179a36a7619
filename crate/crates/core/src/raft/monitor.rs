use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::message::{PeerId, ProposalId};
use super::peer::{quorum, Event};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Two peers led the same term.
    ElectionSafety { term: u64, first: PeerId, second: PeerId },
    /// A new leader's log lacks a committed entry.
    CommitSafety { leader: PeerId, term: u64, missing: ProposalId, position: usize },
    /// A voter granted two candidates in one term.
    VoteUniqueness { term: u64, voter: PeerId },
    /// A ballot committed without a quorum.
    MajorityRule { id: ProposalId, approvals: usize, managers: usize },
}

/// Checks the global safety properties over the event stream of all peers.
#[derive(Clone, Debug, Default)]
pub struct SafetyMonitor {
    leaders: BTreeMap<u64, PeerId>,
    grants: BTreeMap<(u64, PeerId), PeerId>,
    committed: BTreeMap<usize, ProposalId>,
    violations: Vec<Violation>,
}

impl SafetyMonitor {
    pub fn observe(&mut self, event: &Event) {
        match event {
            &Event::BecameLeader { term, peer, ref log } => {
                if let Some(&first) = self.leaders.get(&term) {
                    if first != peer {
                        self.violations.push(Violation::ElectionSafety { term, first, second: peer });
                    }
                }
                self.leaders.insert(term, peer);
                for (&position, &id) in &self.committed {
                    if log.get(position) != Some(&id) {
                        self.violations.push(Violation::CommitSafety { leader: peer, term, missing: id, position });
                    }
                }
            }
            &Event::Granted { term, voter, candidate } => {
                if let Some(&prev) = self.grants.get(&(term, voter)) {
                    if prev != candidate {
                        self.violations.push(Violation::VoteUniqueness { term, voter });
                    }
                } else {
                    self.grants.insert((term, voter), candidate);
                }
            }
            &Event::Committed { id, position, approvals, managers } => {
                if approvals < quorum(managers) {
                    self.violations.push(Violation::MajorityRule { id, approvals, managers });
                }
                if let Some(&other) = self.committed.get(&position) {
                    if other != id {
                        self.violations.push(Violation::CommitSafety { leader: usize::MAX, term: id.term, missing: other, position });
                    }
                }
                self.committed.insert(position, id);
            }
        }
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn is_safe(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn leaders_by_term(&self) -> &BTreeMap<u64, PeerId> {
        &self.leaders
    }

    pub fn committed(&self) -> &BTreeMap<usize, ProposalId> {
        &self.committed
    }
}
