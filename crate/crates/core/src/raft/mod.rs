//! Simplified Raft used to ratify adaptation actions.
//!
//! Managers elect a leader with randomized timeouts. The leader turns each
//! action into a ballot; followers approve it only if their log matches the
//! leader's and their local feasibility check passes. A ballot commits with a
//! majority of all configured managers. Only committed entries reach the
//! leader's log, and heartbeats carry them to followers.
//!
//! [`Peer`] is a pure state machine so tests can drive arbitrary message
//! interleavings; [`RaftGate`] runs peers over a seeded lossy [`Bus`].

mod gate;
mod message;
mod monitor;
mod peer;

pub use gate::{Feasibility, RaftGate, Ratification};
pub use message::{Bus, BusStats, Crash, Entry, Envelope, FaultProfile, Message, PeerId, ProposalId};
pub use monitor::{SafetyMonitor, Violation};
pub use peer::{quorum, Ballot, BallotOutcome, Event, Output, Peer, RaftConfig, RaftError, Role};
