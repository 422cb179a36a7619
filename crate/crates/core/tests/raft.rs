use adapt_swarm_core::raft::{
    quorum, BallotOutcome, Bus, Crash, Envelope, Event, FaultProfile, Message, Peer, PeerId, ProposalId, RaftConfig,
    RaftError, RaftGate, Ratification, Role, SafetyMonitor, Violation,
};
use adapt_swarm_core::rng::{seeded, SimRng};
use rand::Rng;

fn yes(_: PeerId, _: &u8) -> bool {
    true
}

fn gate(n: usize, faults: FaultProfile, seed: u64) -> RaftGate<u8> {
    RaftGate::new(n, RaftConfig::default(), faults, seed)
}

/// Three peers with peer 0 leading term 1.
fn trio(rng: &mut SimRng) -> Vec<Peer<u8>> {
    let cfg = RaftConfig::default();
    let mut peers: Vec<Peer<u8>> = (0..3).map(|i| Peer::new(i, 3, cfg, 0, rng)).collect();
    for p in &mut peers {
        p.bootstrap(1, 0, 0);
    }
    peers
}

#[test]
fn quorum_is_a_strict_majority_of_all_managers() {
    assert_eq!(quorum(1), 1);
    assert_eq!(quorum(3), 2);
    assert_eq!(quorum(4), 3);
    assert_eq!(quorum(5), 3);
}

#[test]
fn proposal_goes_to_every_follower() {
    let mut rng = seeded(0, 0);
    let mut peers = trio(&mut rng);
    let (id, out) = peers[0].propose(0, 7, true).unwrap();
    assert_eq!(id, ProposalId { term: 1, seq: 0 });
    let targets: Vec<PeerId> = out
        .messages
        .iter()
        .filter(|e| matches!(e.msg, Message::Propose { .. }))
        .map(|e| e.to)
        .collect();
    assert_eq!(targets, vec![1, 2]);
    assert_eq!(peers[1].propose(0, 7, true).unwrap_err(), RaftError::NotLeader);
}

#[test]
fn second_proposal_waits_for_the_open_ballot() {
    let mut rng = seeded(0, 0);
    let mut peers = trio(&mut rng);
    peers[0].propose(0, 1, true).unwrap();
    assert_eq!(peers[0].propose(0, 2, true).unwrap_err(), RaftError::BallotPending);
}

#[test]
fn stale_leader_is_denied_and_steps_down() {
    let mut rng = seeded(1, 0);
    let mut peers = trio(&mut rng);
    // Follower 1 learns of term 5 through a vote request from peer 2.
    let req = Message::VoteRequest { term: 5, last_id: None };
    peers[1].handle(1, 2, req, &mut yes, &mut rng);
    assert_eq!(peers[1].term(), 5);

    let (id, out) = peers[0].propose(2, 9, true).unwrap();
    let to1 = out.messages.into_iter().find(|e| e.to == 1).unwrap();
    let reply = peers[1].handle(2, 0, to1.msg, &mut yes, &mut rng);
    let vote = reply.messages.into_iter().next().unwrap();
    assert_eq!(vote.msg, Message::Vote { term: 5, proposal: id, approve: false });
    peers[0].handle(3, 1, vote.msg, &mut yes, &mut rng);
    assert_eq!(peers[0].role(), Role::Follower);
    assert_eq!(peers[0].term(), 5);
    assert_eq!(peers[0].propose(3, 1, true).unwrap_err(), RaftError::NotLeader);
}

#[test]
fn votes_follow_feasibility_and_first_vote_stands() {
    let mut rng = seeded(2, 0);
    let mut peers = trio(&mut rng);
    let (id, out) = peers[0].propose(0, 3, true).unwrap();
    let msg = out.messages.iter().find(|e| e.to == 1).unwrap().msg.clone();

    let approve = peers[1].handle(1, 0, msg.clone(), &mut yes, &mut rng);
    assert_eq!(approve.messages[0].msg, Message::Vote { term: 1, proposal: id, approve: true });
    // Redelivery with a now-infeasible view still answers with the first vote.
    let mut no = |_: PeerId, _: &u8| false;
    let again = peers[1].handle(2, 0, msg.clone(), &mut no, &mut rng);
    assert_eq!(again.messages[0].msg, Message::Vote { term: 1, proposal: id, approve: true });

    let deny = peers[2].handle(1, 0, msg, &mut no, &mut rng);
    assert_eq!(deny.messages[0].msg, Message::Vote { term: 1, proposal: id, approve: false });
}

#[test]
fn tally_follows_majority_of_configured_managers() {
    let cases: [(usize, &[PeerId], bool); 5] =
        [(3, &[0, 1], true), (3, &[0], false), (5, &[0, 1, 2], true), (5, &[0, 1], false), (5, &[0, 3, 4], true)];
    for (n, approvers, committed) in cases {
        let mut g = gate(n, FaultProfile::default(), 4);
        let mut feas = |voter: PeerId, _: &u8| approvers.contains(&voter);
        let r = g.ratify(1, &mut feas, 20);
        assert_eq!(matches!(r, Ratification::Committed(_)), committed, "n={n} approvers={approvers:?}");
        assert!(g.monitor().is_safe());
    }
}

#[test]
fn commit_requires_a_majority_even_when_managers_are_down() {
    let mut g = gate(5, FaultProfile::default(), 0);
    g.crash(3).unwrap();
    g.crash(4).unwrap();
    let mut feas = |v: PeerId, _: &u8| v != 2;
    assert!(matches!(g.ratify(1, &mut feas, 30), Ratification::Rejected(_)));
    let mut all = yes;
    assert!(matches!(g.ratify(1, &mut all, 30), Ratification::Committed(_)));
}

#[test]
fn committed_entry_is_replicated_by_heartbeats() {
    let mut g = gate(3, FaultProfile::default(), 5);
    let mut feas = yes;
    let Ratification::Committed(id) = g.ratify(4, &mut feas, 20) else { panic!("not committed") };
    for _ in 0..10 {
        g.tick(&mut feas);
    }
    for p in g.peers() {
        assert_eq!(p.log().first().map(|e| e.id), Some(id));
        assert_eq!(p.commit_len(), 1);
    }
}

#[test]
fn killed_leader_is_replaced_by_a_survivor() {
    for seed in 0..20 {
        let mut g = gate(3, FaultProfile::default(), seed);
        let mut feas = yes;
        g.crash(0).unwrap();
        let (leader, term) = g.run_election(100, &mut feas).unwrap();
        assert!(leader == 1 || leader == 2);
        assert!(term > 1);
        assert!(g.monitor().is_safe());
    }
}

#[test]
fn no_majority_means_election_failed() {
    let mut g = gate(3, FaultProfile::default(), 0);
    let mut feas = yes;
    g.crash(0).unwrap();
    g.crash(1).unwrap();
    assert_eq!(g.run_election(100, &mut feas).unwrap_err(), RaftError::ElectionFailed(100));
    assert_eq!(g.leader(), None);
}

#[test]
fn lossless_bus_delivers_everything_in_delay_order() {
    let mut bus: Bus<u8> = Bus::default();
    let mut rng = seeded(3, 0);
    let faults = FaultProfile { drop_prob: 0.0, delay_min: 0, delay_max: 5, ..FaultProfile::default() };
    for k in 0..50u64 {
        let env = Envelope { from: 0, to: 1, msg: Message::VoteGrant { term: k } };
        bus.send(env, 0, &faults, &mut rng);
    }
    let mut got = Vec::new();
    for now in 0..=5 {
        got.extend(bus.step_bus(now).into_iter().map(|e| (now, e.msg.term())));
    }
    assert_eq!(got.len(), 50);
    assert_eq!(bus.stats().dropped, 0);
    assert!(got.windows(2).all(|w| w[0].0 <= w[1].0));
}

#[test]
fn lossy_bus_delivers_nothing_and_elections_fire() {
    let faults = FaultProfile { drop_prob: 1.0, ..FaultProfile::default() };
    let mut g = gate(3, faults, 8);
    let mut feas = yes;
    for _ in 0..100 {
        g.tick(&mut feas);
    }
    assert_eq!(g.bus_stats().delivered, 0);
    assert!(g.bus_stats().sent > 0);
    assert!(g.max_term() > 1);
    assert!(g.monitor().is_safe());
}

#[test]
fn fixed_seed_gives_identical_schedules() {
    let run = |seed| {
        let faults = FaultProfile { drop_prob: 0.2, delay_min: 0, delay_max: 3, ..FaultProfile::default() };
        let mut g = gate(5, faults, seed);
        let mut feas = yes;
        let mut trace = Vec::new();
        for k in 0..30u8 {
            trace.push(format!("{:?}", g.ratify(k, &mut feas, 15)));
            trace.push(format!("{:?} {}", g.leader(), g.max_term()));
        }
        (trace, g.bus_stats())
    };
    assert_eq!(run(11), run(11));
}

#[test]
fn monitor_flags_each_kind_of_violation() {
    let mut m = SafetyMonitor::default();
    m.observe(&Event::BecameLeader { term: 2, peer: 0, log: vec![] });
    m.observe(&Event::BecameLeader { term: 2, peer: 1, log: vec![] });
    assert!(matches!(m.violations()[0], Violation::ElectionSafety { term: 2, .. }));

    let mut m = SafetyMonitor::default();
    let id = ProposalId { term: 1, seq: 0 };
    m.observe(&Event::Committed { id, position: 0, approvals: 2, managers: 3 });
    m.observe(&Event::BecameLeader { term: 3, peer: 2, log: vec![] });
    assert!(matches!(m.violations()[0], Violation::CommitSafety { .. }));

    let mut m = SafetyMonitor::default();
    m.observe(&Event::Granted { term: 4, voter: 1, candidate: 0 });
    m.observe(&Event::Granted { term: 4, voter: 1, candidate: 2 });
    assert!(matches!(m.violations()[0], Violation::VoteUniqueness { .. }));

    let mut m = SafetyMonitor::default();
    m.observe(&Event::Committed { id, position: 0, approvals: 2, managers: 5 });
    assert!(matches!(m.violations()[0], Violation::MajorityRule { .. }));
}

/// Exhaustive search over delivery orders of a three-peer cluster in which
/// peers 1 and 2 time out together while the old leader 0 is still up.
#[derive(Clone)]
struct World {
    peers: Vec<Peer<u8>>,
    inflight: Vec<Envelope<u8>>,
    monitor: SafetyMonitor,
    rng: SimRng,
}

fn explore(w: World, depth: usize, stats: &mut (usize, usize)) {
    if w.inflight.is_empty() || depth == 0 {
        stats.0 += 1;
        let winners: Vec<PeerId> = w.peers.iter().filter(|p| p.role() == Role::Leader && p.term() == 2).map(|p| p.id()).collect();
        assert!(winners.len() <= 1, "two leaders in term 2");
        if w.inflight.is_empty() {
            assert_eq!(winners.len(), 1, "a complete delivery must elect someone");
            stats.1 += 1;
        }
        return;
    }
    for i in 0..w.inflight.len() {
        let mut next = w.clone();
        let env = next.inflight.remove(i);
        let out = next.peers[env.to].handle(1, env.from, env.msg, &mut yes, &mut next.rng);
        for e in &out.events {
            next.monitor.observe(e);
        }
        assert!(next.monitor.is_safe(), "{:?}", next.monitor.violations());
        next.inflight.extend(out.messages);
        explore(next, depth - 1, stats);
    }
}

#[test]
fn simultaneous_candidates_elect_exactly_one_leader_in_every_interleaving() {
    let mut rng = seeded(6, 0);
    let mut peers = trio(&mut rng);
    let mut monitor = SafetyMonitor::default();
    let mut inflight = Vec::new();
    for i in [1, 2] {
        let out = peers[i].on_tick(1_000, &mut rng);
        assert_eq!(peers[i].role(), Role::Candidate);
        for e in &out.events {
            monitor.observe(e);
        }
        inflight.extend(out.messages);
    }
    assert_eq!(inflight.len(), 4);
    let mut stats = (0, 0);
    explore(World { peers, inflight, monitor, rng }, 12, &mut stats);
    assert!(stats.1 > 0);
}

#[test]
fn safety_holds_across_seeded_fault_runs() {
    let mut elections = 0;
    let mut commits = 0;
    for run in 0..200u64 {
        let mut rng = seeded(run, 77);
        let n = if run % 2 == 0 { 3 } else { 5 };
        let faults = FaultProfile {
            drop_prob: rng.random_range(0.0..0.3),
            delay_min: 0,
            delay_max: rng.random_range(0..4),
            crashes: vec![Crash { tick: rng.random_range(5..40), node: 0, restart_after: Some(rng.random_range(5..30)) }],
        };
        let mut g = gate(n, faults, run);
        let mut feas = |v: PeerId, a: &u8| (v + *a as usize) % 4 != 0;
        for k in 0..40u8 {
            if k % 10 == 9 {
                if let Some(l) = g.leader() {
                    g.crash(l).unwrap();
                }
            }
            if let Ratification::Committed(_) = g.ratify(k, &mut feas, 15) {
                commits += 1;
            }
            if k % 10 == 2 {
                for p in 0..n {
                    g.restart(p).unwrap();
                }
            }
        }
        assert!(g.monitor().is_safe(), "run {run}: {:?}", g.monitor().violations());
        elections += g.monitor().leaders_by_term().len();
        if let Some(l) = g.leader() {
            for (&pos, &id) in g.monitor().committed() {
                assert_eq!(g.peers()[l].log().get(pos).map(|e| e.id), Some(id), "run {run}");
            }
        }
    }
    assert!(elections > 400, "too few elections exercised: {elections}");
    assert!(commits > 1000, "too few commits exercised: {commits}");
}

#[test]
fn open_ballot_settles_once() {
    let mut rng = seeded(9, 0);
    let mut peers = trio(&mut rng);
    let (id, _) = peers[0].propose(0, 1, true).unwrap();
    let approve = Message::Vote { term: 1, proposal: id, approve: true };
    peers[0].handle(1, 1, approve, &mut yes, &mut rng);
    assert_eq!(peers[0].ballot().unwrap().outcome, BallotOutcome::Committed);
    let deny = Message::Vote { term: 1, proposal: id, approve: false };
    peers[0].handle(1, 2, deny, &mut yes, &mut rng);
    assert_eq!(peers[0].ballot().unwrap().outcome, BallotOutcome::Committed);
    assert_eq!(peers[0].log().len(), 1);
}
