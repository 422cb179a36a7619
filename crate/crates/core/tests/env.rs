use adapt_swarm_core::cluster::{ClusterConfig, ClusterState, RejectReason, ServiceConfig, WorkloadModel};
use adapt_swarm_core::env::{EnvError, RejectCause, RewardConfig, StepOutcome};
use adapt_swarm_core::raft::{Crash, FaultProfile};
use adapt_swarm_core::{ActionBindings, AdaptationAction, AdaptationEnv, EnvConfig, Environment};
use proptest::prelude::*;

const ALL_ZERO: ActionBindings = ActionBindings {
    scale_out: 0,
    scale_in: 0,
    scale_up_cpu: 0,
    scale_down_cpu: 0,
    scale_up_mem: 0,
    scale_down_mem: 0,
    compose_split: 0,
    compose_merge: 0,
};

fn single_service(demand: f64, replicas: usize, limit: f64) -> ClusterConfig {
    ClusterConfig {
        services: vec![ServiceConfig {
            workload: WorkloadModel::constant(demand),
            initial_replicas: replicas,
            cpu_limit: limit,
            ..ServiceConfig::default()
        }],
        p_fail: 0.0,
        ..ClusterConfig::default()
    }
}

fn single_env(cluster: ClusterConfig) -> AdaptationEnv {
    AdaptationEnv::new(cluster, EnvConfig { bindings: ALL_ZERO, ..EnvConfig::default() }).unwrap()
}

fn default_env() -> AdaptationEnv {
    AdaptationEnv::new(ClusterConfig::default(), EnvConfig::default()).unwrap()
}

#[test]
fn default_observation_has_24_components() {
    let mut env = default_env();
    assert_eq!(env.observation_len(), 24);
    assert_eq!(env.action_count(), 10);
    assert_eq!(env.reset(3).unwrap().len(), 24);
}

#[test]
fn same_seed_same_initial_observation() {
    let mut env = default_env();
    let a = env.reset(17).unwrap();
    let b = env.reset(17).unwrap();
    assert_eq!(a, b);
}

#[test]
fn idle_cluster_reports_zero_cpu() {
    let mut env = single_env(single_service(0.0, 2, 500.0));
    let obs = env.reset(0).unwrap();
    for node in 0..5 {
        assert_eq!(obs[node * 4], 0.0);
    }
}

#[test]
fn node_components_are_normalised_by_capacity() {
    let mut cfg = single_service(50.0, 1, 100.0);
    cfg.capacity.cpu_millicores = 100.0;
    let c = ClusterState::new(cfg, 0).unwrap();
    let obs = AdaptationEnv::build_observation(&c);
    let node = c.services()[0].placement[0];
    assert_eq!(obs[node * 4], 0.5);
}

#[test]
fn dead_and_absent_nodes_are_zero_padded() {
    let mut c = ClusterState::new(ClusterConfig { p_fail: 0.0, ..ClusterConfig::default() }, 0).unwrap();
    c.inject_failure(2).unwrap();
    let obs = AdaptationEnv::build_observation(&c);
    assert_eq!(&obs[8..12], &[0.0; 4]);
    assert!(obs[0..4].iter().any(|&v| v > 0.0));

    let cfg = ClusterConfig { managers: 1, workers: 1, max_nodes: Some(5), ..single_service(300.0, 2, 500.0) };
    let c = ClusterState::new(cfg, 0).unwrap();
    let obs = AdaptationEnv::build_observation(&c);
    assert_eq!(obs.len(), 5 * 4 + 2);
    assert_eq!(&obs[8..20], &[0.0; 12]);
}

#[test]
fn no_op_on_healthy_unconverged_cluster_costs_one_step() {
    // Four replicas over five nodes put one on worker 3; losing it leaves the
    // service in band but not converged.
    let mut env = single_env(single_service(200.0, 4, 100.0));
    env.reset(0).unwrap();
    let placement = env.cluster().unwrap().services()[0].placement.clone();
    assert!(placement.contains(&3));
    env.cluster_mut().unwrap().inject_failure(3).unwrap();
    let before = env.cluster().unwrap().services().to_vec();
    let r = env.step(AdaptationAction::NoOp.index()).unwrap();
    assert_eq!(r.info.outcome, StepOutcome::Applied);
    assert_eq!(r.info.violation, 0.0);
    assert!(!r.info.converged);
    assert_eq!(r.reward, -1.0);
    assert_eq!(env.cluster().unwrap().services(), &before[..]);
}

#[test]
fn denied_action_costs_the_failure_penalty_and_leaves_the_cluster_alone() {
    let mut env = single_env(single_service(60.0, 1, 100.0));
    env.reset(4).unwrap();
    let mut shadow = env.cluster().unwrap().clone();
    let r = env.step(AdaptationAction::ScaleIn.index()).unwrap();
    assert_eq!(r.info.outcome, StepOutcome::Rejected(RejectCause::VoteDenied(Some(RejectReason::AtBound))));
    assert_eq!(r.reward, -10.0 - 1.0 - 5.0 * r.info.violation);
    assert_eq!(r.info.duration_s, 0.0);
    assert!(!r.info.converged);
    shadow.tick();
    assert_eq!(env.cluster().unwrap().snapshot(), shadow.snapshot());
}

#[test]
fn converging_step_pays_the_convergence_reward() {
    let mut env = single_env(single_service(200.0, 4, 100.0));
    env.reset(0).unwrap();
    let r = env.step(AdaptationAction::NoOp.index()).unwrap();
    assert!(r.info.converged);
    assert!(r.done);
    assert_eq!(r.reward, 99.0);
    assert_eq!(r.info.sparse_reward, 100.0);
    assert_eq!(r.info.duration_s, 1.0);
    assert_eq!(env.step(0).unwrap_err(), EnvError::EpisodeDone);
}

#[test]
fn reward_formula_examples() {
    let r = RewardConfig::default();
    assert_eq!(r.shaped(true, 0.0, false), -11.0);
    assert!((r.shaped(false, 0.2, false) - -2.0).abs() < 1e-12);
    assert_eq!(r.shaped(false, 0.0, true), 99.0);
}

#[test]
fn protocol_errors() {
    let mut env = default_env();
    assert_eq!(env.step(0).unwrap_err(), EnvError::NotReset);
    env.reset(0).unwrap();
    assert_eq!(env.step(10).unwrap_err(), EnvError::InvalidAction(10));
}

#[test]
fn duration_table_and_episode_end() {
    let env = default_env();
    assert_eq!(env.action_duration(AdaptationAction::NoOp), 1.0);
    assert_eq!(env.action_duration(AdaptationAction::ScaleOut), 5.0);
    assert_eq!(env.action_duration(AdaptationAction::ScaleDownMem), 3.0);
    assert_eq!(env.action_duration(AdaptationAction::ComposeMerge), 8.0);
    assert_eq!(env.action_duration(AdaptationAction::AutoRecover), 10.0);
    assert!(env.episode_done(true, 7));
    assert!(env.episode_done(false, 200));
    assert!(!env.episode_done(false, 7));
}

#[test]
fn truncation_after_max_steps() {
    let mut env = default_env();
    env.reset(1).unwrap();
    let mut steps = 0;
    loop {
        // ScaleIn keeps service 0 overloaded, so the episode never converges.
        let r = env.step(AdaptationAction::ScaleIn.index()).unwrap();
        steps += 1;
        assert!(!r.info.converged);
        if r.done {
            break;
        }
    }
    assert_eq!(steps, 200);
}

#[test]
fn adaptation_time_sums_executed_durations() {
    let mut env = default_env();
    env.reset(2).unwrap();
    let mut total = 0.0;
    let mut expected = 0.0;
    for k in 0..60 {
        let a = AdaptationAction::from_index(k * 7 % 10).unwrap();
        let r = env.step(a.index()).unwrap();
        total += r.info.duration_s;
        if !r.info.outcome.is_rejected() {
            expected += env.action_duration(a);
        }
        if r.done {
            break;
        }
    }
    assert_eq!(total, expected);
    assert!(total > 0.0);
}

#[test]
fn killing_the_leader_triggers_an_election() {
    let mut env = default_env();
    env.reset(5).unwrap();
    assert_eq!(env.gate().unwrap().leader(), Some(0));
    env.cluster_mut().unwrap().inject_failure(0).unwrap();
    let r = env.step(AdaptationAction::NoOp.index()).unwrap();
    let gate = env.gate().unwrap();
    assert!(gate.max_term() > 1);
    let leader = gate.leader().expect("a survivor leads");
    assert_ne!(leader, 0);
    assert_eq!(env.cluster().unwrap().leader(), Some(leader));
    assert_eq!(r.info.outcome, StepOutcome::Applied);
    assert!(gate.monitor().is_safe());
}

#[test]
fn scheduled_crashes_kill_cluster_nodes() {
    let faults = FaultProfile { crashes: vec![Crash { tick: 3, node: 1, restart_after: None }], ..FaultProfile::default() };
    let mut env = AdaptationEnv::new(ClusterConfig::default(), EnvConfig { faults, ..EnvConfig::default() }).unwrap();
    env.reset(0).unwrap();
    for _ in 0..3 {
        env.step(0).unwrap();
    }
    assert!(!env.cluster().unwrap().nodes()[1].alive);
    let r = env.step(AdaptationAction::AutoRecover.index()).unwrap();
    assert_eq!(r.info.outcome, StepOutcome::Applied);
    assert!(env.cluster().unwrap().nodes()[1].alive);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = EnvConfig { max_steps: 0, ..EnvConfig::default() };
    assert!(AdaptationEnv::new(ClusterConfig::default(), bad).is_err());
    // Default bindings send vertical actions to service 1.
    assert!(AdaptationEnv::new(single_service(1.0, 1, 100.0), EnvConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn observations_and_rewards_stay_bounded(
        seed in any::<u64>(),
        actions in prop::collection::vec(0usize..10, 1..120),
        p_fail in prop::sample::select(vec![0.0, 0.01, 0.05]),
        drop_prob in prop::sample::select(vec![0.0, 0.2]),
    ) {
        let cluster = ClusterConfig { p_fail, ..ClusterConfig::default() };
        let cfg = EnvConfig { faults: FaultProfile { drop_prob, delay_max: 2, ..FaultProfile::default() }, ..EnvConfig::default() };
        let r = cfg.reward;
        let v_max = 2.0 * 0.4;
        let (lo, hi) = (-r.c_step - r.c_fail - r.c_viol * v_max, r.c_conv - r.c_step);
        let mut env = AdaptationEnv::new(cluster, cfg).unwrap();
        let obs = env.reset(seed).unwrap();
        prop_assert_eq!(obs.len(), 24);
        for a in actions {
            let res = env.step(a).unwrap();
            prop_assert_eq!(res.observation.len(), 24);
            prop_assert!(res.observation.iter().all(|v| v.is_finite() && (0.0..=1.2).contains(v)));
            prop_assert!(res.reward >= lo - 1e-9 && res.reward <= hi + 1e-9, "reward {}", res.reward);
            prop_assert!(env.gate().unwrap().monitor().is_safe());
            if res.done { break; }
        }
    }

    #[test]
    fn episodes_are_deterministic(seed in any::<u64>(), actions in prop::collection::vec(0usize..10, 1..60)) {
        let run = || {
            let mut env = default_env();
            let mut out = vec![env.reset(seed).unwrap().0];
            let mut rewards = Vec::new();
            for &a in &actions {
                let r = env.step(a).unwrap();
                rewards.push(r.reward.to_bits());
                out.push(r.observation.0);
                if r.done { break; }
            }
            (out, rewards)
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn rejected_steps_match_a_plain_tick(seed in any::<u64>(), actions in prop::collection::vec(0usize..10, 1..60)) {
        let mut env = default_env();
        env.reset(seed).unwrap();
        for a in actions {
            let mut shadow = env.cluster().unwrap().clone();
            let r = env.step(a).unwrap();
            if r.info.outcome.is_rejected() {
                shadow.set_leader(env.gate().unwrap().leader());
                shadow.tick();
                prop_assert_eq!(env.cluster().unwrap().snapshot(), shadow.snapshot());
            }
            if r.done { break; }
        }
    }
}
