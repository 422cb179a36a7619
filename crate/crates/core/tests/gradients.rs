//! Analytic gradients against central finite differences.

mod common;

use adapt_swarm_core::agents::{actor_gradient, DuelingMode, QFunction};
use adapt_swarm_core::nn::{cross_entropy, dense_forward, mse, Activation, LayerParams, LayerSpec, Network, NetworkSpec};
use common::*;

const INSTANCES: u64 = 20;

fn dense(units: usize, activation: Activation) -> LayerSpec {
    LayerSpec::Dense { units, activation }
}

/// Checks parameter and input gradients of `Σ c·net(frames)`.
fn check_network(spec: NetworkSpec, frames_len: usize, seed: u64) {
    let mut r = rng(seed);
    let net = Network::new(spec.clone(), &mut r).unwrap();
    let w = spec.input_width;
    let frames: Vec<Vec<f64>> = (0..frames_len).map(|_| uniform_vec(&mut r, w, 1.0)).collect();
    let c = uniform_vec(&mut r, spec.output_width(), 1.0);
    check_instance(&net, &frames, &c, seed);
}

fn check_instance(net: &Network, frames: &[Vec<f64>], c: &[f64], seed: u64) {
    let w = net.spec().input_width;
    let (_, tape) = net.forward(frames).unwrap();
    let back = net.backprop(&tape, c).unwrap();

    let params = net.flat_params();
    let mut probe = net.clone();
    let numeric = numeric_grad(&params, |p| {
        probe.set_flat_params(p).unwrap();
        dot(&probe.predict_seq(frames).unwrap(), c)
    });
    let err = max_rel_err(&back.grads.flat(), &numeric);
    assert!(err < FD_TOL, "seed {seed}: parameter gradient rel err {err:e}");

    let flat_in: Vec<f64> = frames.concat();
    let numeric_in = numeric_grad(&flat_in, |x| {
        let fr: Vec<Vec<f64>> = x.chunks(w).map(<[f64]>::to_vec).collect();
        dot(&net.predict_seq(&fr).unwrap(), c)
    });
    let err = max_rel_err(&back.input_grads.concat(), &numeric_in);
    assert!(err < FD_TOL, "seed {seed}: input gradient rel err {err:e}");
}

#[test]
fn dense_stack_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let spec = NetworkSpec::new(
            6,
            vec![LayerSpec::Flatten, dense(8, Activation::Tanh), dense(5, Activation::Sigmoid), dense(4, Activation::Linear)],
        )
        .unwrap();
        check_network(spec, 1, seed);
    }
}

/// ReLU is not differentiable at 0, so inputs are redrawn until every hidden
/// pre-activation sits well outside the finite-difference step.
#[test]
fn relu_q_network_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let mut r = rng(100 + seed);
        let spec = NetworkSpec::new(24, vec![LayerSpec::Flatten, dense(20, Activation::Relu), dense(10, Activation::Linear)]).unwrap();
        let net = Network::new(spec, &mut r).unwrap();
        let LayerParams::Dense { params: first, .. } = &net.layers()[1] else { panic!("expected dense layer") };
        let x = loop {
            let x = uniform_vec(&mut r, 24, 1.0);
            let pre = dense_forward(first, &x).unwrap();
            if pre.iter().all(|p| p.abs() > 1e-2) {
                break x;
            }
        };
        let c = uniform_vec(&mut r, 10, 1.0);
        check_instance(&net, &[x], &c, 100 + seed);
    }
}

#[test]
fn softmax_head_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let spec = NetworkSpec::new(5, vec![dense(7, Activation::Tanh), dense(4, Activation::Softmax)]).unwrap();
        check_network(spec, 1, 200 + seed);
    }
}

#[test]
fn gru_over_three_steps_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let spec = NetworkSpec::new(5, vec![LayerSpec::Flatten, LayerSpec::Gru { hidden: 6 }, dense(4, Activation::Linear)]).unwrap();
        check_network(spec, 3, 300 + seed);
    }
}

#[test]
fn dueling_heads_match_finite_differences() {
    for mode in [DuelingMode::MeanCentered, DuelingMode::Additive] {
        for seed in 0..INSTANCES {
            let mut r = rng(400 + seed);
            let mk = |spec: NetworkSpec, r: &mut _| Network::new(spec, r).unwrap();
            let q = QFunction::Dueling {
                trunk: mk(NetworkSpec::new(6, vec![LayerSpec::Flatten, dense(8, Activation::Tanh)]).unwrap(), &mut r),
                value: mk(NetworkSpec::new(8, vec![dense(1, Activation::Linear)]).unwrap(), &mut r),
                advantage: mk(NetworkSpec::new(8, vec![dense(5, Activation::Linear)]).unwrap(), &mut r),
                mode,
            };
            let frames = vec![uniform_vec(&mut r, 6, 1.0)];
            let c = uniform_vec(&mut r, 5, 1.0);
            let (_, tape) = q.forward(&frames).unwrap();
            let (grads, input_grads) = q.backprop(&tape, &c).unwrap();
            let analytic: Vec<f64> = grads.iter().flat_map(|g| g.flat()).collect();

            let sizes: Vec<usize> = q.networks().iter().map(|n| n.param_count()).collect();
            let params: Vec<f64> = q.networks().iter().flat_map(|n| n.flat_params()).collect();
            let mut probe = q.clone();
            let numeric = numeric_grad(&params, |p| {
                let mut off = 0;
                for (net, &k) in probe.networks_mut().into_iter().zip(&sizes) {
                    net.set_flat_params(&p[off..off + k]).unwrap();
                    off += k;
                }
                dot(&probe.predict(&frames).unwrap(), &c)
            });
            let err = max_rel_err(&analytic, &numeric);
            assert!(err < FD_TOL, "{mode:?} seed {seed}: rel err {err:e}");

            let numeric_in = numeric_grad(&frames[0], |x| dot(&q.predict(&[x.to_vec()]).unwrap(), &c));
            let err = max_rel_err(&input_grads[0], &numeric_in);
            assert!(err < FD_TOL, "{mode:?} seed {seed}: input rel err {err:e}");
        }
    }
}

#[test]
fn actor_through_critic_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let mut r = rng(500 + seed);
        let (obs, actions) = (6, 4);
        let actor = Network::new(
            NetworkSpec::new(obs, vec![LayerSpec::Flatten, dense(7, Activation::Tanh), dense(actions, Activation::Softmax)]).unwrap(),
            &mut r,
        )
        .unwrap();
        let critic = Network::new(
            NetworkSpec::new(obs + actions, vec![LayerSpec::Flatten, dense(8, Activation::Tanh), dense(1, Activation::Linear)]).unwrap(),
            &mut r,
        )
        .unwrap();
        let states: Vec<Vec<f64>> = (0..3).map(|_| uniform_vec(&mut r, obs, 1.0)).collect();
        let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
        let analytic = actor_gradient(&actor, &critic, &refs).unwrap().flat();

        let mut probe = actor.clone();
        let numeric = numeric_grad(&actor.flat_params(), |p| {
            probe.set_flat_params(p).unwrap();
            let mean_q: f64 = states
                .iter()
                .map(|s| {
                    let a = probe.predict(s).unwrap();
                    critic.predict(&[s.as_slice(), a.as_slice()].concat()).unwrap()[0]
                })
                .sum::<f64>()
                / states.len() as f64;
            -mean_q
        });
        let err = max_rel_err(&analytic, &numeric);
        assert!(err < FD_TOL, "seed {seed}: rel err {err:e}");
    }
}

#[test]
fn mse_gradient_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let mut r = rng(600 + seed);
        let pred = uniform_vec(&mut r, 7, 2.0);
        let target = uniform_vec(&mut r, 7, 2.0);
        let analytic = mse(&pred, &target).unwrap().grad;
        let numeric = numeric_grad(&pred, |p| mse(p, &target).unwrap().value);
        let err = max_rel_err(&analytic, &numeric);
        assert!(err < FD_TOL, "seed {seed}: rel err {err:e}");
    }
}

#[test]
fn cross_entropy_gradient_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let mut r = rng(700 + seed);
        let raw: Vec<f64> = uniform_vec(&mut r, 5, 1.0).iter().map(|x| x.exp()).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let index = (seed % 5) as usize;
        let weight = uniform_vec(&mut r, 1, 2.0)[0];
        let analytic = cross_entropy(&probs, index, weight).unwrap().grad;
        let numeric = numeric_grad(&probs, |p| cross_entropy(p, index, weight).unwrap().value);
        let err = max_rel_err(&analytic, &numeric);
        assert!(err < FD_TOL, "seed {seed}: rel err {err:e}");
    }
}

#[test]
fn softmax_cross_entropy_composition_matches_finite_differences() {
    for seed in 0..INSTANCES {
        let mut r = rng(800 + seed);
        let net = Network::new(NetworkSpec::new(3, vec![dense(4, Activation::Softmax)]).unwrap(), &mut r).unwrap();
        let x = uniform_vec(&mut r, 3, 1.0);
        let (index, weight) = ((seed % 4) as usize, 1.5);
        let (p, tape) = net.forward(&[x.clone()]).unwrap();
        let ce = cross_entropy(&p, index, weight).unwrap();
        let analytic = net.backprop(&tape, &ce.grad).unwrap().grads.flat();
        let mut probe = net.clone();
        let numeric = numeric_grad(&net.flat_params(), |w| {
            probe.set_flat_params(w).unwrap();
            cross_entropy(&probe.predict(&x).unwrap(), index, weight).unwrap().value
        });
        let err = max_rel_err(&analytic, &numeric);
        assert!(err < FD_TOL, "seed {seed}: rel err {err:e}");
    }
}
