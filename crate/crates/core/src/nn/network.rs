use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::{activate, activation_backward, Activation};
use super::dense::{dense_forward, DenseParams};
use super::error::NnError;
use super::gru::{self, GruParams, GruStepCache};
use super::matrix::Matrix2D;
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSpec {
    /// Flattens each input frame to one dimension. When the next layer is
    /// dense, the frames are concatenated; before a GRU they stay a sequence.
    Flatten,
    Dense { units: usize, activation: Activation },
    Gru { hidden: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Width of one input frame.
    pub input_width: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input_width: usize, layers: Vec<LayerSpec>) -> Result<Self, NnError> {
        let spec = Self { input_width, layers };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks layer ordering rules and that widths are positive. Width
    /// compatibility is implied: each layer is sized from its predecessor.
    pub fn validate(&self) -> Result<(), NnError> {
        if self.input_width == 0 {
            return Err(NnError::InvalidSpec("input width must be positive".into()));
        }
        let mut gru_seen = false;
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::Flatten if i != 0 => {
                    return Err(NnError::InvalidSpec(format!("flatten at position {i}; only allowed first")));
                }
                LayerSpec::Dense { units: 0, .. } | LayerSpec::Gru { hidden: 0 } => {
                    return Err(NnError::InvalidSpec(format!("layer {i} has zero width")));
                }
                LayerSpec::Gru { .. } => {
                    let first_real = self.layers.iter().position(|l| *l != LayerSpec::Flatten);
                    if gru_seen || first_real != Some(i) {
                        return Err(NnError::InvalidSpec(
                            "at most one gru layer, placed first after an optional flatten".into(),
                        ));
                    }
                    gru_seen = true;
                }
                _ => {}
            }
        }
        if !self.layers.iter().any(|l| *l != LayerSpec::Flatten) {
            return Err(NnError::InvalidSpec("network has no parametric layer".into()));
        }
        Ok(())
    }

    pub fn is_recurrent(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, LayerSpec::Gru { .. }))
    }

    pub fn output_width(&self) -> usize {
        self.layer_widths().last().map_or(self.input_width, |&(_, out)| out)
    }

    /// `(input, output)` width of every layer for single-frame input.
    pub fn layer_widths(&self) -> Vec<(usize, usize)> {
        let mut width = self.input_width;
        self.layers
            .iter()
            .map(|l| {
                let out = match *l {
                    LayerSpec::Flatten => width,
                    LayerSpec::Dense { units, .. } => units,
                    LayerSpec::Gru { hidden } => hidden,
                };
                let pair = (width, out);
                width = out;
                pair
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerParams {
    Flatten,
    Dense { params: DenseParams, activation: Activation },
    Gru(GruParams),
}

impl LayerParams {
    pub(crate) fn slices(&self) -> Vec<&[f64]> {
        match self {
            LayerParams::Flatten => Vec::new(),
            LayerParams::Dense { params, .. } => vec![params.weights.as_slice(), &params.bias],
            LayerParams::Gru(g) => g.slices().to_vec(),
        }
    }

    pub(crate) fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            LayerParams::Flatten => Vec::new(),
            LayerParams::Dense { params, .. } => {
                let DenseParams { weights, bias } = params;
                vec![weights.as_mut_slice(), bias.as_mut_slice()]
            }
            LayerParams::Gru(g) => g.slices_mut().into_iter().collect(),
        }
    }

    fn zeroed(&self) -> Self {
        match self {
            LayerParams::Flatten => LayerParams::Flatten,
            LayerParams::Dense { params, activation } => LayerParams::Dense {
                params: DenseParams::zeros(params.inputs(), params.outputs()),
                activation: *activation,
            },
            LayerParams::Gru(g) => LayerParams::Gru(GruParams::zeros(g.inputs(), g.hidden())),
        }
    }
}

static NEXT_NETWORK_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_NETWORK_ID.fetch_add(1, Ordering::Relaxed)
}

/// A feed-forward or single-GRU network with owned parameters.
#[derive(Debug)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<LayerParams>,
    id: u64,
    generation: u64,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Self { spec: self.spec.clone(), layers: self.layers.clone(), id: fresh_id(), generation: 0 }
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.layers == other.layers
    }
}

/// Gradient of a scalar objective w.r.t. every parameter, laid out like the
/// network it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    layers: Vec<LayerParams>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self { layers: net.layers.iter().map(LayerParams::zeroed).collect() }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.slices()).flat_map(|s| s.iter().copied()).collect()
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<(), NnError> {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            let bs = b.slices();
            let as_ = a.slices_mut();
            if as_.len() != bs.len() {
                return Err(NnError::LayoutMismatch);
            }
            for (x, y) in as_.into_iter().zip(bs) {
                if x.len() != y.len() {
                    return Err(NnError::LayoutMismatch);
                }
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, k: f64) {
        for s in self.layers.iter_mut().flat_map(|l| l.slices_mut()) {
            for v in s.iter_mut() {
                *v *= k;
            }
        }
    }

    pub(crate) fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| l.slices())
    }

    pub fn is_finite(&self) -> bool {
        self.slices().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

#[derive(Clone, Debug)]
enum LayerCache {
    Flatten { frame_width: usize, concatenated: bool },
    Dense { input: Vec<f64>, pre: Vec<f64>, out: Vec<f64> },
    Gru(Vec<GruStepCache>),
}

/// Intermediate activations recorded by [`Network::forward`].
#[derive(Clone, Debug)]
pub struct Tape {
    network_id: u64,
    generation: u64,
    frames: usize,
    caches: Vec<LayerCache>,
    output: Vec<f64>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// Result of [`Network::backprop`].
#[derive(Clone, Debug)]
pub struct Backward {
    pub grads: Gradients,
    /// Gradient w.r.t. each input frame.
    pub input_grads: Vec<Vec<f64>>,
}

enum Value {
    Seq(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl Network {
    /// Initializes dense weights uniformly in ±√(6/(fan_in+fan_out)) and GRU
    /// matrices uniformly in ±1/√hidden; biases start at zero.
    pub fn new(spec: NetworkSpec, rng: &mut SimRng) -> Result<Self, NnError> {
        spec.validate()?;
        let widths = spec.layer_widths();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (layer, &(fan_in, fan_out)) in spec.layers.iter().zip(&widths) {
            layers.push(match *layer {
                LayerSpec::Flatten => LayerParams::Flatten,
                LayerSpec::Dense { units, activation } => {
                    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
                    let weights = Matrix2D::from_fn(units, fan_in, |_, _| rng.random_range(-limit..limit));
                    LayerParams::Dense { params: DenseParams { weights, bias: vec![0.0; units] }, activation }
                }
                LayerSpec::Gru { hidden } => {
                    let limit = 1.0 / libm::sqrt(hidden as f64);
                    let mut g = GruParams::zeros(fan_in, hidden);
                    for (k, s) in g.slices_mut().into_iter().enumerate() {
                        if k % 3 == 2 {
                            continue;
                        }
                        for v in s.iter_mut() {
                            *v = rng.random_range(-limit..limit);
                        }
                    }
                    LayerParams::Gru(g)
                }
            });
        }
        Ok(Self { spec, layers, id: fresh_id(), generation: 0 })
    }

    pub fn zeros(spec: NetworkSpec) -> Result<Self, NnError> {
        spec.validate()?;
        let layers = spec
            .layers
            .iter()
            .zip(spec.layer_widths())
            .map(|(layer, (fan_in, _))| match *layer {
                LayerSpec::Flatten => LayerParams::Flatten,
                LayerSpec::Dense { units, activation } => {
                    LayerParams::Dense { params: DenseParams::zeros(fan_in, units), activation }
                }
                LayerSpec::Gru { hidden } => LayerParams::Gru(GruParams::zeros(fan_in, hidden)),
            })
            .collect();
        Ok(Self { spec, layers, id: fresh_id(), generation: 0 })
    }

    /// Assembles a network from explicit layer parameters.
    pub fn from_layers(spec: NetworkSpec, layers: Vec<LayerParams>) -> Result<Self, NnError> {
        spec.validate()?;
        let template = Self::zeros(spec.clone())?;
        if template.layers.len() != layers.len() {
            return Err(NnError::LayoutMismatch);
        }
        for (t, l) in template.layers.iter().zip(&layers) {
            let same_shape = match (t, l) {
                (LayerParams::Flatten, LayerParams::Flatten) => true,
                (LayerParams::Dense { params: a, activation: x }, LayerParams::Dense { params: b, activation: y }) => {
                    x == y && a.weights.shape() == b.weights.shape() && a.bias.len() == b.bias.len()
                }
                (LayerParams::Gru(a), LayerParams::Gru(b)) => {
                    b.validate()?;
                    a.inputs() == b.inputs() && a.hidden() == b.hidden()
                }
                _ => false,
            };
            if !same_shape {
                return Err(NnError::LayoutMismatch);
            }
        }
        Ok(Self { spec, layers, id: fresh_id(), generation: 0 })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().flat_map(|l| l.slices()).map(|s| s.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.slices()).flat_map(|s| s.iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), NnError> {
        if flat.len() != self.param_count() {
            return Err(NnError::LayoutMismatch);
        }
        let mut offset = 0;
        for s in self.layers.iter_mut().flat_map(|l| l.slices_mut()) {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        }
        self.touch();
        Ok(())
    }

    pub(crate) fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.touch();
        self.layers.iter_mut().flat_map(|l| l.slices_mut())
    }

    pub fn copy_params_from(&mut self, other: &Network) -> Result<(), NnError> {
        if self.spec != other.spec {
            return Err(NnError::LayoutMismatch);
        }
        self.layers.clone_from(&other.layers);
        self.touch();
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().flat_map(|l| l.slices()).all(|s| s.iter().all(|v| v.is_finite()))
    }

    fn touch(&mut self) {
        self.generation += 1;
    }

    /// Forward pass over a single frame, without recording a tape.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.run(core::slice::from_ref(&x.to_vec()), false).map(|t| t.output)
    }

    /// Forward pass over a frame sequence, without recording a tape.
    pub fn predict_seq(&self, frames: &[Vec<f64>]) -> Result<Vec<f64>, NnError> {
        self.run(frames, false).map(|t| t.output)
    }

    /// Forward pass recording everything [`Network::backprop`] needs.
    ///
    /// Feed-forward networks take exactly one frame; recurrent networks take
    /// a non-empty sequence and see only the final GRU state downstream.
    pub fn forward(&self, frames: &[Vec<f64>]) -> Result<(Vec<f64>, Tape), NnError> {
        let tape = self.run(frames, true)?;
        Ok((tape.output.clone(), tape))
    }

    fn run(&self, frames: &[Vec<f64>], record: bool) -> Result<Tape, NnError> {
        if frames.is_empty() {
            return Err(NnError::EmptySequence);
        }
        for f in frames {
            if f.len() != self.spec.input_width {
                return Err(NnError::Dimension {
                    context: "network input frame",
                    expected: (self.spec.input_width, 1),
                    found: (f.len(), 1),
                });
            }
        }
        let mut caches = Vec::new();
        let mut value = Value::Seq(frames.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            value = match (layer, value) {
                (LayerParams::Flatten, Value::Seq(seq)) => {
                    let next_is_gru = matches!(self.layers.get(i + 1), Some(LayerParams::Gru(_)));
                    if record {
                        caches.push(LayerCache::Flatten {
                            frame_width: self.spec.input_width,
                            concatenated: !next_is_gru,
                        });
                    }
                    if next_is_gru {
                        Value::Seq(seq)
                    } else {
                        Value::Flat(seq.concat())
                    }
                }
                (LayerParams::Flatten, v) => v,
                (LayerParams::Dense { params, activation }, v) => {
                    let input = match v {
                        Value::Flat(x) => x,
                        Value::Seq(mut seq) if seq.len() == 1 => seq.pop().unwrap_or_default(),
                        Value::Seq(seq) => {
                            return Err(NnError::Dimension {
                                context: "dense layer given a frame sequence",
                                expected: (1, params.inputs()),
                                found: (seq.len(), params.inputs()),
                            })
                        }
                    };
                    let pre = dense_forward(params, &input)?;
                    let out = activate(*activation, &pre);
                    if record {
                        caches.push(LayerCache::Dense { input, pre, out: out.clone() });
                    }
                    Value::Flat(out)
                }
                (LayerParams::Gru(g), Value::Seq(seq)) => {
                    let steps = gru::sequence_cached(g, &seq)?;
                    let h = steps.last().map(|c| c.h.clone()).unwrap_or_default();
                    if record {
                        caches.push(LayerCache::Gru(steps));
                    }
                    Value::Flat(h)
                }
                (LayerParams::Gru(_), Value::Flat(_)) => {
                    return Err(NnError::InvalidSpec("gru layer must receive the frame sequence".into()))
                }
            };
        }
        let output = match value {
            Value::Flat(v) => v,
            Value::Seq(mut s) => s.pop().unwrap_or_default(),
        };
        Ok(Tape { network_id: self.id, generation: self.generation, frames: frames.len(), caches, output })
    }

    /// Reverse-mode gradients for the objective whose gradient w.r.t. the
    /// network output is `output_grad`.
    pub fn backprop(&self, tape: &Tape, output_grad: &[f64]) -> Result<Backward, NnError> {
        if tape.network_id != self.id || tape.generation != self.generation || tape.caches.len() != self.layers.len() {
            return Err(NnError::StaleTape);
        }
        if output_grad.len() != tape.output.len() {
            return Err(NnError::Dimension {
                context: "output gradient",
                expected: (tape.output.len(), 1),
                found: (output_grad.len(), 1),
            });
        }
        let mut grads = Gradients::zeros_like(self);
        let mut grad = output_grad.to_vec();
        let mut frame_grads: Option<Vec<Vec<f64>>> = None;
        for ((layer, cache), gl) in self.layers.iter().zip(&tape.caches).zip(grads.layers.iter_mut()).rev() {
            match (layer, cache, gl) {
                (
                    LayerParams::Dense { params, activation },
                    LayerCache::Dense { input, pre, out },
                    LayerParams::Dense { params: g, .. },
                ) => {
                    let g_pre = activation_backward(*activation, pre, out, &grad);
                    g.weights.add_outer(&g_pre, input);
                    for (b, d) in g.bias.iter_mut().zip(&g_pre) {
                        *b += d;
                    }
                    grad = params.weights.matvec_t(&g_pre)?;
                }
                (LayerParams::Gru(p), LayerCache::Gru(steps), LayerParams::Gru(g)) => {
                    frame_grads = Some(gru::sequence_backward(p, steps, &grad, g)?);
                }
                (LayerParams::Flatten, LayerCache::Flatten { frame_width, concatenated }, _) => {
                    if *concatenated {
                        frame_grads = Some(grad.chunks(*frame_width).map(<[f64]>::to_vec).collect());
                    }
                }
                _ => return Err(NnError::StaleTape),
            }
        }
        let input_grads = match frame_grads {
            Some(g) => g,
            None => {
                debug_assert_eq!(tape.frames, 1);
                vec![grad]
            }
        };
        Ok(Backward { grads, input_grads })
    }
}

/// Polyak averaging: `target ← (1 − τ)·target + τ·online`.
pub fn soft_update(target: &mut Network, online: &Network, tau: f64) -> Result<(), NnError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(NnError::InvalidTau(tau));
    }
    if target.spec != online.spec {
        return Err(NnError::LayoutMismatch);
    }
    let sources: Vec<&[f64]> = online.layers.iter().flat_map(|l| l.slices()).collect();
    for (t, o) in target.param_slices_mut().zip(sources) {
        for (a, b) in t.iter_mut().zip(o) {
            *a = (1.0 - tau) * *a + tau * b;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn dqn_spec(input: usize) -> NetworkSpec {
        NetworkSpec::new(
            input,
            vec![
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 20, activation: Activation::Relu },
                LayerSpec::Dense { units: 10, activation: Activation::Linear },
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_linear_layer_equals_dense_forward() {
        let spec = NetworkSpec::new(3, vec![LayerSpec::Dense { units: 2, activation: Activation::Linear }]).unwrap();
        let net = Network::new(spec, &mut seeded(1, 0)).unwrap();
        let x = [0.5, -1.0, 2.0];
        let LayerParams::Dense { params, .. } = &net.layers()[0] else { panic!() };
        assert_eq!(net.predict(&x).unwrap(), dense_forward(params, &x).unwrap());
    }

    #[test]
    fn q_network_output_has_one_value_per_action() {
        let net = Network::new(dqn_spec(24), &mut seeded(2, 0)).unwrap();
        assert_eq!(net.predict(&[0.3; 24]).unwrap().len(), 10);
        assert_eq!(net.spec().output_width(), 10);
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let net = Network::zeros(dqn_spec(5)).unwrap();
        assert_eq!(net.predict(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn forward_is_pure() {
        let net = Network::new(dqn_spec(4), &mut seeded(3, 0)).unwrap();
        let x = vec![vec![0.1, 0.2, 0.3, 0.4]];
        assert_eq!(net.forward(&x).unwrap().0, net.forward(&x).unwrap().0);
    }

    #[test]
    fn spec_rules_are_enforced() {
        let dense = LayerSpec::Dense { units: 4, activation: Activation::Relu };
        assert!(NetworkSpec::new(3, vec![dense, LayerSpec::Gru { hidden: 2 }]).is_err());
        assert!(NetworkSpec::new(3, vec![LayerSpec::Gru { hidden: 2 }, LayerSpec::Gru { hidden: 2 }]).is_err());
        assert!(NetworkSpec::new(3, vec![dense, LayerSpec::Flatten]).is_err());
        assert!(NetworkSpec::new(3, vec![LayerSpec::Flatten]).is_err());
        assert!(NetworkSpec::new(3, vec![LayerSpec::Flatten, LayerSpec::Gru { hidden: 2 }, dense]).is_ok());
    }

    #[test]
    fn linear_least_squares_gradient_is_scaled_outer_product() {
        let spec = NetworkSpec::new(3, vec![LayerSpec::Dense { units: 2, activation: Activation::Linear }]).unwrap();
        let net = Network::new(spec, &mut seeded(4, 0)).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let target = [0.3, -0.4];
        let (y, tape) = net.forward(&[x.clone()]).unwrap();
        let residual: Vec<f64> = y.iter().zip(&target).map(|(a, b)| a - b).collect();
        let n = residual.len() as f64;
        let out_grad: Vec<f64> = residual.iter().map(|r| 2.0 * r / n).collect();
        let back = net.backprop(&tape, &out_grad).unwrap();
        let flat = back.grads.flat();
        for i in 0..2 {
            for j in 0..3 {
                let expected = 2.0 / n * residual[i] * x[j];
                assert!((flat[i * 3 + j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let spec = NetworkSpec::new(
            4,
            vec![LayerSpec::Gru { hidden: 3 }, LayerSpec::Dense { units: 2, activation: Activation::Tanh }],
        )
        .unwrap();
        let net = Network::new(spec, &mut seeded(5, 0)).unwrap();
        let frames = vec![vec![0.1; 4], vec![-0.2; 4], vec![0.3; 4]];
        let (_, tape) = net.forward(&frames).unwrap();
        let back = net.backprop(&tape, &[0.0, 0.0]).unwrap();
        assert!(back.grads.flat().iter().all(|&g| g == 0.0));
        assert_eq!(back.input_grads.len(), 3);
    }

    #[test]
    fn tapes_go_stale_after_updates_and_across_networks() {
        let mut net = Network::new(dqn_spec(2), &mut seeded(6, 0)).unwrap();
        let other = net.clone();
        let (_, tape) = net.forward(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(other.backprop(&tape, &[0.0; 10]).unwrap_err(), NnError::StaleTape);
        let flat = net.flat_params();
        net.set_flat_params(&flat).unwrap();
        assert_eq!(net.backprop(&tape, &[0.0; 10]).unwrap_err(), NnError::StaleTape);
    }

    #[test]
    fn feed_forward_rejects_multi_frame_input() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::Dense { units: 1, activation: Activation::Linear }]).unwrap();
        let net = Network::zeros(spec).unwrap();
        assert!(net.forward(&[vec![0.0; 2], vec![0.0; 2]]).is_err());
        assert!(net.forward(&[vec![0.0; 3]]).is_err());
    }

    #[test]
    fn soft_update_interpolates() {
        let spec = NetworkSpec::new(1, vec![LayerSpec::Dense { units: 1, activation: Activation::Linear }]).unwrap();
        let mut target = Network::zeros(spec.clone()).unwrap();
        let mut online = Network::zeros(spec).unwrap();
        online.set_flat_params(&[2.0, 2.0]).unwrap();
        soft_update(&mut target, &online, 0.5).unwrap();
        assert_eq!(target.flat_params(), vec![1.0, 1.0]);
        soft_update(&mut target, &online, 0.0).unwrap();
        assert_eq!(target.flat_params(), vec![1.0, 1.0]);
        soft_update(&mut target, &online, 1.0).unwrap();
        assert_eq!(target.flat_params(), online.flat_params());
        assert_eq!(soft_update(&mut target, &online, 1.5), Err(NnError::InvalidTau(1.5)));
        assert_eq!(soft_update(&mut target, &online, -0.1), Err(NnError::InvalidTau(-0.1)));
    }
}
