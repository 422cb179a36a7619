//! Gated recurrent unit.
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! h̃  = tanh(W_h x + U_h (r ⊙ h) + b_h)
//! h' = (1 − z) ⊙ h + z ⊙ h̃
//! ```

use alloc::vec;
use alloc::vec::Vec;

use super::activation::sigmoid;
use super::error::{check_len, NnError};
use super::matrix::Matrix2D;

#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_z: Matrix2D,
    pub u_z: Matrix2D,
    pub b_z: Vec<f64>,
    pub w_r: Matrix2D,
    pub u_r: Matrix2D,
    pub b_r: Vec<f64>,
    pub w_h: Matrix2D,
    pub u_h: Matrix2D,
    pub b_h: Vec<f64>,
}

/// Gradients share the parameter layout.
pub type GruGradients = GruParams;

impl GruParams {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            w_z: Matrix2D::zeros(hidden, inputs),
            u_z: Matrix2D::zeros(hidden, hidden),
            b_z: vec![0.0; hidden],
            w_r: Matrix2D::zeros(hidden, inputs),
            u_r: Matrix2D::zeros(hidden, hidden),
            b_r: vec![0.0; hidden],
            w_h: Matrix2D::zeros(hidden, inputs),
            u_h: Matrix2D::zeros(hidden, hidden),
            b_h: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_z.len()
    }

    pub fn inputs(&self) -> usize {
        self.w_z.cols()
    }

    /// Checks that gate shapes agree with each other.
    pub fn validate(&self) -> Result<(), NnError> {
        let h = self.hidden();
        let i = self.inputs();
        for w in [&self.w_z, &self.w_r, &self.w_h] {
            if w.shape() != (h, i) {
                return Err(NnError::Dimension { context: "gru input weights", expected: (h, i), found: w.shape() });
            }
        }
        for u in [&self.u_z, &self.u_r, &self.u_h] {
            if u.shape() != (h, h) {
                return Err(NnError::Dimension { context: "gru hidden weights", expected: (h, h), found: u.shape() });
            }
        }
        for b in [&self.b_r, &self.b_h] {
            check_len("gru bias", h, b.len())?;
        }
        Ok(())
    }

    pub(crate) fn slices(&self) -> [&[f64]; 9] {
        [
            self.w_z.as_slice(),
            self.u_z.as_slice(),
            &self.b_z,
            self.w_r.as_slice(),
            self.u_r.as_slice(),
            &self.b_r,
            self.w_h.as_slice(),
            self.u_h.as_slice(),
            &self.b_h,
        ]
    }

    pub(crate) fn slices_mut(&mut self) -> [&mut [f64]; 9] {
        [
            self.w_z.as_mut_slice(),
            self.u_z.as_mut_slice(),
            &mut self.b_z,
            self.w_r.as_mut_slice(),
            self.u_r.as_mut_slice(),
            &mut self.b_r,
            self.w_h.as_mut_slice(),
            self.u_h.as_mut_slice(),
            &mut self.b_h,
        ]
    }
}

/// Everything the backward pass needs from one step.
#[derive(Clone, Debug)]
pub struct GruStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
}

fn gate(w: &Matrix2D, x: &[f64], u: &Matrix2D, h: &[f64], b: &[f64]) -> Result<Vec<f64>, NnError> {
    let mut pre = w.matvec(x)?;
    for ((p, uh), bias) in pre.iter_mut().zip(u.matvec(h)?).zip(b) {
        *p += uh + bias;
    }
    Ok(pre)
}

pub(crate) fn step_cached(p: &GruParams, x: &[f64], h_prev: &[f64]) -> Result<GruStepCache, NnError> {
    check_len("gru hidden state", p.hidden(), h_prev.len())?;
    check_len("gru input", p.inputs(), x.len())?;
    let z: Vec<f64> = gate(&p.w_z, x, &p.u_z, h_prev, &p.b_z)?.into_iter().map(sigmoid).collect();
    let r: Vec<f64> = gate(&p.w_r, x, &p.u_r, h_prev, &p.b_r)?.into_iter().map(sigmoid).collect();
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let candidate: Vec<f64> =
        gate(&p.w_h, x, &p.u_h, &rh, &p.b_h)?.into_iter().map(libm::tanh).collect();
    let h = (0..h_prev.len())
        .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * candidate[i])
        .collect();
    Ok(GruStepCache { x: x.to_vec(), h_prev: h_prev.to_vec(), z, r, candidate, h })
}

pub fn gru_step(p: &GruParams, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>, NnError> {
    step_cached(p, x, h_prev).map(|c| c.h)
}

/// Runs the cell over `seq` from `h0` and returns only the final state.
pub fn gru_sequence_forward(p: &GruParams, seq: &[Vec<f64>], h0: &[f64]) -> Result<Vec<f64>, NnError> {
    if seq.is_empty() {
        return Err(NnError::EmptySequence);
    }
    let mut h = h0.to_vec();
    for x in seq {
        h = gru_step(p, x, &h)?;
    }
    Ok(h)
}

pub(crate) fn sequence_cached(p: &GruParams, seq: &[Vec<f64>]) -> Result<Vec<GruStepCache>, NnError> {
    if seq.is_empty() {
        return Err(NnError::EmptySequence);
    }
    let mut caches = Vec::with_capacity(seq.len());
    let mut h = vec![0.0; p.hidden()];
    for x in seq {
        let c = step_cached(p, x, &h)?;
        h.clone_from(&c.h);
        caches.push(c);
    }
    Ok(caches)
}

/// Backpropagation through time.
///
/// `grad_h` is the gradient w.r.t. the final hidden state. Parameter gradients
/// are accumulated into `grads`; the return value holds the gradient w.r.t.
/// each input frame.
pub(crate) fn sequence_backward(
    p: &GruParams,
    caches: &[GruStepCache],
    grad_h: &[f64],
    grads: &mut GruGradients,
) -> Result<Vec<Vec<f64>>, NnError> {
    let mut dh = grad_h.to_vec();
    let mut dxs = vec![Vec::new(); caches.len()];
    for (t, c) in caches.iter().enumerate().rev() {
        let n = dh.len();
        let mut dz_pre = vec![0.0; n];
        let mut dc_pre = vec![0.0; n];
        let mut dh_prev = vec![0.0; n];
        for i in 0..n {
            dz_pre[i] = dh[i] * (c.candidate[i] - c.h_prev[i]) * c.z[i] * (1.0 - c.z[i]);
            dc_pre[i] = dh[i] * c.z[i] * (1.0 - c.candidate[i] * c.candidate[i]);
            dh_prev[i] = dh[i] * (1.0 - c.z[i]);
        }
        let rh: Vec<f64> = c.r.iter().zip(&c.h_prev).map(|(a, b)| a * b).collect();

        grads.w_h.add_outer(&dc_pre, &c.x);
        grads.u_h.add_outer(&dc_pre, &rh);
        add_into(&mut grads.b_h, &dc_pre);
        let d_rh = p.u_h.matvec_t(&dc_pre)?;
        let mut dr_pre = vec![0.0; n];
        for i in 0..n {
            dh_prev[i] += d_rh[i] * c.r[i];
            dr_pre[i] = d_rh[i] * c.h_prev[i] * c.r[i] * (1.0 - c.r[i]);
        }

        grads.w_z.add_outer(&dz_pre, &c.x);
        grads.u_z.add_outer(&dz_pre, &c.h_prev);
        add_into(&mut grads.b_z, &dz_pre);
        grads.w_r.add_outer(&dr_pre, &c.x);
        grads.u_r.add_outer(&dr_pre, &c.h_prev);
        add_into(&mut grads.b_r, &dr_pre);

        let mut dx = p.w_h.matvec_t(&dc_pre)?;
        add_into(&mut dx, &p.w_z.matvec_t(&dz_pre)?);
        add_into(&mut dx, &p.w_r.matvec_t(&dr_pre)?);
        add_into(&mut dh_prev, &p.u_z.matvec_t(&dz_pre)?);
        add_into(&mut dh_prev, &p.u_r.matvec_t(&dr_pre)?);
        dxs[t] = dx;
        dh = dh_prev;
    }
    Ok(dxs)
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn random_params(inputs: usize, hidden: usize, seed: u64) -> GruParams {
        let mut rng = seeded(seed, 0);
        let mut p = GruParams::zeros(inputs, hidden);
        for s in p.slices_mut() {
            for v in s.iter_mut() {
                *v = rng.random_range(-0.8..0.8);
            }
        }
        p
    }

    #[test]
    fn zero_params_halve_the_state() {
        let p = GruParams::zeros(2, 1);
        let h = gru_step(&p, &[0.3, -0.1], &[0.4]).unwrap();
        assert!((h[0] - 0.2).abs() < 1e-15);
        assert_eq!(gru_step(&p, &[0.3, -0.1], &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_zero_param_steps_quarter_the_state() {
        let p = GruParams::zeros(1, 1);
        let h = gru_sequence_forward(&p, &[vec![1.0], vec![-1.0]], &[0.8]).unwrap();
        assert!((h[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn single_step_sequence_matches_step() {
        let p = random_params(3, 4, 1);
        let x = vec![0.1, -0.5, 0.9];
        let h0 = vec![0.2, 0.0, -0.3, 0.7];
        assert_eq!(
            gru_sequence_forward(&p, &[x.clone()], &h0).unwrap(),
            gru_step(&p, &x, &h0).unwrap()
        );
    }

    #[test]
    fn output_depends_on_order() {
        let p = random_params(2, 3, 7);
        let a = vec![0.9, -0.4];
        let b = vec![-0.6, 0.8];
        let h0 = vec![0.0; 3];
        let ab = gru_sequence_forward(&p, &[a.clone(), b.clone()], &h0).unwrap();
        let ba = gru_sequence_forward(&p, &[b, a], &h0).unwrap();
        assert!(ab.iter().zip(&ba).any(|(x, y)| (x - y).abs() > 1e-6));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let p = GruParams::zeros(1, 1);
        assert_eq!(gru_sequence_forward(&p, &[], &[0.0]), Err(NnError::EmptySequence));
    }

    #[test]
    fn wrong_hidden_width_is_rejected() {
        let p = GruParams::zeros(1, 2);
        assert!(matches!(gru_step(&p, &[1.0], &[0.0]), Err(NnError::Dimension { .. })));
    }

    #[test]
    fn gates_stay_in_open_interval() {
        for seed in 0..20 {
            let p = random_params(3, 5, seed);
            let c = step_cached(&p, &[2.0, -3.0, 1.5], &[0.9, -0.9, 0.1, 0.5, -0.2]).unwrap();
            assert!(c.z.iter().chain(&c.r).all(|&g| g > 0.0 && g < 1.0));
            assert!(c.candidate.iter().all(|&v| v.abs() < 1.0));
        }
    }

    #[test]
    fn closed_update_gate_keeps_state() {
        // b_z very negative saturates z to 0 in floating point
        let mut p = random_params(2, 3, 3);
        p.w_z = Matrix2D::zeros(3, 2);
        p.u_z = Matrix2D::zeros(3, 3);
        p.b_z = vec![-1e4; 3];
        let h_prev = vec![0.25, -0.5, 0.75];
        assert_eq!(gru_step(&p, &[1.0, 1.0], &h_prev).unwrap(), h_prev);
    }

    // Central finite differences over every parameter of one step.
    #[test]
    fn step_gradient_matches_finite_differences() {
        let inputs = 3;
        let hidden = 4;
        for seed in 0..5 {
            let p = random_params(inputs, hidden, 100 + seed);
            let x = vec![vec![0.3, -0.7, 0.2]];
            let mut rng = seeded(seed, 9);
            let weights: Vec<f64> = (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect();
            let objective = |q: &GruParams| -> f64 {
                let caches = sequence_cached(q, &x).unwrap();
                caches[0].h.iter().zip(&weights).map(|(h, w)| h * w).sum()
            };
            let caches = sequence_cached(&p, &x).unwrap();
            let mut grads = GruParams::zeros(inputs, hidden);
            sequence_backward(&p, &caches, &weights, &mut grads).unwrap();
            let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();
            let mut idx = 0;
            for k in 0..9 {
                let len = p.slices()[k].len();
                for j in 0..len {
                    let mut plus = p.clone();
                    plus.slices_mut()[k][j] += 1e-3;
                    let mut minus = p.clone();
                    minus.slices_mut()[k][j] -= 1e-3;
                    let numeric = (objective(&plus) - objective(&minus)) / 2e-3;
                    let a = analytic[idx];
                    let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-2);
                    assert!(rel < 1e-4, "seed {seed} slice {k} idx {j}: {a} vs {numeric}");
                    idx += 1;
                }
            }
        }
    }
}
