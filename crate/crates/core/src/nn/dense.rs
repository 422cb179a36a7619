use alloc::vec::Vec;

use super::error::{check_len, NnError};
use super::matrix::Matrix2D;

/// Affine layer parameters; `weights` is `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub weights: Matrix2D,
    pub bias: Vec<f64>,
}

impl DenseParams {
    pub fn new(weights: Matrix2D, bias: Vec<f64>) -> Result<Self, NnError> {
        check_len("dense bias", weights.rows(), bias.len())?;
        Ok(Self { weights, bias })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weights: Matrix2D::zeros(outputs, inputs), bias: alloc::vec![0.0; outputs] }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }
}

/// `W·x + b`; the activation is applied by the caller.
pub fn dense_forward(p: &DenseParams, x: &[f64]) -> Result<Vec<f64>, NnError> {
    let mut y = p.weights.matvec(x)?;
    for (v, b) in y.iter_mut().zip(&p.bias) {
        *v += b;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_passes_input_through() {
        let p = DenseParams::new(Matrix2D::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(dense_forward(&p, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn small_affine_map() {
        let w = Matrix2D::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        let p = DenseParams::new(w, vec![1.0, 0.0]).unwrap();
        assert_eq!(dense_forward(&p, &[1.0, 1.0]).unwrap(), vec![4.0, 1.0]);
    }

    #[test]
    fn zero_weights_return_bias() {
        let p = DenseParams::new(Matrix2D::zeros(1, 3), vec![0.7]).unwrap();
        assert_eq!(dense_forward(&p, &[5.0, -2.0, 9.0]).unwrap(), vec![0.7]);
    }

    #[test]
    fn mismatched_input_is_a_dimension_error() {
        let p = DenseParams::zeros(3, 2);
        assert!(matches!(
            dense_forward(&p, &[1.0]),
            Err(NnError::Dimension { expected: (2, 3), found: (1, 1), .. })
        ));
        assert!(DenseParams::new(Matrix2D::zeros(2, 2), vec![0.0]).is_err());
    }
}
