use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use super::rng::SeededRng;
use crate::error::{check_len, Error, Result};

/// `y = W·x + b` with gradient buffers.
///
/// Gradients accumulate across `backward` calls until `zero_grad`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LayerRepr", into = "LayerRepr")]
pub struct AffineLayer {
    weight: Matrix,
    bias: Vec<f64>,
    grad_weight: Matrix,
    grad_bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LayerRepr {
    weight: Matrix,
    bias: Vec<f64>,
}

impl TryFrom<LayerRepr> for AffineLayer {
    type Error = Error;

    fn try_from(r: LayerRepr) -> Result<Self> {
        AffineLayer::from_parts(r.weight, r.bias)
    }
}

impl From<AffineLayer> for LayerRepr {
    fn from(l: AffineLayer) -> Self {
        LayerRepr {
            weight: l.weight,
            bias: l.bias,
        }
    }
}

impl PartialEq for AffineLayer {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.bias == other.bias
    }
}

impl AffineLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        AffineLayer {
            weight: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
            grad_weight: Matrix::zeros(out_dim, in_dim),
            grad_bias: vec![0.0; out_dim],
        }
    }

    /// Weights uniform in `±1/√in_dim`, zero bias.
    pub fn init_uniform(in_dim: usize, out_dim: usize, rng: &mut SeededRng) -> Self {
        let mut l = AffineLayer::zeros(in_dim, out_dim);
        let bound = 1.0 / (in_dim as f64).sqrt();
        for w in l.weight.as_mut_slice() {
            *w = rng.uniform_range(-bound, bound);
        }
        l
    }

    pub fn from_parts(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        check_len("layer bias", weight.rows(), bias.len())?;
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("layer parameters".into()));
        }
        let grad_weight = Matrix::zeros(weight.rows(), weight.cols());
        let grad_bias = vec![0.0; bias.len()];
        Ok(AffineLayer {
            weight,
            bias,
            grad_weight,
            grad_bias,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight_mut(&mut self) -> &mut Matrix {
        &mut self.weight
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn grad_weight(&self) -> &Matrix {
        &self.grad_weight
    }

    pub fn grad_bias(&self) -> &[f64] {
        &self.grad_bias
    }

    /// Parameter and gradient slices, weight block then bias block.
    pub fn blocks_mut(&mut self) -> [(&mut [f64], &[f64]); 2] {
        [
            (self.weight.as_mut_slice(), self.grad_weight.as_slice()),
            (&mut self.bias[..], &self.grad_bias[..]),
        ]
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("affine input", self.in_dim(), x.len())?;
        Ok(self
            .weight
            .iter_rows()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect())
    }

    /// Accumulates `grad_out ⊗ x` and `grad_out`; returns `Wᵀ·grad_out`.
    pub fn backward(&mut self, x: &[f64], grad_out: &[f64]) -> Result<Vec<f64>> {
        check_len("affine input", self.in_dim(), x.len())?;
        check_len("affine output gradient", self.out_dim(), grad_out.len())?;
        let mut grad_in = vec![0.0; self.in_dim()];
        for (o, &g) in grad_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            self.grad_bias[o] += g;
            let gw = self.grad_weight.row_mut(o);
            for (gwi, xi) in gw.iter_mut().zip(x) {
                *gwi += g * xi;
            }
            for (gi, wi) in grad_in.iter_mut().zip(self.weight.row(o)) {
                *gi += g * wi;
            }
        }
        Ok(grad_in)
    }

    /// Row-wise forward over a batch (`batch × in` → `batch × out`).
    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul_nt(&self.weight)?;
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(y)
    }

    /// Batched `backward`: rows are summed in index order.
    pub fn backward_batch(&mut self, x: &Matrix, grad_out: &Matrix) -> Result<Matrix> {
        check_len("affine batch input", self.in_dim(), x.cols())?;
        check_len("affine batch gradient", self.out_dim(), grad_out.cols())?;
        check_len("affine batch rows", x.rows(), grad_out.rows())?;
        let gw = grad_out.matmul_tn(x)?;
        for (a, b) in self.grad_weight.as_mut_slice().iter_mut().zip(gw.as_slice()) {
            *a += b;
        }
        for g in grad_out.iter_rows() {
            for (a, b) in self.grad_bias.iter_mut().zip(g) {
                *a += b;
            }
        }
        grad_out.matmul(&self.weight)
    }

    /// Input gradient only; parameter gradients are left alone.
    pub fn backward_input_batch(&self, grad_out: &Matrix) -> Result<Matrix> {
        grad_out.matmul(&self.weight)
    }

    pub fn is_finite(&self) -> bool {
        self.weight.is_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer() {
        let l = AffineLayer::from_parts(Matrix::identity(2), vec![0.0; 2]).unwrap();
        assert_eq!(l.forward(&[2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn hand_forward() {
        let w = Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let l = AffineLayer::from_parts(w, vec![1.0]).unwrap();
        assert_eq!(l.forward(&[3.0, 4.0]).unwrap(), vec![12.0]);
    }

    #[test]
    fn scalar_chain_rule() {
        let w = Matrix::from_vec(1, 1, vec![3.0]).unwrap();
        let mut l = AffineLayer::from_parts(w, vec![0.0]).unwrap();
        let gi = l.backward(&[2.0], &[5.0]).unwrap();
        assert_eq!(gi, vec![15.0]);
        assert_eq!(l.grad_weight().as_slice(), &[10.0]);
        assert_eq!(l.grad_bias(), &[5.0]);
    }

    #[test]
    fn zero_grad_out_is_inert() {
        let mut rng = SeededRng::new(3, "t");
        let mut l = AffineLayer::init_uniform(3, 2, &mut rng);
        let gi = l.backward(&[1.0, -2.0, 0.5], &[0.0, 0.0]).unwrap();
        assert_eq!(gi, vec![0.0; 3]);
        assert!(l.grad_weight().as_slice().iter().all(|&g| g == 0.0));
        assert!(l.grad_bias().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn shape_errors_name_dimensions() {
        let l = AffineLayer::zeros(3, 2);
        let e = l.forward(&[1.0]).unwrap_err().to_string();
        assert!(e.contains('3') && e.contains('1'), "{e}");
    }

    #[test]
    fn batch_matches_single() {
        let mut rng = SeededRng::new(9, "t");
        let mut a = AffineLayer::init_uniform(5, 3, &mut rng);
        let mut b = a.clone();
        let x = Matrix::from_vec(2, 5, rng.standard_normal(10)).unwrap();
        let g = Matrix::from_vec(2, 3, rng.standard_normal(6)).unwrap();
        let y = a.forward_batch(&x).unwrap();
        let gi = a.backward_batch(&x, &g).unwrap();
        for r in 0..2 {
            let ys = b.forward(x.row(r)).unwrap();
            let gs = b.backward(x.row(r), g.row(r)).unwrap();
            for (p, q) in y.row(r).iter().zip(&ys) {
                assert!((p - q).abs() < 1e-12);
            }
            for (p, q) in gi.row(r).iter().zip(&gs) {
                assert!((p - q).abs() < 1e-12);
            }
        }
        for (p, q) in a.grad_weight().as_slice().iter().zip(b.grad_weight().as_slice()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_length_checked() {
        assert!(AffineLayer::from_parts(Matrix::zeros(2, 2), vec![0.0]).is_err());
    }
}
