use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingDataset, Split, Task, STD_FLOOR};
use crate::error::{check_len, Error, Result};
use crate::tensor::{dot, sigmoid, Matrix};

pub const LOGISTIC_LR: f64 = 0.1;
pub const LOGISTIC_MAX_ITERS: usize = 500;
pub const LOGISTIC_GRAD_TOL: f64 = 1e-6;
pub const RIDGE: f64 = 1e-6;

/// Binary label read by a logistic probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeLabel {
    Sex,
    Task(Task),
}

impl ProbeLabel {
    pub fn of(self, r: &crate::data::EmbeddingRecord) -> u8 {
        match self {
            ProbeLabel::Sex => r.sex,
            ProbeLabel::Task(t) => r.label(t),
        }
    }
}

/// Column means and floored standard deviations of `x`.
fn column_moments(x: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows().max(1) as f64;
    let mut mean = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
    (mean, std)
}

fn standardized(x: &Matrix, mean: &[f64], std: &[f64]) -> Matrix {
    let mut z = x.clone();
    for r in 0..z.rows() {
        for ((v, m), s) in z.row_mut(r).iter_mut().zip(mean).zip(std) {
            *v = (*v - m) / s;
        }
    }
    z
}

/// Logistic regression fitted by full-batch gradient descent on internally
/// standardized features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticProbe {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Weights on standardized features.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub final_loss: f64,
}

impl LogisticProbe {
    /// Zero init, step 0.1, at most 500 steps, stops once the gradient norm
    /// drops below 1e-6.
    pub fn fit(x: &Matrix, y: &[u8]) -> Result<Self> {
        check_len("probe labels", x.rows(), y.len())?;
        let pos = y.iter().filter(|&&v| v == 1).count();
        if pos == 0 || pos == y.len() {
            return Err(Error::Metric("logistic probe needs both classes in the train split".into()));
        }
        let (mean, std) = column_moments(x);
        let z = standardized(x, &mean, &std);
        let n = z.rows() as f64;
        let mut w = vec![0.0; z.cols()];
        let mut b = 0.0;
        let mut iterations = 0;
        let mut gw = vec![0.0; z.cols()];
        for _ in 0..LOGISTIC_MAX_ITERS {
            gw.fill(0.0);
            let mut gb = 0.0;
            for (row, &yi) in z.iter_rows().zip(y) {
                let r = sigmoid(dot(row, &w) + b) - yi as f64;
                gb += r;
                for (g, v) in gw.iter_mut().zip(row) {
                    *g += r * v;
                }
            }
            gw.iter_mut().for_each(|g| *g /= n);
            gb /= n;
            let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            if norm < LOGISTIC_GRAD_TOL {
                break;
            }
            for (wi, g) in w.iter_mut().zip(&gw) {
                *wi -= LOGISTIC_LR * g;
            }
            b -= LOGISTIC_LR * gb;
            iterations += 1;
        }
        let final_loss = z
            .iter_rows()
            .zip(y)
            .map(|(row, &yi)| crate::adversary::bce(sigmoid(dot(row, &w) + b), yi as f64))
            .sum::<f64>()
            / n;
        Ok(LogisticProbe {
            mean,
            std,
            weights: w,
            bias: b,
            iterations,
            final_loss,
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .zip(&self.weights)
            .map(|(((v, m), s), w)| (v - m) / s * w)
            .sum();
        sigmoid(s + self.bias)
    }

    pub fn predict_batch(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict_proba(r)).collect()
    }
}

/// Least squares with ridge damping on the standardized Gram matrix; the
/// intercept is recovered from the centered target and is not damped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProbe {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub target_mean: f64,
    /// Weights on standardized features.
    pub weights: Vec<f64>,
}

impl LinearProbe {
    pub fn fit(x: &Matrix, y: &[f64]) -> Result<Self> {
        check_len("probe targets", x.rows(), y.len())?;
        if y.is_empty() {
            return Err(Error::Metric("linear probe needs a non-empty train split".into()));
        }
        let (mean, std) = column_moments(x);
        let z = standardized(x, &mean, &std);
        let target_mean = y.iter().sum::<f64>() / y.len() as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - target_mean).collect();
        let d = z.cols();
        let gram = z.matmul_tn(&z)?;
        let mut g = DMatrix::from_row_slice(d, d, gram.as_slice());
        for i in 0..d {
            g[(i, i)] += RIDGE;
        }
        let mut rhs = DVector::zeros(d);
        for (row, t) in z.iter_rows().zip(&yc) {
            for (j, v) in row.iter().enumerate() {
                rhs[j] += v * t;
            }
        }
        let w = match g.clone().cholesky() {
            Some(c) => c.solve(&rhs),
            None => g
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numeric("linear probe normal equations".into()))?,
        };
        Ok(LinearProbe {
            mean,
            std,
            target_mean,
            weights: w.iter().copied().collect(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.target_mean
            + x.iter()
                .zip(&self.mean)
                .zip(&self.std)
                .zip(&self.weights)
                .map(|(((v, m), s), w)| (v - m) / s * w)
                .sum::<f64>()
    }

    pub fn predict_batch(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }

    /// Weights and intercept in raw feature units.
    pub fn raw_coefficients(&self) -> (Vec<f64>, f64) {
        let w: Vec<f64> = self.weights.iter().zip(&self.std).map(|(w, s)| w / s).collect();
        let b = self.target_mean - dot(&w, &self.mean);
        (w, b)
    }
}

/// Fits on the train split only; test records are never read.
pub fn fit_logistic_probe(dataset: &EmbeddingDataset, label: ProbeLabel) -> Result<LogisticProbe> {
    let idx = dataset.split_indices(Split::Train);
    let y: Vec<u8> = idx.iter().map(|&i| label.of(&dataset.records()[i])).collect();
    LogisticProbe::fit(&dataset.features(&idx), &y)
}

/// Age regression on the train split only.
pub fn fit_linear_probe(dataset: &EmbeddingDataset) -> Result<LinearProbe> {
    let idx = dataset.split_indices(Split::Train);
    let y: Vec<f64> = idx.iter().map(|&i| dataset.records()[i].age).collect();
    LinearProbe::fit(&dataset.features(&idx), &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::auc;

    #[test]
    fn separable_line() {
        let x = Matrix::from_vec(6, 1, vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]).unwrap();
        let y = [0, 0, 0, 1, 1, 1];
        let p = LogisticProbe::fit(&x, &y).unwrap();
        assert_eq!(auc(&p.predict_batch(&x), &y).unwrap(), 1.0);
        assert_eq!(p.iterations, LOGISTIC_MAX_ITERS);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::zeros(3, 2);
        assert!(LogisticProbe::fit(&x, &[1, 1, 1]).is_err());
    }

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.37 - 2.0).collect();
        let y: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
        let p = LinearProbe::fit(&Matrix::from_vec(20, 1, xs).unwrap(), &y).unwrap();
        let (w, b) = p.raw_coefficients();
        assert!((w[0] - 2.0).abs() < 1e-6, "{w:?}");
        assert!((b - 1.0).abs() < 1e-6, "{b}");
    }

    #[test]
    fn constant_target() {
        let x = Matrix::from_vec(4, 2, vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.0, 2.0, 2.0]).unwrap();
        let p = LinearProbe::fit(&x, &[5.0; 4]).unwrap();
        let (w, b) = p.raw_coefficients();
        assert!(w.iter().all(|v| v.abs() < 1e-12));
        assert!((b - 5.0).abs() < 1e-12);
    }
}
