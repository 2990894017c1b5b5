use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use vae_debias::adversary::bce;
use vae_debias::data::{synth_generate, EmbeddingDataset, Split, SynthConfig, Task};
use vae_debias::eval::{
    auc, eod, fit_linear_probe, fit_logistic_probe, LinearProbe, LogisticProbe, ProbeLabel, LOGISTIC_LR,
    LOGISTIC_MAX_ITERS,
};
use vae_debias::tensor::{Matrix, SeededRng};
use vae_debias::vae::kl_loss;

#[test]
fn loss_values() {
    assert_eq!(kl_loss(&[0.0], &[0.0]).unwrap(), 0.0);
    assert_eq!(kl_loss(&[1.0], &[0.0]).unwrap(), 0.5);
    assert!((bce(0.5, 1.0) - LN_2).abs() <= 1e-12);
    assert!((bce(0.5, 0.0) - LN_2).abs() <= 1e-12);
}

#[test]
fn auc_worked_example() {
    assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
}

#[test]
fn eod_from_tprs_point_eight_and_point_six() {
    // group a: 4 of 5 positives flagged; group b: 3 of 5.
    let scores = [0.9, 0.9, 0.9, 0.9, 0.1, 0.9, 0.9, 0.9, 0.1, 0.1];
    let labels = [1u8; 10];
    let in_b = [false, false, false, false, false, true, true, true, true, true];
    let e = eod(&scores, &labels, &in_b, 0.5).unwrap();
    assert_eq!(e.tpr_a, Some(0.8));
    assert_eq!(e.tpr_b, Some(0.6));
    assert_eq!(e.eod, Some(0.2));
}

fn regression_data(n: usize, d: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = SeededRng::new(seed, "oracle-linear");
    let mut x = Matrix::from_vec(n, d, rng.standard_normal(n * d)).unwrap();
    for r in 0..n {
        for c in 0..d {
            // uneven scales and offsets so standardization matters
            let v = x.get(r, c) * (1.0 + c as f64) + 3.0 * c as f64;
            x.set(r, c, v);
        }
    }
    let w: Vec<f64> = (0..d).map(|c| 0.5 - 0.3 * c as f64).collect();
    let y = (0..n)
        .map(|r| 60.0 + (0..d).map(|c| w[c] * x.get(r, c)).sum::<f64>() + 0.5 * rng.normal())
        .collect();
    (x, y)
}

#[test]
fn linear_probe_matches_pseudo_inverse() {
    let (n, d) = (40, 5);
    let (x, y) = regression_data(n, d, 3);
    let probe = LinearProbe::fit(&x, &y).unwrap();
    let (w, b) = probe.raw_coefficients();

    let mut a = DMatrix::zeros(n, d + 1);
    for r in 0..n {
        for c in 0..d {
            a[(r, c)] = x.get(r, c);
        }
        a[(r, d)] = 1.0;
    }
    let beta = a.pseudo_inverse(1e-12).unwrap() * DVector::from_vec(y.clone());
    for c in 0..d {
        assert!((w[c] - beta[c]).abs() <= 1e-6 * beta[c].abs().max(1.0), "w[{c}] {} vs {}", w[c], beta[c]);
    }
    assert!((b - beta[d]).abs() <= 1e-5, "intercept {b} vs {}", beta[d]);
    for r in 0..n {
        let p = beta.rows(0, d).dot(&DVector::from_row_slice(x.row(r))) + beta[d];
        assert!((probe.predict(x.row(r)) - p).abs() <= 1e-6);
    }
}

/// Same recipe written with whole-matrix products.
fn reference_descent(x: &Matrix, y: &[u8]) -> (DVector<f64>, f64) {
    let (n, d) = (x.rows(), x.cols());
    let raw = DMatrix::from_row_slice(n, d, x.as_slice());
    let mean = raw.row_mean();
    let mut z = raw.clone();
    for c in 0..d {
        let col = raw.column(c);
        let m = mean[c];
        let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
        for r in 0..n {
            z[(r, c)] = (raw[(r, c)] - m) / sd;
        }
    }
    let yv = DVector::from_iterator(n, y.iter().map(|&v| v as f64));
    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    for _ in 0..LOGISTIC_MAX_ITERS {
        let p = (&z * &w).map(|s| 1.0 / (1.0 + (-(s + b)).exp()));
        let resid = p - &yv;
        let gw = z.transpose() * &resid / n as f64;
        let gb = resid.sum() / n as f64;
        if (gw.norm_squared() + gb * gb).sqrt() < 1e-6 {
            break;
        }
        w -= LOGISTIC_LR * gw;
        b -= LOGISTIC_LR * gb;
    }
    (w, b)
}

#[test]
fn logistic_probe_matches_reference_descent() {
    let pts = [
        [0.0, 1.0],
        [1.0, 2.5],
        [2.0, 0.5],
        [3.0, 3.0],
        [0.5, -1.0],
        [1.5, 0.0],
        [2.5, 2.0],
        [3.5, 1.0],
    ];
    let y = [0u8, 0, 1, 1, 0, 0, 1, 0];
    let x = Matrix::from_rows(&pts, 2).unwrap();
    let p = LogisticProbe::fit(&x, &y).unwrap();
    let (w, b) = reference_descent(&x, &y);
    for c in 0..2 {
        assert!((p.weights[c] - w[c]).abs() <= 1e-10, "w[{c}] {} vs {}", p.weights[c], w[c]);
    }
    assert!((p.bias - b).abs() <= 1e-10);
    assert_eq!(p.iterations, LOGISTIC_MAX_ITERS);
    assert!(p.final_loss < LN_2);
}

fn corrupt_test_labels(ds: &EmbeddingDataset) -> EmbeddingDataset {
    let recs = ds
        .records()
        .iter()
        .cloned()
        .map(|mut r| {
            if r.split == Split::Test {
                r.sex = 1 - r.sex;
                r.cancer_1y = 1 - r.cancer_1y;
                r.cancer_2y = 1 - r.cancer_2y;
                r.age = 130.0 - r.age;
            }
            r
        })
        .collect();
    EmbeddingDataset::new(ds.dimension(), recs).unwrap()
}

#[test]
fn probes_never_read_test_labels() {
    let cfg = SynthConfig {
        n_train: 300,
        n_test: 120,
        ..SynthConfig::default()
    };
    let ds = synth_generate(&cfg).unwrap();
    let bad = corrupt_test_labels(&ds);
    assert_ne!(ds, bad);
    for label in [ProbeLabel::Sex, ProbeLabel::Task(Task::Cancer1y), ProbeLabel::Task(Task::Cancer2y)] {
        assert_eq!(fit_logistic_probe(&ds, label).unwrap(), fit_logistic_probe(&bad, label).unwrap());
    }
    assert_eq!(fit_linear_probe(&ds).unwrap(), fit_linear_probe(&bad).unwrap());
}
