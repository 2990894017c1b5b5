//! Central finite-difference checks shared by the gradient tests and the
//! acceptance run.

#![allow(dead_code)]

use vae_debias::adversary::{branch_loss, AdversaryParams};
use vae_debias::data::Attribute;
use vae_debias::tensor::{AffineLayer, Matrix, SeededRng};
use vae_debias::trainer::{
    adversary_objective, vae_objective, AdversarialObjective, AdversaryInput, Targets, TrainConfig,
};
use vae_debias::vae::{kl_loss_batch, recon_loss_batch, KlReduction, LatentGrads, VaeParams};

pub const STEP: f64 = 1e-6;
/// Denominator floor: below this the comparison is absolute.
pub const FLOOR: f64 = 1e-6;

pub const D: usize = 16;
pub const L: usize = 4;
pub const HIDDEN: usize = 8;
pub const BATCH: usize = 6;

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FLOOR)
}

pub fn random(rows: usize, cols: usize, rng: &mut SeededRng) -> Matrix {
    Matrix::from_vec(rows, cols, rng.standard_normal(rows * cols)).unwrap()
}

fn nudge(layer: &mut AffineLayer, k: usize, d: f64) {
    let nw = layer.weight().as_slice().len();
    if k < nw {
        layer.weight_mut().as_mut_slice()[k] += d;
    } else {
        layer.bias_mut()[k - nw] += d;
    }
}

fn flat_grads(layer: &AffineLayer) -> Vec<f64> {
    let mut g = layer.grad_weight().as_slice().to_vec();
    g.extend_from_slice(layer.grad_bias());
    g
}

pub fn vae_layer(v: &mut VaeParams, i: usize) -> &mut AffineLayer {
    v.layers_mut().into_iter().nth(i).unwrap()
}

pub fn adv_layer(a: &mut AdversaryParams, i: usize) -> &mut AffineLayer {
    a.layers_mut().nth(i).unwrap()
}

/// Largest relative error between accumulated gradients in `model` and
/// central differences of `loss` over every parameter of every layer.
pub fn max_param_err<M: Clone>(
    model: &M,
    layers: usize,
    layer: fn(&mut M, usize) -> &mut AffineLayer,
    loss: impl Fn(&M) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for li in 0..layers {
        let analytic = flat_grads(layer(&mut probe, li));
        for (k, &a) in analytic.iter().enumerate() {
            let mut plus = model.clone();
            nudge(layer(&mut plus, li), k, STEP);
            let mut minus = model.clone();
            nudge(layer(&mut minus, li), k, -STEP);
            let n = (loss(&plus) - loss(&minus)) / (2.0 * STEP);
            worst = worst.max(rel_err(a, n));
        }
    }
    worst
}

/// Largest relative error of an input gradient against central differences.
pub fn max_input_err(x: &Matrix, analytic: &Matrix, loss: impl Fn(&Matrix) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..x.as_slice().len() {
        let mut plus = x.clone();
        plus.as_mut_slice()[k] += STEP;
        let mut minus = x.clone();
        minus.as_mut_slice()[k] -= STEP;
        let n = (loss(&plus) - loss(&minus)) / (2.0 * STEP);
        worst = worst.max(rel_err(analytic.as_slice()[k], n));
    }
    worst
}

pub fn layer_err(in_dim: usize, out_dim: usize, seed: u64) -> f64 {
    let mut rng = SeededRng::new(seed, "fd-layer");
    let mut layer = AffineLayer::init_uniform(in_dim, out_dim, &mut rng);
    let x = random(BATCH, in_dim, &mut rng);
    let w = random(BATCH, out_dim, &mut rng);
    let loss = |l: &AffineLayer, x: &Matrix| {
        let y = l.forward_batch(x).unwrap();
        y.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b).sum::<f64>()
    };
    layer.zero_grad();
    let gx = layer.backward_batch(&x, &w).unwrap();
    fn only(l: &mut AffineLayer, _: usize) -> &mut AffineLayer {
        l
    }
    let p = max_param_err(&layer, 1, only, |l| loss(l, &x));
    let i = max_input_err(&x, &gx, |x| loss(&layer, x));
    p.max(i)
}

pub struct VaeCase {
    pub vae: VaeParams,
    pub x: Matrix,
    pub eps: Matrix,
}

pub fn vae_case(seed: u64) -> VaeCase {
    let mut rng = SeededRng::new(seed, "fd-vae");
    VaeCase {
        vae: VaeParams::init(D, L, &mut rng),
        x: random(BATCH, D, &mut rng),
        eps: random(BATCH, L, &mut rng),
    }
}

pub fn recon_err(seed: u64) -> f64 {
    let VaeCase { mut vae, x, eps } = vae_case(seed);
    let pass = vae.forward_batch(&x, &eps).unwrap();
    let (_, g) = recon_loss_batch(&x, &pass.x_hat).unwrap();
    vae.zero_grad();
    vae.backward_batch(&x, &eps, &pass, &g, LatentGrads::zeros(BATCH, L)).unwrap();
    max_param_err(&vae, 3, vae_layer, |v| {
        recon_loss_batch(&x, &v.forward_batch(&x, &eps).unwrap().x_hat).unwrap().0
    })
}

pub fn kl_err(seed: u64, reduction: KlReduction) -> f64 {
    let VaeCase { mut vae, x, eps } = vae_case(seed);
    let pass = vae.forward_batch(&x, &eps).unwrap();
    let (_, gmu, glv) = kl_loss_batch(&pass.mu, &pass.logvar, reduction).unwrap();
    vae.zero_grad();
    let extra = LatentGrads {
        mu: gmu,
        logvar: glv,
        z: Matrix::zeros(BATCH, L),
    };
    vae.backward_batch(&x, &eps, &pass, &Matrix::zeros(BATCH, D), extra).unwrap();
    max_param_err(&vae, 3, vae_layer, |v| {
        let p = v.forward_batch(&x, &eps).unwrap();
        kl_loss_batch(&p.mu, &p.logvar, reduction).unwrap().0
    })
}

pub fn targets(seed: u64) -> Targets {
    let mut rng = SeededRng::new(seed, "fd-targets");
    let mut t = Targets::new();
    t.insert(Attribute::Sex, (0..BATCH).map(|i| (i % 2) as f64).collect());
    t.insert(Attribute::Age, rng.standard_normal(BATCH));
    t
}

pub fn adversary(seed: u64) -> AdversaryParams {
    let mut rng = SeededRng::new(seed, "fd-adversary");
    AdversaryParams::init(L, &[Attribute::Sex, Attribute::Age], &[HIDDEN], &mut rng)
}

/// BCE (sex branch) and MSE (age branch) separately, parameters and input.
pub fn branch_err(seed: u64, attribute: Attribute) -> f64 {
    let mut rng = SeededRng::new(seed, "fd-branch");
    let z = random(BATCH, L, &mut rng);
    let t = targets(seed);
    let y = t[&attribute].clone();
    let mut adv = adversary(seed);
    adv.branches.retain(|b| b.attribute == attribute);
    let b = &mut adv.branches[0];
    b.layers.iter_mut().for_each(AffineLayer::zero_grad);
    let cache = b.forward_batch(&z).unwrap();
    let (_, g) = branch_loss(b.kind, &cache.output, &y).unwrap();
    let gz = b.backward_batch(&cache, &g).unwrap();
    let gz_ro = b.input_grad(&cache, &g).unwrap();
    assert_eq!(gz, gz_ro);
    let loss = |a: &AdversaryParams, z: &Matrix| {
        let b = &a.branches[0];
        branch_loss(b.kind, &b.forward_batch(z).unwrap().output, &y).unwrap().0
    };
    let n = adv.layers().count();
    let p = max_param_err(&adv, n, adv_layer, |a| loss(a, &z));
    let i = max_input_err(&z, &gz, |z| loss(&adv, z));
    p.max(i)
}

/// Adversary step objective against its own parameters.
pub fn adversary_step_err(seed: u64) -> f64 {
    let mut rng = SeededRng::new(seed, "fd-step-a");
    let z = random(BATCH, L, &mut rng);
    let t = targets(seed);
    let mut adv = adversary(seed);
    adv.zero_grad();
    adversary_objective(&mut adv, &z, &t).unwrap();
    let n = adv.layers().count();
    max_param_err(&adv, n, adv_layer, |a| adversary_objective(&mut a.clone(), &z, &t).unwrap())
}

pub fn min_max_config(objective: AdversarialObjective, input: AdversaryInput) -> TrainConfig {
    TrainConfig {
        latent_dim: L,
        adversary_hidden: vec![HIDDEN],
        lambda_adv: 0.7,
        beta_kl: 0.3,
        objective,
        adversary_input: input,
        ..TrainConfig::default()
    }
}

/// Encoder/decoder objective against VAE parameters, adversary frozen.
pub fn vae_step_err(seed: u64, objective: AdversarialObjective, input: AdversaryInput) -> f64 {
    let VaeCase { mut vae, x, eps } = vae_case(seed);
    let adv = adversary(seed);
    let t = targets(seed);
    let cfg = min_max_config(objective, input);
    vae.zero_grad();
    vae_objective(&mut vae, &adv, &x, &eps, &t, &cfg).unwrap();
    max_param_err(&vae, 3, vae_layer, |v| {
        vae_objective(&mut v.clone(), &adv, &x, &eps, &t, &cfg).unwrap().total
    })
}

/// Every check, as (name, max relative error).
pub fn gradient_suite() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (i, (a, b)) in [(1, 1), (4, 6), (16, 8)].into_iter().enumerate() {
        out.push((format!("affine {a}x{b}"), layer_err(a, b, i as u64)));
    }
    out.push(("recon".into(), recon_err(1)));
    out.push(("kl (mean)".into(), kl_err(2, KlReduction::Mean)));
    out.push(("kl (sum)".into(), kl_err(3, KlReduction::Sum)));
    out.push(("bce branch".into(), branch_err(4, Attribute::Sex)));
    out.push(("mse branch".into(), branch_err(5, Attribute::Age)));
    out.push(("adversary step".into(), adversary_step_err(6)));
    for (k, obj) in [AdversarialObjective::Confusion, AdversarialObjective::Reversal].into_iter().enumerate() {
        for (j, input) in [AdversaryInput::Mean, AdversaryInput::Sample].into_iter().enumerate() {
            out.push((format!("vae step {obj}/{input}"), vae_step_err(7 + 2 * k as u64 + j as u64, obj, input)));
        }
    }
    out
}
