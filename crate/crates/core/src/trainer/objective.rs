use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::config::{AdversarialObjective, AdversaryInput, TrainConfig};
use crate::adversary::{branch_loss, check_binary, AdversaryParams, BranchKind};
use crate::data::Attribute;
use crate::error::{check_len, Error, Result};
use crate::tensor::Matrix;
use crate::vae::{kl_loss_batch, recon_loss_batch, LatentGrads, VaeParams};

/// Per-attribute target columns for one batch.
pub type Targets = BTreeMap<Attribute, Vec<f64>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VaeLosses {
    pub recon: f64,
    pub kl: f64,
    /// The adversary's own loss on this batch (sum over branches).
    pub adv: f64,
    /// The objective the encoder and decoder minimize.
    pub total: f64,
}

/// The latent matrix the adversary reads for this batch.
pub fn adversary_input(vae: &VaeParams, x: &Matrix, eps: &Matrix, which: AdversaryInput) -> Result<Matrix> {
    match which {
        AdversaryInput::Mean => vae.encode_mu_batch(x),
        AdversaryInput::Sample => Ok(vae.forward_batch(x, eps)?.z),
    }
}

fn targets_for(targets: &Targets, a: Attribute, rows: usize) -> Result<&[f64]> {
    let t = targets
        .get(&a)
        .ok_or_else(|| Error::config("attributes", format!("no targets for {a}")))?;
    check_len("target rows", rows, t.len())?;
    Ok(t)
}

/// Summed adversary loss on a fixed latent input. Accumulates adversary
/// gradients; nothing upstream is touched.
pub fn adversary_objective(adv: &mut AdversaryParams, input: &Matrix, targets: &Targets) -> Result<f64> {
    let mut total = 0.0;
    for b in &mut adv.branches {
        let t = targets_for(targets, b.attribute, input.rows())?;
        if b.kind == BranchKind::Binary {
            t.iter().try_for_each(|&y| check_binary(b.attribute, y))?;
        }
        let cache = b.forward_batch(input)?;
        let (loss, g) = branch_loss(b.kind, &cache.output, t)?;
        b.backward_batch(&cache, &g)?;
        total += loss;
    }
    Ok(total)
}

/// Encoder/decoder objective for one batch with fixed noise `eps`.
///
/// Accumulates gradients into the VAE only; the adversary is read but
/// never modified.
pub fn vae_objective(
    vae: &mut VaeParams,
    adv: &AdversaryParams,
    x: &Matrix,
    eps: &Matrix,
    targets: &Targets,
    cfg: &TrainConfig,
) -> Result<VaeLosses> {
    let pass = vae.forward_batch(x, eps)?;
    let (recon, g_xhat) = recon_loss_batch(x, &pass.x_hat)?;
    let (kl, mut g_mu, mut g_lv) = kl_loss_batch(&pass.mu, &pass.logvar, cfg.kl_reduction)?;
    scale(&mut g_mu, cfg.beta_kl);
    scale(&mut g_lv, cfg.beta_kl);
    let mut extra = LatentGrads {
        mu: g_mu,
        logvar: g_lv,
        z: Matrix::zeros(x.rows(), vae.latent_dim()),
    };

    let input = match cfg.adversary_input {
        AdversaryInput::Mean => &pass.mu,
        AdversaryInput::Sample => &pass.z,
    };
    let mut adv_loss = 0.0;
    let mut penalty = 0.0;
    for b in &adv.branches {
        let t = targets_for(targets, b.attribute, x.rows())?;
        let cache = b.forward_batch(input)?;
        let (loss, g_true) = branch_loss(b.kind, &cache.output, t)?;
        adv_loss += loss;
        if cfg.lambda_adv == 0.0 {
            continue;
        }
        let mut g = match cfg.objective {
            AdversarialObjective::Reversal => {
                penalty -= loss;
                g_true.iter().map(|v| -v).collect::<Vec<_>>()
            }
            AdversarialObjective::Confusion => {
                let (neutral, offset) = match b.kind {
                    BranchKind::Binary => (0.5, LN_2),
                    BranchKind::Continuous => (0.0, 0.0),
                };
                let (c, g) = branch_loss(b.kind, &cache.output, &vec![neutral; x.rows()])?;
                penalty += c - offset;
                g
            }
        };
        g.iter_mut().for_each(|v| *v *= cfg.lambda_adv);
        let g_in = b.input_grad(&cache, &g)?;
        let target = match cfg.adversary_input {
            AdversaryInput::Mean => &mut extra.mu,
            AdversaryInput::Sample => &mut extra.z,
        };
        for (a, v) in target.as_mut_slice().iter_mut().zip(g_in.as_slice()) {
            *a += v;
        }
    }
    vae.backward_batch(x, eps, &pass, &g_xhat, extra)?;
    Ok(VaeLosses {
        recon,
        kl,
        adv: adv_loss,
        total: recon + cfg.beta_kl * kl + cfg.lambda_adv * penalty,
    })
}

fn scale(m: &mut Matrix, s: f64) {
    m.as_mut_slice().iter_mut().for_each(|v| *v *= s);
}
