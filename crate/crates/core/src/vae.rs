//! Linear VAE: affine encoder to mean and log-variance, reparameterized
//! sample, affine decoder.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tensor::{AffineLayer, Matrix, SeededRng};

pub const LOGVAR_CLAMP: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VaeRepr", into = "VaeRepr")]
pub struct VaeParams {
    enc_mu: AffineLayer,
    enc_logvar: AffineLayer,
    dec: AffineLayer,
}

#[derive(Serialize, Deserialize)]
struct VaeRepr {
    enc_mu: AffineLayer,
    enc_logvar: AffineLayer,
    dec: AffineLayer,
}

impl TryFrom<VaeRepr> for VaeParams {
    type Error = Error;

    fn try_from(r: VaeRepr) -> Result<Self> {
        VaeParams::from_layers(r.enc_mu, r.enc_logvar, r.dec)
    }
}

impl From<VaeParams> for VaeRepr {
    fn from(v: VaeParams) -> Self {
        VaeRepr {
            enc_mu: v.enc_mu,
            enc_logvar: v.enc_logvar,
            dec: v.dec,
        }
    }
}

/// Everything the backward pass needs from one batched forward pass.
#[derive(Clone, Debug)]
pub struct VaePass {
    pub mu: Matrix,
    pub logvar_raw: Matrix,
    pub logvar: Matrix,
    pub z: Matrix,
    pub x_hat: Matrix,
}

/// Extra upstream gradients entering the latent variables.
#[derive(Clone, Debug)]
pub struct LatentGrads {
    pub mu: Matrix,
    pub logvar: Matrix,
    pub z: Matrix,
}

impl LatentGrads {
    pub fn zeros(batch: usize, latent: usize) -> Self {
        LatentGrads {
            mu: Matrix::zeros(batch, latent),
            logvar: Matrix::zeros(batch, latent),
            z: Matrix::zeros(batch, latent),
        }
    }
}

impl VaeParams {
    pub fn init(input_dim: usize, latent_dim: usize, rng: &mut SeededRng) -> Self {
        VaeParams {
            enc_mu: AffineLayer::init_uniform(input_dim, latent_dim, rng),
            enc_logvar: AffineLayer::init_uniform(input_dim, latent_dim, rng),
            dec: AffineLayer::init_uniform(latent_dim, input_dim, rng),
        }
    }

    pub fn from_layers(enc_mu: AffineLayer, enc_logvar: AffineLayer, dec: AffineLayer) -> Result<Self> {
        let (d, l) = (enc_mu.in_dim(), enc_mu.out_dim());
        if l == 0 {
            return Err(Error::config("latent_dim", "must be at least 1"));
        }
        check_len("logvar encoder input", d, enc_logvar.in_dim())?;
        check_len("logvar encoder output", l, enc_logvar.out_dim())?;
        check_len("decoder input", l, dec.in_dim())?;
        check_len("decoder output", d, dec.out_dim())?;
        Ok(VaeParams {
            enc_mu,
            enc_logvar,
            dec,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.enc_mu.in_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.enc_mu.out_dim()
    }

    pub fn enc_mu(&self) -> &AffineLayer {
        &self.enc_mu
    }

    pub fn enc_logvar(&self) -> &AffineLayer {
        &self.enc_logvar
    }

    pub fn dec(&self) -> &AffineLayer {
        &self.dec
    }

    pub fn layers(&self) -> [&AffineLayer; 3] {
        [&self.enc_mu, &self.enc_logvar, &self.dec]
    }

    pub fn layers_mut(&mut self) -> [&mut AffineLayer; 3] {
        [&mut self.enc_mu, &mut self.enc_logvar, &mut self.dec]
    }

    pub fn zero_grad(&mut self) {
        self.layers_mut().into_iter().for_each(AffineLayer::zero_grad);
    }

    pub fn is_finite(&self) -> bool {
        self.layers().iter().all(|l| l.is_finite())
    }

    /// `(mu, logvar)` with logvar clamped to `±LOGVAR_CLAMP`.
    pub fn encode(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mu = self.enc_mu.forward(x)?;
        let mut lv = self.enc_logvar.forward(x)?;
        lv.iter_mut().for_each(|v| *v = clamp_logvar(*v));
        Ok((mu, lv))
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.dec.forward(z)
    }

    pub fn encode_mu_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.enc_mu.forward_batch(x)
    }

    pub fn decode_batch(&self, z: &Matrix) -> Result<Matrix> {
        self.dec.forward_batch(z)
    }

    /// Batched encode, sample with the given noise, decode.
    pub fn forward_batch(&self, x: &Matrix, eps: &Matrix) -> Result<VaePass> {
        let mu = self.enc_mu.forward_batch(x)?;
        let logvar_raw = self.enc_logvar.forward_batch(x)?;
        let logvar = logvar_raw.map(clamp_logvar);
        check_len("noise rows", mu.rows(), eps.rows())?;
        check_len("noise cols", mu.cols(), eps.cols())?;
        let mut z = mu.clone();
        for ((zi, lv), e) in z.as_mut_slice().iter_mut().zip(logvar.as_slice()).zip(eps.as_slice()) {
            *zi += (0.5 * lv).exp() * e;
        }
        let x_hat = self.dec.forward_batch(&z)?;
        Ok(VaePass {
            mu,
            logvar_raw,
            logvar,
            z,
            x_hat,
        })
    }

    /// Accumulates parameter gradients given `d/dx_hat` and extra latent
    /// gradients. The clamp passes gradient only inside `[-10, 10]`.
    pub fn backward_batch(
        &mut self,
        x: &Matrix,
        eps: &Matrix,
        pass: &VaePass,
        grad_x_hat: &Matrix,
        extra: LatentGrads,
    ) -> Result<()> {
        let mut gz = self.dec.backward_batch(&pass.z, grad_x_hat)?;
        add_into(&mut gz, &extra.z);
        let mut gmu = extra.mu;
        add_into(&mut gmu, &gz);
        let mut glv = extra.logvar;
        for i in 0..glv.as_slice().len() {
            let lv = pass.logvar.as_slice()[i];
            let raw = pass.logvar_raw.as_slice()[i];
            let g = &mut glv.as_mut_slice()[i];
            *g += gz.as_slice()[i] * eps.as_slice()[i] * 0.5 * (0.5 * lv).exp();
            if !(-LOGVAR_CLAMP..=LOGVAR_CLAMP).contains(&raw) {
                *g = 0.0;
            }
        }
        self.enc_mu.backward_batch(x, &gmu)?;
        self.enc_logvar.backward_batch(x, &glv)?;
        Ok(())
    }
}

fn clamp_logvar(v: f64) -> f64 {
    v.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP)
}

fn add_into(a: &mut Matrix, b: &Matrix) {
    for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *x += y;
    }
}

/// `z = mu + exp(logvar / 2) * eps`
pub fn reparameterize(mu: &[f64], logvar: &[f64], eps: &[f64]) -> Result<Vec<f64>> {
    check_len("reparameterize logvar", mu.len(), logvar.len())?;
    check_len("reparameterize eps", mu.len(), eps.len())?;
    Ok(mu
        .iter()
        .zip(logvar)
        .zip(eps)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect())
}

/// Mean squared error over dimensions.
pub fn recon_loss(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    check_len("recon_loss", x.len(), x_hat.len())?;
    if x.is_empty() {
        return Ok(0.0);
    }
    Ok(x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

/// KL divergence of `N(mu, exp(logvar))` from `N(0, I)`, summed over dimensions.
pub fn kl_loss(mu: &[f64], logvar: &[f64]) -> Result<f64> {
    check_len("kl_loss", mu.len(), logvar.len())?;
    Ok(mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| 0.5 * (lv.exp() + m * m - 1.0 - lv))
        .sum())
}

/// How the per-example KL is reduced over latent dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KlReduction {
    Sum,
    #[default]
    Mean,
}

/// Batch reconstruction loss (mean over rows and columns) and its gradient.
pub fn recon_loss_batch(x: &Matrix, x_hat: &Matrix) -> Result<(f64, Matrix)> {
    check_len("recon rows", x.rows(), x_hat.rows())?;
    check_len("recon cols", x.cols(), x_hat.cols())?;
    let n = (x.rows() * x.cols()).max(1) as f64;
    let mut g = Matrix::zeros(x.rows(), x.cols());
    let mut loss = 0.0;
    for ((gi, a), b) in g.as_mut_slice().iter_mut().zip(x.as_slice()).zip(x_hat.as_slice()) {
        let d = b - a;
        loss += d * d;
        *gi = 2.0 * d / n;
    }
    Ok((loss / n, g))
}

/// Batch KL (mean over rows) and gradients with respect to `mu` and `logvar`.
pub fn kl_loss_batch(mu: &Matrix, logvar: &Matrix, reduction: KlReduction) -> Result<(f64, Matrix, Matrix)> {
    check_len("kl rows", mu.rows(), logvar.rows())?;
    check_len("kl cols", mu.cols(), logvar.cols())?;
    let mut scale = mu.rows().max(1) as f64;
    if reduction == KlReduction::Mean {
        scale *= mu.cols().max(1) as f64;
    }
    let mut gmu = Matrix::zeros(mu.rows(), mu.cols());
    let mut glv = Matrix::zeros(mu.rows(), mu.cols());
    let mut loss = 0.0;
    for i in 0..mu.as_slice().len() {
        let m = mu.as_slice()[i];
        let lv = logvar.as_slice()[i];
        let e = lv.exp();
        loss += 0.5 * (e + m * m - 1.0 - lv);
        gmu.as_mut_slice()[i] = m / scale;
        glv.as_mut_slice()[i] = 0.5 * (e - 1.0) / scale;
    }
    Ok((loss / scale, gmu, glv))
}
