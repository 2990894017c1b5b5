use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Checkpoint;
use crate::data::EmbeddingDataset;
use crate::error::{check_len, Error, Result};
use crate::tensor::{stream, Matrix, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputSpace {
    /// Decoder output mapped back to raw feature units (dimension D).
    #[default]
    Reconstruction,
    /// Encoder output (dimension L).
    Latent,
}

impl fmt::Display for OutputSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputSpace::Reconstruction => "reconstruction",
            OutputSpace::Latent => "latent",
        })
    }
}

impl FromStr for OutputSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reconstruction" => Ok(OutputSpace::Reconstruction),
            "latent" => Ok(OutputSpace::Latent),
            _ => Err("expected `reconstruction` or `latent`".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformMode {
    pub output_space: OutputSpace,
    /// Use the encoder mean (noise 0) instead of a sample.
    pub deterministic: bool,
}

impl Default for TransformMode {
    fn default() -> Self {
        TransformMode {
            output_space: OutputSpace::Reconstruction,
            deterministic: true,
        }
    }
}

/// Replaces every record's features with the debiased embedding.
///
/// A raw dataset is standardized with the checkpoint's parameters first; an
/// already standardized one must carry exactly those parameters. Stochastic
/// mode draws noise from the checkpoint seed's reparameterization stream.
pub fn transform_dataset(
    checkpoint: &Checkpoint,
    dataset: &EmbeddingDataset,
    mode: TransformMode,
) -> Result<EmbeddingDataset> {
    check_len("dataset dimension", checkpoint.input_dim(), dataset.dimension())?;
    let st = &checkpoint.standardization;
    let ds = match dataset.standardization() {
        None => dataset.standardize_with(st)?,
        Some(s) if s == st => dataset.clone(),
        Some(_) => {
            return Err(Error::config(
                "standardization",
                "dataset was standardized with parameters different from the checkpoint's",
            ))
        }
    };
    let x = ds.all_features();
    let vae = &checkpoint.vae;
    let mut latent = vae.encode_mu_batch(&x)?;
    if !mode.deterministic {
        let mut rng = SeededRng::new(checkpoint.config.seed, stream::REPARAM);
        let eps = Matrix::from_vec(x.rows(), vae.latent_dim(), rng.standard_normal(x.rows() * vae.latent_dim()))?;
        latent = vae.forward_batch(&x, &eps)?.z;
    }
    match mode.output_space {
        OutputSpace::Latent => dataset.with_features(&latent),
        OutputSpace::Reconstruction => {
            let mut out = vae.decode_batch(&latent)?;
            for r in 0..out.rows() {
                st.invert(out.row_mut(r));
            }
            dataset.with_features(&out)
        }
    }
}

/// Mean squared reconstruction error of `decode(mu)` on one split, divided
/// by the mean per-feature variance of that split, both in standardized units.
pub fn relative_recon_mse(checkpoint: &Checkpoint, dataset: &EmbeddingDataset, split: crate::data::Split) -> Result<f64> {
    let ds = match dataset.standardization() {
        None => dataset.standardize_with(&checkpoint.standardization)?,
        Some(_) => dataset.clone(),
    };
    let idx = ds.split_indices(split);
    if idx.is_empty() {
        return Err(Error::config("dataset", format!("{} split is empty", split.as_str())));
    }
    let x = ds.features(&idx);
    let x_hat = checkpoint.vae.decode_batch(&checkpoint.vae.encode_mu_batch(&x)?)?;
    let (n, d) = (x.rows() as f64, x.cols());
    let mut err = 0.0;
    let mut var = 0.0;
    for c in 0..d {
        let mean = (0..x.rows()).map(|r| x.get(r, c)).sum::<f64>() / n;
        for r in 0..x.rows() {
            err += (x.get(r, c) - x_hat.get(r, c)).powi(2);
            var += (x.get(r, c) - mean).powi(2);
        }
    }
    Ok(err / var)
}
