//! Alternating adversarial training of the VAE, checkpoints and the
//! dataset transform.

mod checkpoint;
mod config;
mod objective;
mod transform;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryParams;
use crate::data::{Attribute, EmbeddingDataset, Split, Standardization};
use crate::error::{Error, Result};
use crate::tensor::{stream, LayerAdam, Matrix, SeededRng};
use crate::vae::VaeParams;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, FORMAT_VERSION};
pub use config::{AdversarialObjective, AdversaryInput, TrainConfig};
pub use objective::{adversary_input, adversary_objective, vae_objective, Targets, VaeLosses};
pub use transform::{relative_recon_mse, transform_dataset, OutputSpace, TransformMode};

/// Mean losses over the batches of one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLosses {
    pub epoch: usize,
    pub recon: f64,
    pub kl: f64,
    pub adv: f64,
    pub total: f64,
}

/// Mean and standard deviation used to standardize a continuous target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub std: f64,
}

/// Owns the parameters, optimizers and random streams for one run.
#[derive(Debug)]
pub struct Trainer {
    config: TrainConfig,
    vae: VaeParams,
    adversary: AdversaryParams,
    vae_opt: LayerAdam,
    adv_opt: LayerAdam,
    x: Matrix,
    targets: Targets,
    standardization: Standardization,
    age_scaling: TargetScaling,
    shuffle_rng: SeededRng,
    reparam_rng: SeededRng,
    history: Vec<EpochLosses>,
    epoch: usize,
}

impl Trainer {
    /// Standardizes the dataset on its train split unless it already is.
    pub fn new(dataset: &EmbeddingDataset, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let ds = match dataset.standardization() {
            Some(_) => dataset.clone(),
            None => dataset.standardize_fit_transform()?,
        };
        let standardization = ds.standardization().cloned().expect("standardized above");
        let train = ds.split_indices(Split::Train);
        if train.is_empty() {
            return Err(Error::config("dataset", "train split is empty"));
        }
        let x = ds.features(&train);
        let recs = ds.records();
        let ages: Vec<f64> = train.iter().map(|&i| recs[i].age).collect();
        let n = ages.len() as f64;
        let mean = ages.iter().sum::<f64>() / n;
        let std = (ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-8);
        let age_scaling = TargetScaling { mean, std };
        let mut targets = BTreeMap::new();
        for &a in &config.attributes {
            let col = match a {
                Attribute::Sex => train.iter().map(|&i| recs[i].sex as f64).collect(),
                Attribute::Age => ages.iter().map(|v| (v - mean) / std).collect(),
            };
            targets.insert(a, col);
        }

        let mut init = SeededRng::new(config.seed, stream::INIT);
        let vae = VaeParams::init(ds.dimension(), config.latent_dim, &mut init);
        let adversary = AdversaryParams::init(config.latent_dim, &config.attributes, &config.adversary_hidden, &mut init);
        Ok(Trainer {
            vae_opt: LayerAdam::for_layers(vae.layers()),
            adv_opt: LayerAdam::for_layers(adversary.layers()),
            shuffle_rng: SeededRng::new(config.seed, stream::SHUFFLE),
            reparam_rng: SeededRng::new(config.seed, stream::REPARAM),
            config,
            vae,
            adversary,
            x,
            targets,
            standardization,
            age_scaling,
            history: Vec::new(),
            epoch: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn vae(&self) -> &VaeParams {
        &self.vae
    }

    pub fn adversary(&self) -> &AdversaryParams {
        &self.adversary
    }

    pub fn history(&self) -> &[EpochLosses] {
        &self.history
    }

    /// Standardized train features, in dataset order.
    pub fn train_features(&self) -> &Matrix {
        &self.x
    }

    pub fn batch_targets(&self, idx: &[usize]) -> Targets {
        self.targets
            .iter()
            .map(|(&a, col)| (a, idx.iter().map(|&i| col[i]).collect()))
            .collect()
    }

    /// One optimizer step on the adversary only, for a fixed latent input.
    pub fn adversary_step(&mut self, input: &Matrix, targets: &Targets) -> Result<f64> {
        self.adversary.zero_grad();
        let loss = adversary_objective(&mut self.adversary, input, targets)?;
        if !loss.is_finite() {
            return Err(Error::Numeric("adversary loss".into()));
        }
        self.adv_opt.step(self.adversary.layers_mut(), self.config.lr_adv, "adversary")?;
        Ok(loss)
    }

    /// One optimizer step on the encoder and decoder only.
    pub fn vae_step(&mut self, x: &Matrix, eps: &Matrix, targets: &Targets) -> Result<VaeLosses> {
        self.vae.zero_grad();
        let losses = vae_objective(&mut self.vae, &self.adversary, x, eps, targets, &self.config)?;
        if !losses.total.is_finite() {
            return Err(Error::Numeric("VAE objective".into()));
        }
        self.vae_opt.step(self.vae.layers_mut(), self.config.lr_vae, "vae")?;
        Ok(losses)
    }

    /// Adversary steps then one VAE step, sharing the batch and its noise.
    pub fn train_batch(&mut self, idx: &[usize]) -> Result<VaeLosses> {
        let x = self.x.select_rows(idx);
        let targets = self.batch_targets(idx);
        let eps = Matrix::from_vec(
            idx.len(),
            self.config.latent_dim,
            self.reparam_rng.standard_normal(idx.len() * self.config.latent_dim),
        )?;
        let input = adversary_input(&self.vae, &x, &eps, self.config.adversary_input)?;
        for _ in 0..self.config.adv_steps {
            self.adversary_step(&input, &targets)?;
        }
        self.vae_step(&x, &eps, &targets)
    }

    pub fn run_epoch(&mut self) -> Result<EpochLosses> {
        let order = self.shuffle_rng.permutation(self.x.rows());
        let mut sum = VaeLosses::default();
        let mut batches = 0usize;
        for (b, idx) in order.chunks(self.config.batch_size).enumerate() {
            let l = self.train_batch(idx).map_err(|e| match e {
                Error::Numeric(m) => Error::Numeric(format!("{m} at epoch {} batch {b}", self.epoch + 1)),
                other => other,
            })?;
            sum.recon += l.recon;
            sum.kl += l.kl;
            sum.adv += l.adv;
            sum.total += l.total;
            batches += 1;
        }
        self.epoch += 1;
        let n = batches as f64;
        let e = EpochLosses {
            epoch: self.epoch,
            recon: sum.recon / n,
            kl: sum.kl / n,
            adv: sum.adv / n,
            total: sum.total / n,
        };
        self.history.push(e);
        Ok(e)
    }

    pub fn finish(self) -> Checkpoint {
        Checkpoint {
            format_version: FORMAT_VERSION,
            config: self.config,
            standardization: self.standardization,
            age_scaling: self.age_scaling,
            vae: self.vae,
            adversary: self.adversary,
            epoch: self.epoch,
            history: self.history,
        }
    }
}

/// Runs `config.epochs` epochs and returns the final checkpoint.
pub fn train(dataset: &EmbeddingDataset, config: &TrainConfig) -> Result<Checkpoint> {
    train_with(dataset, config, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    dataset: &EmbeddingDataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLosses),
) -> Result<Checkpoint> {
    let mut t = Trainer::new(dataset, config.clone())?;
    for _ in 0..config.epochs {
        let e = t.run_epoch()?;
        on_epoch(&e);
    }
    Ok(t.finish())
}
