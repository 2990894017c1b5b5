//! Adversarial VAE debiasing for embedding datasets.
//!
//! A linear VAE is trained against per-attribute adversaries so that its
//! reconstructions keep task signal while sex and age become hard to
//! recover. The [`eval`] module measures what linear probes can still read
//! and how equal-opportunity gaps move; [`poison_bench`] measures how a
//! group-targeted label-flipping attack propagates through each embedding.
//!
//! ```no_run
//! use vae_debias::data::{synth_generate, SynthConfig};
//! use vae_debias::eval::fairness_report;
//! use vae_debias::trainer::{train, transform_dataset, TrainConfig, TransformMode};
//!
//! let data = synth_generate(&SynthConfig::default())?;
//! let cfg = TrainConfig { latent_dim: 32, epochs: 50, ..TrainConfig::default() };
//! let ck = train(&data, &cfg)?;
//! let debiased = transform_dataset(&ck, &data, TransformMode::default())?;
//! let report = fairness_report(&data, &debiased)?;
//! println!("sex AUC {:.3} -> {:.3}", report.original.sex.unwrap().auc, report.debiased.sex.unwrap().auc);
//! # Ok::<(), vae_debias::Error>(())
//! ```

pub mod adversary;
pub mod cli;
pub mod data;
mod error;
pub mod eval;
pub mod plot;
pub mod poison_bench;
pub mod tensor;
pub mod trainer;
pub mod vae;

pub use error::{Error, Result};
