use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Attribute;
use crate::error::{Error, Result};
use crate::vae::KlReduction;

/// What the encoder optimizes against the adversary in the VAE step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AdversarialObjective {
    /// Push every branch toward an uninformative prediction: probability
    /// 0.5 for binary attributes, the (standardized) mean for continuous ones.
    #[default]
    Confusion,
    /// Maximize the adversary's own loss (`- lambda_adv * adv_loss`).
    Reversal,
}

/// Which latent quantity the adversary reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryInput {
    /// The encoder mean.
    #[default]
    Mean,
    /// The reparameterized sample `z`.
    Sample,
}

macro_rules! str_enum {
    ($t:ty { $($v:ident => $s:literal),+ $(,)? }) => {
        impl $t {
            pub fn as_str(self) -> &'static str {
                match self { $(<$t>::$v => $s),+ }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok(<$t>::$v),)+
                    _ => Err(format!("expected one of: {}", [$($s),+].join(", "))),
                }
            }
        }
    };
}

str_enum!(AdversarialObjective { Confusion => "confusion", Reversal => "reversal" });
str_enum!(AdversaryInput { Mean => "mean", Sample => "sample" });
str_enum!(KlReduction { Sum => "sum", Mean => "mean" });

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_vae: f64,
    pub lr_adv: f64,
    pub latent_dim: usize,
    pub beta_kl: f64,
    pub lambda_adv: f64,
    pub adv_steps: usize,
    pub seed: u64,
    pub attributes: Vec<Attribute>,
    pub adversary_hidden: Vec<usize>,
    pub objective: AdversarialObjective,
    pub adversary_input: AdversaryInput,
    pub kl_reduction: KlReduction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            lr_vae: 0.0005,
            lr_adv: 0.002,
            latent_dim: 500,
            beta_kl: 0.1,
            lambda_adv: 1.0,
            adv_steps: 5,
            seed: 0,
            attributes: vec![Attribute::Sex, Attribute::Age],
            adversary_hidden: vec![64],
            objective: AdversarialObjective::Confusion,
            adversary_input: AdversaryInput::Mean,
            kl_reduction: KlReduction::Mean,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: usize| {
            if v == 0 {
                Err(Error::config(field, "must be at least 1"))
            } else {
                Ok(())
            }
        };
        positive("epochs", self.epochs)?;
        positive("batch_size", self.batch_size)?;
        positive("latent_dim", self.latent_dim)?;
        positive("adv_steps", self.adv_steps)?;
        for (field, v) in [("lr_vae", self.lr_vae), ("lr_adv", self.lr_adv)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        for (field, v) in [("beta_kl", self.beta_kl), ("lambda_adv", self.lambda_adv)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be non-negative, got {v}")));
            }
        }
        if self.adversary_hidden.contains(&0) {
            return Err(Error::config("adversary_hidden", "layer widths must be at least 1"));
        }
        let mut seen = self.attributes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.attributes.len() {
            return Err(Error::config("attributes", "listed more than once"));
        }
        Ok(())
    }
}
