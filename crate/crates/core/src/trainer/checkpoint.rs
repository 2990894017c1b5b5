use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EpochLosses, TargetScaling, TrainConfig};
use crate::adversary::AdversaryParams;
use crate::data::Standardization;
use crate::error::{check_len, Error, Result};
use crate::vae::VaeParams;

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to reproduce a transform: config, parameters and the
/// standardization fitted on the training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: TrainConfig,
    pub standardization: Standardization,
    pub age_scaling: TargetScaling,
    pub vae: VaeParams,
    pub adversary: AdversaryParams,
    pub epoch: usize,
    pub history: Vec<EpochLosses>,
}

impl Checkpoint {
    pub fn input_dim(&self) -> usize {
        self.vae.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.vae.latent_dim()
    }

    pub fn validate(&self) -> Result<()> {
        check_len("standardization mean", self.input_dim(), self.standardization.mean.len())?;
        check_len("standardization std", self.input_dim(), self.standardization.std.len())?;
        check_len("adversary input", self.latent_dim(), self.adversary.input_dim)?;
        self.adversary.validate()?;
        if self.standardization.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Numeric("standardization std".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    /// Parses and checks a checkpoint; `origin` names the source in errors.
    pub fn from_json(text: &str, origin: &Path) -> Result<Checkpoint> {
        let corrupt = |message: String| Error::Corrupt {
            path: origin.to_path_buf(),
            message,
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| corrupt("missing format_version".into()))?;
        if found != FORMAT_VERSION as u64 {
            return Err(Error::Version {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                supported: FORMAT_VERSION,
            });
        }
        let ck: Checkpoint = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        ck.validate().map_err(|e| corrupt(e.to_string()))?;
        Ok(ck)
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text, path)
}
