use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{EmbeddingDataset, EmbeddingRecord, Split};
use crate::error::{Error, Result};
use crate::tensor::{sigmoid, stream, SeededRng};

/// Knobs for the synthetic embedding generator.
///
/// Features are a low-rank nuisance field plus small isotropic residual
/// noise, with three planted blocks: sex, standardized age and a latent
/// risk score that drives both cancer labels. Each block spreads its
/// strength over its dims (per-dim amplitude `strength / sqrt(dims)`).
///
/// Labels: with risk `r ~ N(0, 1)` and a shared uniform `u`,
/// `cancer_k = u < q * sigmoid(risk_sharpness * (r - threshold_k))`, so every
/// 1-year case is also a 2-year case. The group factor
/// `q = (1 - bias * [female]) * (1 - bias * [age below midpoint])` lowers
/// the base rate of women and younger patients without changing how risk
/// is distributed among their positives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub dimension: usize,
    pub sex_signal_dims: usize,
    pub age_signal_dims: usize,
    pub task_signal_dims: usize,
    /// Task dims shared with the tail of the sex block.
    pub overlap_dims: usize,
    pub sex_strength: f64,
    pub age_strength: f64,
    pub task_strength: f64,
    pub task_group_bias: f64,
    /// Scale of the nuisance factors.
    pub noise_sigma: f64,
    pub nuisance_rank: usize,
    pub residual_sigma: f64,
    pub age_min: f64,
    pub age_max: f64,
    pub male_fraction: f64,
    pub risk_sharpness: f64,
    pub threshold_1y: f64,
    pub threshold_2y: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_train: 2000,
            n_test: 500,
            dimension: 64,
            sex_signal_dims: 8,
            age_signal_dims: 16,
            task_signal_dims: 8,
            overlap_dims: 0,
            sex_strength: 2.0,
            age_strength: 2.0,
            task_strength: 3.0,
            task_group_bias: 0.4,
            noise_sigma: 1.0,
            nuisance_rank: 8,
            residual_sigma: 0.25,
            age_min: 55.0,
            age_max: 75.0,
            male_fraction: 0.5,
            risk_sharpness: 3.0,
            threshold_1y: 0.5,
            threshold_2y: 0.0,
            seed: 7,
        }
    }
}

/// Feature index ranges of the planted blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalLayout {
    pub age: Range<usize>,
    pub sex: Range<usize>,
    pub task: Range<usize>,
}

impl SynthConfig {
    /// Age block first, then sex, then task; `overlap_dims` pulls the task
    /// block back onto the end of the sex block.
    pub fn layout(&self) -> SignalLayout {
        let age = 0..self.age_signal_dims;
        let sex = age.end..age.end + self.sex_signal_dims;
        let start = sex.end - self.overlap_dims.min(self.sex_signal_dims);
        SignalLayout {
            age,
            sex,
            task: start..start + self.task_signal_dims,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, msg: String| Err(Error::config(field, msg));
        if self.n_train == 0 {
            return bad("n_train", "must be at least 1".into());
        }
        if self.n_test == 0 {
            return bad("n_test", "must be at least 1".into());
        }
        if self.dimension == 0 {
            return bad("dimension", "must be at least 1".into());
        }
        for (field, k) in [
            ("sex_signal_dims", self.sex_signal_dims),
            ("age_signal_dims", self.age_signal_dims),
            ("task_signal_dims", self.task_signal_dims),
        ] {
            if k == 0 {
                return bad(field, "must be at least 1".into());
            }
        }
        if self.overlap_dims > self.sex_signal_dims.min(self.task_signal_dims) {
            return bad("overlap_dims", "cannot exceed the sex or task block size".into());
        }
        let end = self.layout().task.end.max(self.layout().sex.end);
        if end > self.dimension {
            return bad(
                "dimension",
                format!("signal blocks need {end} dims, dimension is {}", self.dimension),
            );
        }
        for (field, v) in [
            ("sex_strength", self.sex_strength),
            ("age_strength", self.age_strength),
            ("task_strength", self.task_strength),
            ("residual_sigma", self.residual_sigma),
            ("risk_sharpness", self.risk_sharpness),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, format!("must be finite and non-negative, got {v}"));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return bad("noise_sigma", format!("must be positive, got {}", self.noise_sigma));
        }
        if self.nuisance_rank == 0 {
            return bad("nuisance_rank", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.task_group_bias) {
            return bad("task_group_bias", format!("must be in [0, 1], got {}", self.task_group_bias));
        }
        if !(0.0..=1.0).contains(&self.male_fraction) {
            return bad("male_fraction", format!("must be in [0, 1], got {}", self.male_fraction));
        }
        if !(self.age_min.is_finite() && self.age_max.is_finite() && self.age_min < self.age_max) {
            return bad("age_min", "need finite age_min < age_max".into());
        }
        if self.age_min < super::AGE_RANGE.0 || self.age_max > super::AGE_RANGE.1 {
            return bad("age_max", format!("ages must lie in {:?}", super::AGE_RANGE));
        }
        if !(self.threshold_1y.is_finite() && self.threshold_2y.is_finite()) {
            return bad("threshold_1y", "thresholds must be finite".into());
        }
        Ok(())
    }
}

/// Generates a dataset. Train records come first; every record has its
/// own patient, so the splits are patient-disjoint.
pub fn synth_generate(cfg: &SynthConfig) -> Result<EmbeddingDataset> {
    cfg.validate()?;
    let mut rng = SeededRng::new(cfg.seed, stream::SYNTH);
    let d = cfg.dimension;
    let k = cfg.nuisance_rank;

    // nuisance loadings: unit-norm columns
    let mut loadings = vec![0.0; d * k];
    rng.fill_standard_normal(&mut loadings);
    for c in 0..k {
        let norm = (0..d).map(|r| loadings[r * k + c].powi(2)).sum::<f64>().sqrt();
        for r in 0..d {
            loadings[r * k + c] /= norm;
        }
    }
    let factor_scale = cfg.noise_sigma * (d as f64 / k as f64).sqrt();

    let layout = cfg.layout();
    let mid = 0.5 * (cfg.age_min + cfg.age_max);
    let half = 0.5 * (cfg.age_max - cfg.age_min);
    let per_dim = |s: f64, n: usize| s / (n as f64).sqrt();
    let (a_sex, a_age, a_task) = (
        per_dim(cfg.sex_strength, cfg.sex_signal_dims),
        per_dim(cfg.age_strength, cfg.age_signal_dims),
        per_dim(cfg.task_strength, cfg.task_signal_dims),
    );

    let n = cfg.n_train + cfg.n_test;
    let width = n.to_string().len().max(5);
    let mut records = Vec::with_capacity(n);
    let mut factors = vec![0.0; k];
    for i in 0..n {
        let sex = (rng.uniform() < cfg.male_fraction) as u8;
        let age = rng.uniform_range(cfg.age_min, cfg.age_max);
        let a = (age - mid) / half;
        let risk = rng.normal();
        let u = rng.uniform();

        let q = (1.0 - cfg.task_group_bias * (sex == 0) as u8 as f64)
            * (1.0 - cfg.task_group_bias * (a < 0.0) as u8 as f64);
        let label = |th: f64| (u < q * sigmoid(cfg.risk_sharpness * (risk - th))) as u8;

        rng.fill_standard_normal(&mut factors);
        let mut x = vec![0.0; d];
        for (r, xr) in x.iter_mut().enumerate() {
            let nuis: f64 = (0..k).map(|c| loadings[r * k + c] * factors[c]).sum();
            *xr = factor_scale * nuis + cfg.residual_sigma * rng.normal();
        }
        let s = if sex == 1 { 0.5 } else { -0.5 };
        for j in layout.age.clone() {
            x[j] += a_age * a;
        }
        for j in layout.sex.clone() {
            x[j] += a_sex * s;
        }
        for j in layout.task.clone() {
            x[j] += a_task * risk;
        }

        records.push(EmbeddingRecord {
            record_id: format!("R{i:0width$}"),
            patient_id: format!("P{i:0width$}"),
            sex,
            age,
            cancer_1y: label(cfg.threshold_1y),
            cancer_2y: label(cfg.threshold_2y),
            split: if i < cfg.n_train { Split::Train } else { Split::Test },
            features: x,
        });
    }
    EmbeddingDataset::new(d, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Task;

    fn small() -> SynthConfig {
        SynthConfig {
            n_train: 200,
            n_test: 50,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(synth_generate(&small()).unwrap(), synth_generate(&small()).unwrap());
        let other = SynthConfig { seed: 8, ..small() };
        assert_ne!(synth_generate(&small()).unwrap(), synth_generate(&other).unwrap());
    }

    #[test]
    fn one_year_cases_nest_in_two_year() {
        let ds = synth_generate(&small()).unwrap();
        assert!(ds.records().iter().all(|r| r.cancer_1y <= r.cancer_2y));
        let pos = ds.records().iter().filter(|r| r.label(Task::Cancer2y) == 1).count();
        assert!(pos > 0 && pos < ds.len());
    }

    #[test]
    fn layout_and_overlap() {
        let c = SynthConfig::default();
        let l = c.layout();
        assert_eq!((l.age, l.sex, l.task), (0..16, 16..24, 24..32));
        let c = SynthConfig { overlap_dims: 3, ..c };
        assert_eq!(c.layout().task, 21..29);
        assert!(SynthConfig { overlap_dims: 9, ..SynthConfig::default() }.validate().is_err());
    }

    #[test]
    fn split_sizes_and_ages() {
        let c = small();
        let ds = synth_generate(&c).unwrap();
        assert_eq!(ds.split_indices(Split::Train).len(), 200);
        assert_eq!(ds.split_indices(Split::Test).len(), 50);
        assert!(ds.records().iter().all(|r| r.age >= c.age_min && r.age < c.age_max));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(synth_generate(&SynthConfig { noise_sigma: 0.0, ..small() }).is_err());
        assert!(synth_generate(&SynthConfig { dimension: 20, ..small() }).is_err());
        assert!(synth_generate(&SynthConfig { n_test: 0, ..small() }).is_err());
    }
}
