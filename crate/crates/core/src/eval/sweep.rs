use std::io::Write;

use serde::{Deserialize, Serialize};

use super::report::{probe_report, REPORT_FORMAT_VERSION};
use crate::data::{Attribute, EmbeddingDataset, Task};
use crate::error::{Error, Result};
use crate::trainer::{train, transform_dataset, TrainConfig, TransformMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub latent_dim: usize,
    pub sex_auc: f64,
    pub age_mae: f64,
    pub task1_auc: f64,
    pub task2_auc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub format_version: u32,
    pub config: TrainConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv(&self, out: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["latent_dim", "sex_auc", "age_mae", "task1_auc", "task2_auc"])?;
        for r in &self.rows {
            w.write_record([
                r.latent_dim.to_string(),
                format!("{:?}", r.sex_auc),
                format!("{:?}", r.age_mae),
                format!("{:?}", r.task1_auc),
                format!("{:?}", r.task2_auc),
            ])?;
        }
        w.flush()
    }
}

/// Trains one debiaser per latent size (same seed and config otherwise)
/// and probes each debiased dataset. Rows come back sorted by dimension.
pub fn latent_sweep(dataset: &EmbeddingDataset, dims: &[usize], config: &TrainConfig) -> Result<SweepResult> {
    latent_sweep_with(dataset, dims, config, |_| {})
}

/// [`latent_sweep`] with a callback after each row.
pub fn latent_sweep_with(
    dataset: &EmbeddingDataset,
    dims: &[usize],
    config: &TrainConfig,
    mut on_row: impl FnMut(&SweepRow),
) -> Result<SweepResult> {
    if dims.is_empty() {
        return Err(Error::config("dims", "need at least one latent dimension"));
    }
    if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > dataset.dimension()) {
        return Err(Error::config(
            "dims",
            format!("{d} is outside 1..={}", dataset.dimension()),
        ));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for d in sorted {
        let cfg = TrainConfig {
            latent_dim: d,
            ..config.clone()
        };
        let ck = train(dataset, &cfg)?;
        let debiased = transform_dataset(&ck, dataset, TransformMode::default())?;
        let rep = probe_report(&debiased, "debiased", &Attribute::ALL, &Task::ALL)?;
        let task_auc = |t| rep.task(t).map(|m| m.auc).unwrap_or(f64::NAN);
        let row = SweepRow {
            latent_dim: d,
            sex_auc: rep.sex.as_ref().map(|m| m.auc).unwrap_or(f64::NAN),
            age_mae: rep.age.as_ref().map(|m| m.mae).unwrap_or(f64::NAN),
            task1_auc: task_auc(Task::Cancer1y),
            task2_auc: task_auc(Task::Cancer2y),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(SweepResult {
        format_version: REPORT_FORMAT_VERSION,
        config: config.clone(),
        rows,
    })
}
