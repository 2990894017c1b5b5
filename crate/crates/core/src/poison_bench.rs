//! Label-flipping sweep: poison one sex group's train labels at several
//! fractions, refit the task probe on original and debiased embeddings and
//! measure EOD on the clean test split.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{poison_labels, EmbeddingDataset, PoisonSpec, Split, Task};
use crate::error::{Error, Result};
use crate::eval::{eod, fit_logistic_probe, ProbeLabel, DECISION_THRESHOLD};
use crate::plot::{LineChart, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoisonSweepConfig {
    pub fractions: Vec<f64>,
    pub target_groups: Vec<u8>,
    pub tasks: Vec<Task>,
    pub seed: u64,
}

impl Default for PoisonSweepConfig {
    fn default() -> Self {
        PoisonSweepConfig {
            fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            target_groups: vec![0, 1],
            tasks: Task::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl PoisonSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::config("fractions", "need at least one fraction"));
        }
        if self.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::config("fractions", "every fraction must be in [0, 1]"));
        }
        if self.fractions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("fractions", "must be strictly ascending"));
        }
        if self.target_groups.is_empty() || self.target_groups.iter().any(|&g| g > 1) {
            return Err(Error::config("target_groups", "groups are 0 (female) and 1 (male)"));
        }
        if self.tasks.is_empty() {
            return Err(Error::config("tasks", "need at least one task"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Original,
    Debiased,
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Original => "original",
            EmbeddingKind::Debiased => "debiased",
        })
    }
}

/// One grid cell. Group a is female, group b male.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoisonRow {
    pub embedding: EmbeddingKind,
    pub task: Task,
    pub target_group: u8,
    pub fraction: f64,
    pub eod: Option<f64>,
    pub tpr_a: Option<f64>,
    pub tpr_b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoisonCurve {
    pub config: PoisonSweepConfig,
    pub rows: Vec<PoisonRow>,
}

impl PoisonCurve {
    pub fn get(&self, embedding: EmbeddingKind, task: Task, group: u8, fraction: f64) -> Option<&PoisonRow> {
        self.rows.iter().find(|r| {
            r.embedding == embedding && r.task == task && r.target_group == group && r.fraction == fraction
        })
    }

    pub fn write_csv(&self, out: impl Write) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["embedding", "task", "target_group", "fraction", "eod", "tpr_a", "tpr_b"])?;
        for r in &self.rows {
            w.write_record([
                r.embedding.to_string(),
                r.task.to_string(),
                r.target_group.to_string(),
                format!("{:?}", r.fraction),
                opt(r.eod),
                opt(r.tpr_a),
                opt(r.tpr_b),
            ])?;
        }
        w.flush()
    }

    /// One chart per (task, target group), a line per embedding kind.
    pub fn charts(&self) -> Vec<(Task, u8, String)> {
        let mut out = Vec::new();
        for &task in &self.config.tasks {
            for &group in &self.config.target_groups {
                let series = [EmbeddingKind::Original, EmbeddingKind::Debiased]
                    .into_iter()
                    .map(|kind| Series {
                        name: kind.to_string(),
                        points: self
                            .config
                            .fractions
                            .iter()
                            .map(|&f| (f, self.get(kind, task, group, f).and_then(|r| r.eod)))
                            .collect(),
                    })
                    .collect();
                let chart = LineChart {
                    title: format!("EOD under label flipping: {task}, target {}", group_name(group)),
                    x_label: "fraction of target-group train labels flipped".into(),
                    y_label: "EOD (sex)".into(),
                    y_range: (0.0, 1.0),
                    series,
                };
                out.push((task, group, chart.to_svg()));
            }
        }
        out
    }
}

pub fn group_name(g: u8) -> &'static str {
    if g == 1 {
        "male"
    } else {
        "female"
    }
}

/// Runs the full grid. Flip sets depend only on (seed, group, fraction), so
/// both embedding kinds see exactly the same poisoned labels.
pub fn run_poison_sweep(
    original: &EmbeddingDataset,
    debiased: &EmbeddingDataset,
    config: &PoisonSweepConfig,
) -> Result<PoisonCurve> {
    config.validate()?;
    original.check_aligned(debiased)?;
    let test = original.split_indices(Split::Test);
    let male: Vec<bool> = test.iter().map(|&i| original.records()[i].sex == 1).collect();
    let mut rows = Vec::new();
    for (kind, ds) in [(EmbeddingKind::Original, original), (EmbeddingKind::Debiased, debiased)] {
        let x_test = ds.features(&test);
        for &task in &config.tasks {
            let y: Vec<u8> = test.iter().map(|&i| ds.records()[i].label(task)).collect();
            for &group in &config.target_groups {
                for &fraction in &config.fractions {
                    let spec = PoisonSpec::sex(group, task, fraction, config.seed);
                    let poisoned = poison_labels(ds, &spec)?;
                    let probe = fit_logistic_probe(&poisoned, ProbeLabel::Task(task))?;
                    let s = probe.predict_batch(&x_test);
                    let e = eod(&s, &y, &male, DECISION_THRESHOLD)?;
                    rows.push(PoisonRow {
                        embedding: kind,
                        task,
                        target_group: group,
                        fraction,
                        eod: e.eod,
                        tpr_a: e.tpr_a,
                        tpr_b: e.tpr_b,
                    });
                }
            }
        }
    }
    Ok(PoisonCurve {
        config: config.clone(),
        rows,
    })
}
