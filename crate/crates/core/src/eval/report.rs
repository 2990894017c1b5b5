use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, auc, eod, mae};
use super::probe::{fit_linear_probe, fit_logistic_probe, ProbeLabel, LOGISTIC_GRAD_TOL, LOGISTIC_LR, LOGISTIC_MAX_ITERS, RIDGE};
use crate::data::{binarize_age, AgeGroup, Attribute, EmbeddingDataset, Split, Task};
use crate::error::Result;

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Probe recipe echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub decision_threshold: f64,
    pub logistic_lr: f64,
    pub logistic_max_iters: usize,
    pub logistic_grad_tol: f64,
    pub ridge: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            decision_threshold: DECISION_THRESHOLD,
            logistic_lr: LOGISTIC_LR,
            logistic_max_iters: LOGISTIC_MAX_ITERS,
            logistic_grad_tol: LOGISTIC_GRAD_TOL,
            ridge: RIDGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryProbeMetrics {
    pub auc: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeProbeMetrics {
    pub mae: f64,
    /// MAE of always predicting the train-split mean age.
    pub mean_baseline_mae: f64,
}

/// TPRs and EOD of one task across the two groups of one attribute.
/// Sex groups are female (a) and male (b); age groups young (a) and old (b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupEod {
    pub attribute: Attribute,
    pub tpr_a: Option<f64>,
    pub tpr_b: Option<f64>,
    /// `null` when a group has no positives in the test split.
    pub eod: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: Task,
    pub auc: f64,
    pub accuracy: f64,
    pub eod: Vec<GroupEod>,
}

impl TaskMetrics {
    pub fn eod_for(&self, a: Attribute) -> Option<f64> {
        self.eod.iter().find(|g| g.attribute == a).and_then(|g| g.eod)
    }
}

/// Probe results for one dataset, all evaluated on its test split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub label: String,
    pub n_train: usize,
    pub n_test: usize,
    pub age_threshold: f64,
    pub sex: Option<BinaryProbeMetrics>,
    pub age: Option<AgeProbeMetrics>,
    pub tasks: Vec<TaskMetrics>,
}

impl DatasetReport {
    pub fn task(&self, t: Task) -> Option<&TaskMetrics> {
        self.tasks.iter().find(|m| m.task == t)
    }
}

/// Before/after comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub format_version: u32,
    pub settings: EvalSettings,
    pub original: DatasetReport,
    pub debiased: DatasetReport,
}

/// Probe battery on a single dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub format_version: u32,
    pub settings: EvalSettings,
    pub dataset: DatasetReport,
}

impl ProbeReport {
    pub fn new(dataset: DatasetReport) -> Self {
        ProbeReport {
            format_version: REPORT_FORMAT_VERSION,
            settings: EvalSettings::default(),
            dataset,
        }
    }
}

/// Fits every requested probe on the train split and scores the test split.
pub fn probe_report(
    dataset: &EmbeddingDataset,
    label: &str,
    attributes: &[Attribute],
    tasks: &[Task],
) -> Result<DatasetReport> {
    let test = dataset.split_indices(Split::Test);
    let train = dataset.split_indices(Split::Train);
    let recs = dataset.records();
    let x_test = dataset.features(&test);
    let groups = binarize_age(dataset)?;

    let mut sex = None;
    let mut age = None;
    for &a in attributes {
        match a {
            Attribute::Sex => {
                let p = fit_logistic_probe(dataset, ProbeLabel::Sex)?;
                let s = p.predict_batch(&x_test);
                let y: Vec<u8> = test.iter().map(|&i| recs[i].sex).collect();
                sex = Some(BinaryProbeMetrics {
                    auc: auc(&s, &y)?,
                    accuracy: accuracy(&s, &y, DECISION_THRESHOLD)?,
                });
            }
            Attribute::Age => {
                let p = fit_linear_probe(dataset)?;
                let pred = p.predict_batch(&x_test);
                let y: Vec<f64> = test.iter().map(|&i| recs[i].age).collect();
                let train_mean = train.iter().map(|&i| recs[i].age).sum::<f64>() / train.len() as f64;
                age = Some(AgeProbeMetrics {
                    mae: mae(&pred, &y)?,
                    mean_baseline_mae: mae(&vec![train_mean; y.len()], &y)?,
                });
            }
        }
    }

    let male: Vec<bool> = test.iter().map(|&i| recs[i].sex == 1).collect();
    let old: Vec<bool> = test.iter().map(|&i| groups.tags[i] == AgeGroup::Old).collect();
    let mut task_rows = Vec::with_capacity(tasks.len());
    for &t in tasks {
        let p = fit_logistic_probe(dataset, ProbeLabel::Task(t))?;
        let s = p.predict_batch(&x_test);
        let y: Vec<u8> = test.iter().map(|&i| recs[i].label(t)).collect();
        let mut rows = Vec::with_capacity(2);
        for (a, in_b) in [(Attribute::Sex, &male), (Attribute::Age, &old)] {
            let e = eod(&s, &y, in_b, DECISION_THRESHOLD)?;
            rows.push(GroupEod {
                attribute: a,
                tpr_a: e.tpr_a,
                tpr_b: e.tpr_b,
                eod: e.eod,
            });
        }
        task_rows.push(TaskMetrics {
            task: t,
            auc: auc(&s, &y)?,
            accuracy: accuracy(&s, &y, DECISION_THRESHOLD)?,
            eod: rows,
        });
    }
    Ok(DatasetReport {
        label: label.to_owned(),
        n_train: train.len(),
        n_test: test.len(),
        age_threshold: groups.threshold,
        sex,
        age,
        tasks: task_rows,
    })
}

/// Full probe battery on both datasets. They must hold the same records.
pub fn fairness_report(original: &EmbeddingDataset, debiased: &EmbeddingDataset) -> Result<FairnessReport> {
    original.check_aligned(debiased)?;
    Ok(FairnessReport {
        format_version: REPORT_FORMAT_VERSION,
        settings: EvalSettings::default(),
        original: probe_report(original, "original", &Attribute::ALL, &Task::ALL)?,
        debiased: probe_report(debiased, "debiased", &Attribute::ALL, &Task::ALL)?,
    })
}
