//! Embedding datasets: schema, CSV I/O, standardization, synthetic
//! generation, label poisoning and age grouping.

mod csv;
mod poison;
mod synth;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tensor::Matrix;

pub use self::csv::{load_csv, read_csv, write_csv, write_csv_to};
pub use poison::{poison_labels, PoisonSpec};
pub use synth::{synth_generate, SignalLayout, SynthConfig};

/// Accepted age range in years.
pub const AGE_RANGE: (f64, f64) = (0.0, 130.0);

pub const STD_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("split must be `train` or `test`, got `{s}`")),
        }
    }
}

/// Downstream prediction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "cancer_1y")]
    Cancer1y,
    #[serde(rename = "cancer_2y")]
    Cancer2y,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Cancer1y, Task::Cancer2y];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Cancer1y => "cancer_1y",
            Task::Cancer2y => "cancer_2y",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cancer_1y" => Ok(Task::Cancer1y),
            "cancer_2y" => Ok(Task::Cancer2y),
            _ => Err(format!("unknown task `{s}` (expected cancer_1y or cancer_2y)")),
        }
    }
}

/// Demographic attributes. Sex is binary, age is continuous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Sex,
    Age,
}

impl Attribute {
    pub const ALL: [Attribute; 2] = [Attribute::Sex, Attribute::Age];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Sex => "sex",
            Attribute::Age => "age",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Attribute::Sex)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sex" => Ok(Attribute::Sex),
            "age" => Ok(Attribute::Age),
            _ => Err(format!("unknown attribute `{s}` (expected sex or age)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingRecord {
    pub record_id: String,
    pub patient_id: String,
    pub sex: u8,
    pub age: f64,
    pub cancer_1y: u8,
    pub cancer_2y: u8,
    pub split: Split,
    pub features: Vec<f64>,
}

impl EmbeddingRecord {
    pub fn label(&self, task: Task) -> u8 {
        match task {
            Task::Cancer1y => self.cancer_1y,
            Task::Cancer2y => self.cancer_2y,
        }
    }

    pub fn label_mut(&mut self, task: Task) -> &mut u8 {
        match task {
            Task::Cancer1y => &mut self.cancer_1y,
            Task::Cancer2y => &mut self.cancer_2y,
        }
    }

    fn validate(&self, dimension: usize) -> Result<(), String> {
        if self.features.len() != dimension {
            return Err(format!(
                "record {} has {} features, dataset dimension is {dimension}",
                self.record_id,
                self.features.len()
            ));
        }
        for (name, v) in [("sex", self.sex), ("cancer_1y", self.cancer_1y), ("cancer_2y", self.cancer_2y)] {
            if v > 1 {
                return Err(format!("record {}: {name} must be 0 or 1, got {v}", self.record_id));
            }
        }
        if !(self.age >= AGE_RANGE.0 && self.age <= AGE_RANGE.1) {
            return Err(format!(
                "record {}: age {} outside [{}, {}]",
                self.record_id, self.age, AGE_RANGE.0, AGE_RANGE.1
            ));
        }
        if let Some(i) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(format!("record {}: feature f{i} is not finite", self.record_id));
        }
        Ok(())
    }
}

/// Per-feature z-score parameters fitted on the train split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
    }

    pub fn invert(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = *v * s + m;
        }
    }
}

/// An ordered list of records sharing one feature dimension.
///
/// Construction checks labels, dimensions, unique record ids and that no
/// patient appears in both splits. Transforming operations return new
/// datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingDataset {
    dimension: usize,
    records: Vec<EmbeddingRecord>,
    standardization: Option<Standardization>,
}

impl EmbeddingDataset {
    pub fn new(dimension: usize, records: Vec<EmbeddingRecord>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate(dimension).map_err(Error::Integrity)?;
            if !ids.insert(r.record_id.as_str()) {
                return Err(Error::Integrity(format!("duplicate record_id {}", r.record_id)));
            }
        }
        check_patient_disjoint(&records)?;
        Ok(EmbeddingDataset {
            dimension,
            records,
            standardization: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn features(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.dimension);
        for &i in idx {
            data.extend_from_slice(&self.records[i].features);
        }
        Matrix::from_vec(idx.len(), self.dimension, data).expect("record dimensions are validated")
    }

    pub fn all_features(&self) -> Matrix {
        let idx: Vec<usize> = (0..self.len()).collect();
        self.features(&idx)
    }

    /// Same records with features replaced row by row.
    ///
    /// The result carries no standardization.
    pub fn with_features(&self, features: &Matrix) -> Result<EmbeddingDataset> {
        check_len("replacement feature rows", self.len(), features.rows())?;
        if !features.is_finite() {
            return Err(Error::Numeric("replacement features".into()));
        }
        let records = self
            .records
            .iter()
            .zip(features.iter_rows())
            .map(|(r, f)| EmbeddingRecord {
                features: f.to_vec(),
                ..r.clone()
            })
            .collect();
        Ok(EmbeddingDataset {
            dimension: features.cols(),
            records,
            standardization: None,
        })
    }

    pub(crate) fn with_records(&self, records: Vec<EmbeddingRecord>) -> EmbeddingDataset {
        EmbeddingDataset {
            dimension: self.dimension,
            records,
            standardization: self.standardization.clone(),
        }
    }

    /// Fits z-score parameters on the train split and applies them to every
    /// split. Standard deviations are floored at [`STD_FLOOR`].
    pub fn standardize_fit_transform(&self) -> Result<EmbeddingDataset> {
        if self.standardization.is_some() {
            return Err(Error::config("standardization", "dataset is already standardized"));
        }
        let train = self.split_indices(Split::Train);
        if train.is_empty() {
            return Err(Error::config("dataset", "train split is empty"));
        }
        let n = train.len() as f64;
        let mut mean = vec![0.0; self.dimension];
        for &i in &train {
            for (m, v) in mean.iter_mut().zip(&self.records[i].features) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.dimension];
        for &i in &train {
            for ((s, v), m) in var.iter_mut().zip(&self.records[i].features).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
        self.standardize_with(&Standardization { mean, std })
    }

    /// Applies given parameters to raw features.
    pub fn standardize_with(&self, st: &Standardization) -> Result<EmbeddingDataset> {
        if self.standardization.is_some() {
            return Err(Error::config("standardization", "dataset is already standardized"));
        }
        check_len("standardization dimension", self.dimension, st.dimension())?;
        let mut out = self.clone();
        for r in &mut out.records {
            st.apply(&mut r.features);
        }
        out.standardization = Some(st.clone());
        Ok(out)
    }

    /// Maps features back to raw units and drops the parameters.
    pub fn destandardize(&self) -> EmbeddingDataset {
        let mut out = self.clone();
        if let Some(st) = out.standardization.take() {
            for r in &mut out.records {
                st.invert(&mut r.features);
            }
        }
        out
    }

    /// Checks that `other` has the same records, labels and splits in the same order.
    pub fn check_aligned(&self, other: &EmbeddingDataset) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Integrity(format!(
                "datasets have {} and {} records",
                self.len(),
                other.len()
            )));
        }
        for (a, b) in self.records.iter().zip(&other.records) {
            let same = a.record_id == b.record_id
                && a.patient_id == b.patient_id
                && a.sex == b.sex
                && a.age == b.age
                && a.cancer_1y == b.cancer_1y
                && a.cancer_2y == b.cancer_2y
                && a.split == b.split;
            if !same {
                return Err(Error::Integrity(format!(
                    "record {} does not match record {} in the other dataset",
                    a.record_id, b.record_id
                )));
            }
        }
        Ok(())
    }
}

fn check_patient_disjoint(records: &[EmbeddingRecord]) -> Result<()> {
    let mut seen: HashMap<&str, Split> = HashMap::new();
    for r in records {
        match seen.get(r.patient_id.as_str()) {
            Some(&s) if s != r.split => {
                return Err(Error::Integrity(format!(
                    "patient {} appears in both train and test splits",
                    r.patient_id
                )))
            }
            Some(_) => {}
            None => {
                seen.insert(&r.patient_id, r.split);
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgeGroup {
    Young,
    Old,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgeGroups {
    pub threshold: f64,
    pub tags: Vec<AgeGroup>,
}

/// Splits records at the train-split median age; `age <= median` is young.
pub fn binarize_age(dataset: &EmbeddingDataset) -> Result<AgeGroups> {
    let mut ages: Vec<f64> = dataset
        .split_indices(Split::Train)
        .into_iter()
        .map(|i| dataset.records[i].age)
        .collect();
    if ages.is_empty() {
        return Err(Error::config("dataset", "train split is empty"));
    }
    ages.sort_by(f64::total_cmp);
    let n = ages.len();
    let threshold = if n % 2 == 1 {
        ages[n / 2]
    } else {
        0.5 * (ages[n / 2 - 1] + ages[n / 2])
    };
    let tags = dataset
        .records
        .iter()
        .map(|r| if r.age <= threshold { AgeGroup::Young } else { AgeGroup::Old })
        .collect();
    Ok(AgeGroups { threshold, tags })
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn record(id: usize, patient: &str, split: Split, age: f64, features: Vec<f64>) -> EmbeddingRecord {
        EmbeddingRecord {
            record_id: format!("r{id}"),
            patient_id: patient.to_owned(),
            sex: (id % 2) as u8,
            age,
            cancer_1y: 0,
            cancer_2y: id.is_multiple_of(3) as u8,
            split,
            features,
        }
    }
}
