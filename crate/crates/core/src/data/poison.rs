use serde::{Deserialize, Serialize};

use super::{Attribute, EmbeddingDataset, Split, Task};
use crate::error::{Error, Result};
use crate::tensor::{stream, SeededRng};

/// A targeted label-flipping attack on the train split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoisonSpec {
    pub target_attribute: Attribute,
    pub target_group: u8,
    pub task: Task,
    pub fraction: f64,
    pub seed: u64,
}

impl PoisonSpec {
    pub fn sex(target_group: u8, task: Task, fraction: f64, seed: u64) -> Self {
        PoisonSpec {
            target_attribute: Attribute::Sex,
            target_group,
            task,
            fraction,
            seed,
        }
    }

    /// Flip count for a group of `n_group` train records: `fraction * n`
    /// rounded half away from zero.
    pub fn flip_count(&self, n_group: usize) -> usize {
        (self.fraction * n_group as f64).round() as usize
    }
}

/// Flips the task label of `flip_count` train records in the target group,
/// chosen by a seeded shuffle. Nothing else changes.
pub fn poison_labels(dataset: &EmbeddingDataset, spec: &PoisonSpec) -> Result<EmbeddingDataset> {
    if spec.target_attribute != Attribute::Sex {
        return Err(Error::config(
            "target_attribute",
            format!("only sex can be targeted, got {}", spec.target_attribute),
        ));
    }
    if spec.target_group > 1 {
        return Err(Error::config("target_group", format!("must be 0 or 1, got {}", spec.target_group)));
    }
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::config("fraction", format!("must be in [0, 1], got {}", spec.fraction)));
    }
    let group: Vec<usize> = dataset
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.split == Split::Train && r.sex == spec.target_group)
        .map(|(i, _)| i)
        .collect();
    let k = spec.flip_count(group.len());
    let mut rng = SeededRng::new(spec.seed, stream::POISON);
    let order = rng.permutation(group.len());
    let mut records = dataset.records().to_vec();
    for &j in &order[..k] {
        let y = records[group[j]].label_mut(spec.task);
        *y = 1 - *y;
    }
    Ok(dataset.with_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{EmbeddingRecord, Split};

    fn males_and_females(n_male: usize, n_female: usize) -> EmbeddingDataset {
        let mut recs = Vec::new();
        for i in 0..n_male + n_female + 10 {
            recs.push(EmbeddingRecord {
                record_id: format!("r{i}"),
                patient_id: format!("p{i}"),
                sex: (i < n_male) as u8,
                age: 60.0,
                cancer_1y: (i % 3 == 0) as u8,
                cancer_2y: (i % 2 == 0) as u8,
                split: if i < n_male + n_female { Split::Train } else { Split::Test },
                features: vec![i as f64],
            });
        }
        EmbeddingDataset::new(1, recs).unwrap()
    }

    fn flips(a: &EmbeddingDataset, b: &EmbeddingDataset, task: Task) -> Vec<usize> {
        (0..a.len())
            .filter(|&i| a.records()[i].label(task) != b.records()[i].label(task))
            .collect()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let ds = males_and_females(20, 20);
        let p = poison_labels(&ds, &PoisonSpec::sex(1, Task::Cancer1y, 0.0, 3)).unwrap();
        assert_eq!(p, ds);
    }

    #[test]
    fn full_flip_hits_only_target_group() {
        let ds = males_and_females(20, 15);
        let p = poison_labels(&ds, &PoisonSpec::sex(1, Task::Cancer2y, 1.0, 3)).unwrap();
        let f = flips(&ds, &p, Task::Cancer2y);
        assert_eq!(f, (0..20).collect::<Vec<_>>());
        assert!(flips(&ds, &p, Task::Cancer1y).is_empty());
    }

    #[test]
    fn half_of_101_rounds_up() {
        let ds = males_and_females(101, 5);
        let p = poison_labels(&ds, &PoisonSpec::sex(1, Task::Cancer1y, 0.5, 11)).unwrap();
        assert_eq!(flips(&ds, &p, Task::Cancer1y).len(), 51);
    }

    #[test]
    fn rejects_age_target() {
        let ds = males_and_females(2, 2);
        let spec = PoisonSpec {
            target_attribute: Attribute::Age,
            ..PoisonSpec::sex(1, Task::Cancer1y, 0.5, 0)
        };
        assert!(poison_labels(&ds, &spec).is_err());
    }
}
