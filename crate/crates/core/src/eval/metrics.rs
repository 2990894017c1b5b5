use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Area under the ROC curve as the Mann-Whitney rank statistic, ties
/// counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_len("auc labels", scores.len(), labels.len())?;
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric("auc needs both classes".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("auc scores".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // average 1-based ranks over tied runs
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                rank_sum_pos += avg;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Fraction correct with `score >= threshold` predicted positive.
pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> Result<f64> {
    check_len("accuracy labels", scores.len(), labels.len())?;
    if scores.is_empty() {
        return Err(Error::Metric("accuracy of an empty set".into()));
    }
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| (s >= threshold) == (y == 1))
        .count();
    Ok(hits as f64 / scores.len() as f64)
}

pub fn mae(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_len("mae targets", predictions.len(), targets.len())?;
    if predictions.is_empty() {
        return Err(Error::Metric("mae of an empty set".into()));
    }
    Ok(predictions.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum::<f64>() / predictions.len() as f64)
}

/// Positives in a group and how many of them were flagged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositiveCounts {
    pub positives: usize,
    pub flagged: usize,
}

impl PositiveCounts {
    pub fn tally(scores: &[f64], labels: &[u8], threshold: f64) -> Self {
        let mut c = PositiveCounts::default();
        for (&s, &y) in scores.iter().zip(labels) {
            if y == 1 {
                c.positives += 1;
                c.flagged += (s >= threshold) as usize;
            }
        }
        c
    }

    /// `None` without positives.
    pub fn tpr(self) -> Option<f64> {
        (self.positives > 0).then(|| self.flagged as f64 / self.positives as f64)
    }
}

/// True positive rate at `threshold`; `None` without positives.
pub fn tpr(scores: &[f64], labels: &[u8], threshold: f64) -> Option<f64> {
    PositiveCounts::tally(scores, labels, threshold).tpr()
}

/// Equal opportunity difference between two groups.
///
/// `eod` is `None` when either group has no positives; it is never
/// reported as zero in that case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eod {
    pub tpr_a: Option<f64>,
    pub tpr_b: Option<f64>,
    pub eod: Option<f64>,
}

impl Eod {
    /// The difference is formed on the integer counts, so it is the
    /// correctly rounded value of the exact rational (4/5 vs 3/5 gives 0.2,
    /// not `0.8 - 0.6`).
    pub fn from_counts(a: PositiveCounts, b: PositiveCounts) -> Self {
        let eod = (a.positives > 0 && b.positives > 0).then(|| {
            let num = (a.flagged * b.positives).abs_diff(b.flagged * a.positives);
            num as f64 / (a.positives * b.positives) as f64
        });
        Eod {
            tpr_a: a.tpr(),
            tpr_b: b.tpr(),
            eod,
        }
    }
}

/// `|TPR_a - TPR_b|` where `in_group_b[i]` puts record `i` in group b.
pub fn eod(scores: &[f64], labels: &[u8], in_group_b: &[bool], threshold: f64) -> Result<Eod> {
    check_len("eod labels", scores.len(), labels.len())?;
    check_len("eod groups", scores.len(), in_group_b.len())?;
    let mut a = PositiveCounts::default();
    let mut b = PositiveCounts::default();
    for ((&s, &y), &g) in scores.iter().zip(labels).zip(in_group_b) {
        if y == 1 {
            let c = if g { &mut b } else { &mut a };
            c.positives += 1;
            c.flagged += (s >= threshold) as usize;
        }
    }
    Ok(Eod::from_counts(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[0.9, 0.1], &[1, 0], 0.5).unwrap(), 1.0);
        assert_eq!(accuracy(&[0.5, 0.5], &[1, 0], 0.5).unwrap(), 0.5);
        assert_eq!(accuracy(&[0.9, 0.2, 0.7, 0.4], &[1, 0, 0, 0], 0.5).unwrap(), 0.75);
    }

    #[test]
    fn mae_cases() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[60.0, 70.0], &[62.0, 66.0]).unwrap(), 3.0);
    }

    #[test]
    fn eod_cases() {
        let a = PositiveCounts { positives: 5, flagged: 4 };
        let b = PositiveCounts { positives: 5, flagged: 3 };
        let e = Eod::from_counts(a, b);
        assert_eq!((e.tpr_a, e.tpr_b), (Some(0.8), Some(0.6)));
        assert_eq!(e.eod, Some(0.2));
        // group a positives [0.9, 0.2], group b positives [0.8, 0.7, 0.1]
        let s = [0.9, 0.2, 0.8, 0.7, 0.1, 0.95];
        let y = [1, 1, 1, 1, 1, 0];
        let g = [false, false, true, true, true, true];
        let r = eod(&s, &y, &g, 0.5).unwrap();
        assert_eq!(r.tpr_a, Some(0.5));
        assert!((r.eod.unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn eod_undefined_without_positives() {
        let r = eod(&[0.9, 0.1], &[1, 0], &[false, true], 0.5).unwrap();
        assert_eq!(r.tpr_b, None);
        assert_eq!(r.eod, None);
    }
}
