//! Demographic adversary: one small network per attribute reading the
//! latent code. Binary branches end in a sigmoid and use BCE, continuous
//! branches are linear outputs with MSE.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Attribute;
use crate::error::{check_len, Error, Result};
use crate::tensor::{sigmoid, AffineLayer, Matrix, SeededRng};

pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryBranch {
    pub attribute: Attribute,
    pub kind: BranchKind,
    pub layers: Vec<AffineLayer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    pub input_dim: usize,
    pub branches: Vec<AdversaryBranch>,
}

/// Per-layer inputs and pre-activations saved by a batched forward pass.
#[derive(Clone, Debug)]
pub struct BranchCache {
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    /// Final layer output: logit for binary branches, value for continuous.
    pub output: Vec<f64>,
}

impl AdversaryBranch {
    pub fn init(attribute: Attribute, input_dim: usize, hidden: &[usize], rng: &mut SeededRng) -> Self {
        let mut widths = vec![input_dim];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| AffineLayer::init_uniform(w[0], w[1], rng))
            .collect();
        AdversaryBranch {
            attribute,
            kind: kind_of(attribute),
            layers,
        }
    }

    fn validate(&self, input_dim: usize) -> Result<()> {
        let first = self
            .layers
            .first()
            .ok_or_else(|| Error::config("adversary", format!("{} branch has no layers", self.attribute)))?;
        check_len("adversary branch input", input_dim, first.in_dim())?;
        for w in self.layers.windows(2) {
            check_len("adversary hidden width", w[0].out_dim(), w[1].in_dim())?;
        }
        check_len("adversary branch output", 1, self.layers.last().map_or(0, |l| l.out_dim()))?;
        if self.kind != kind_of(self.attribute) {
            return Err(Error::config("adversary", format!("{} branch has the wrong kind", self.attribute)));
        }
        Ok(())
    }

    /// Sigmoid probability for binary branches, raw value otherwise.
    pub fn forward(&self, z: &[f64]) -> Result<f64> {
        let mut h = z.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            h = l.forward(&h)?;
            if i < last {
                h.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(self.activate(h[0]))
    }

    fn activate(&self, o: f64) -> f64 {
        match self.kind {
            BranchKind::Binary => sigmoid(o),
            BranchKind::Continuous => o,
        }
    }

    pub fn forward_batch(&self, z: &Matrix) -> Result<BranchCache> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = z.clone();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let a = l.forward_batch(&h)?;
            inputs.push(h);
            h = if i < last { a.map(|v| v.max(0.0)) } else { a.clone() };
            pre.push(a);
        }
        Ok(BranchCache {
            inputs,
            pre,
            output: h.into_vec(),
        })
    }

    pub fn predictions(&self, cache: &BranchCache) -> Vec<f64> {
        cache.output.iter().map(|&o| self.activate(o)).collect()
    }

    /// Backpropagates `d/d output` to the branch input, accumulating
    /// parameter gradients.
    pub fn backward_batch(&mut self, cache: &BranchCache, grad_output: &[f64]) -> Result<Matrix> {
        let mut g = Matrix::from_vec(grad_output.len(), 1, grad_output.to_vec())?;
        check_len("adversary output gradient", cache.output.len(), grad_output.len())?;
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                relu_mask(&mut g, &cache.pre[i]);
            }
            g = self.layers[i].backward_batch(&cache.inputs[i], &g)?;
        }
        Ok(g)
    }

    /// Input gradient only; parameter gradients are left alone.
    pub fn input_grad(&self, cache: &BranchCache, grad_output: &[f64]) -> Result<Matrix> {
        let mut g = Matrix::from_vec(grad_output.len(), 1, grad_output.to_vec())?;
        check_len("adversary output gradient", cache.output.len(), grad_output.len())?;
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                relu_mask(&mut g, &cache.pre[i]);
            }
            g = self.layers[i].backward_input_batch(&g)?;
        }
        Ok(g)
    }
}

fn relu_mask(g: &mut Matrix, pre: &Matrix) {
    for (gv, a) in g.as_mut_slice().iter_mut().zip(pre.as_slice()) {
        if *a <= 0.0 {
            *gv = 0.0;
        }
    }
}

fn kind_of(a: Attribute) -> BranchKind {
    if a.is_binary() {
        BranchKind::Binary
    } else {
        BranchKind::Continuous
    }
}

impl AdversaryParams {
    /// One branch per attribute, each `input_dim → hidden… → 1` with ReLU between layers.
    pub fn init(input_dim: usize, attributes: &[Attribute], hidden: &[usize], rng: &mut SeededRng) -> Self {
        AdversaryParams {
            input_dim,
            branches: attributes
                .iter()
                .map(|&a| AdversaryBranch::init(a, input_dim, hidden, rng))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for b in &self.branches {
            b.validate(self.input_dim)?;
        }
        Ok(())
    }

    pub fn layers(&self) -> impl Iterator<Item = &AffineLayer> {
        self.branches.iter().flat_map(|b| b.layers.iter())
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut AffineLayer> {
        self.branches.iter_mut().flat_map(|b| b.layers.iter_mut())
    }

    pub fn zero_grad(&mut self) {
        self.layers_mut().for_each(AffineLayer::zero_grad);
    }

    /// Prediction per attribute for a single latent vector.
    pub fn forward(&self, z: &[f64]) -> Result<BTreeMap<Attribute, f64>> {
        check_len("adversary input", self.input_dim, z.len())?;
        self.branches
            .iter()
            .map(|b| Ok((b.attribute, b.forward(z)?)))
            .collect()
    }
}

/// Binary cross-entropy with `p` clamped to `[1e-7, 1 - 1e-7]`. `y` may be soft.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean loss of one branch over a batch and its gradient with respect to
/// the pre-activation output. Targets are not validated here.
pub fn branch_loss(kind: BranchKind, output: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_len("branch targets", output.len(), targets.len())?;
    let n = output.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(output.len());
    for (&o, &t) in output.iter().zip(targets) {
        match kind {
            BranchKind::Binary => {
                let p = sigmoid(o);
                loss += bce(p, t);
                let clamped = !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p);
                grad.push(if clamped { 0.0 } else { (p - t) / n });
            }
            BranchKind::Continuous => {
                let d = o - t;
                loss += d * d;
                grad.push(2.0 * d / n);
            }
        }
    }
    Ok((loss / n, grad))
}

/// Total adversarial loss for single-example predictions: the sum of each
/// branch's loss. Binary targets must be 0 or 1.
pub fn adversary_loss(
    predictions: &BTreeMap<Attribute, f64>,
    targets: &BTreeMap<Attribute, f64>,
) -> Result<(f64, BTreeMap<Attribute, f64>)> {
    let mut per = BTreeMap::new();
    for (&a, &p) in predictions {
        let &y = targets
            .get(&a)
            .ok_or_else(|| Error::config("targets", format!("missing target for {a}")))?;
        let l = if a.is_binary() {
            check_binary(a, y)?;
            bce(p, y)
        } else {
            (p - y) * (p - y)
        };
        per.insert(a, l);
    }
    Ok((per.values().sum(), per))
}

pub(crate) fn check_binary(a: Attribute, y: f64) -> Result<()> {
    if y == 0.0 || y == 1.0 {
        Ok(())
    } else {
        Err(Error::config("targets", format!("{a} target must be 0 or 1, got {y}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_branch(a: Attribute, l: usize) -> AdversaryBranch {
        AdversaryBranch {
            attribute: a,
            kind: kind_of(a),
            layers: vec![AffineLayer::zeros(l, 1)],
        }
    }

    #[test]
    fn zero_branches() {
        let z = [0.3, -2.0];
        assert_eq!(zero_branch(Attribute::Sex, 2).forward(&z).unwrap(), 0.5);
        assert_eq!(zero_branch(Attribute::Age, 2).forward(&z).unwrap(), 0.0);
    }

    #[test]
    fn single_affine_branch_by_hand() {
        let mut b = zero_branch(Attribute::Sex, 2);
        b.layers[0].weight_mut().as_mut_slice().copy_from_slice(&[0.5, -1.5]);
        b.layers[0].bias_mut()[0] = 0.25;
        let o: f64 = 0.5 * 1.2 - 1.5 * 0.4 + 0.25;
        let want = 1.0 / (1.0 + (-o).exp());
        assert!((b.forward(&[1.2, 0.4]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn bce_values() {
        assert!((bce(0.5, 1.0) - 2f64.ln()).abs() < 1e-12);
        assert!(bce(1.0, 1.0) > 0.0 && bce(1.0, 1.0) < 1.1e-7);
        assert!(bce(0.0, 0.0) < 1.1e-7);
        assert!(bce(0.0, 1.0).is_finite());
    }

    #[test]
    fn total_is_sum() {
        // pick predictions whose losses are exactly 0.7-ish and 0.3
        let p = (-0.7f64).exp();
        let preds = BTreeMap::from([(Attribute::Sex, p), (Attribute::Age, 0.3f64.sqrt())]);
        let targets = BTreeMap::from([(Attribute::Sex, 1.0), (Attribute::Age, 0.0)]);
        let (total, per) = adversary_loss(&preds, &targets).unwrap();
        assert!((per[&Attribute::Sex] - 0.7).abs() < 1e-12);
        assert!((per[&Attribute::Age] - 0.3).abs() < 1e-12);
        assert_eq!(total, per[&Attribute::Sex] + per[&Attribute::Age]);
    }

    #[test]
    fn target_errors() {
        let preds = BTreeMap::from([(Attribute::Sex, 0.5)]);
        assert!(adversary_loss(&preds, &BTreeMap::new()).is_err());
        let bad = BTreeMap::from([(Attribute::Sex, 0.5)]);
        assert!(adversary_loss(&preds, &bad).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let mut rng = SeededRng::new(5, "adv");
        let p = AdversaryParams::init(4, &Attribute::ALL, &[8], &mut rng);
        let z = Matrix::from_vec(3, 4, rng.standard_normal(12)).unwrap();
        for b in &p.branches {
            let cache = b.forward_batch(&z).unwrap();
            let preds = b.predictions(&cache);
            for (r, p) in preds.iter().enumerate() {
                assert!((p - b.forward(z.row(r)).unwrap()).abs() < 1e-12);
            }
        }
    }
}
