use crate::error::{check_len, Error, Result};

use super::layer::AffineLayer;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Moment estimates for one parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step_count: 0,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
///
/// Non-finite gradients are rejected before anything is modified; `block`
/// names the parameter block in the error.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    block: &str,
) -> Result<()> {
    check_len("adam gradient", params.len(), grads.len())?;
    check_len("adam moments", params.len(), state.first_moment.len())?;
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::config("lr", format!("must be positive, got {lr}")));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("gradient of {block}")));
    }
    state.step_count += 1;
    let t = state.step_count as f64;
    let c1 = 1.0 - state.beta1.powf(t);
    let c2 = 1.0 - state.beta2.powf(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        let v = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        params[i] -= lr * (m / c1) / ((v / c2).sqrt() + state.epsilon);
    }
    Ok(())
}

/// Adam states for a list of layers, two blocks (weight, bias) per layer.
#[derive(Clone, Debug)]
pub struct LayerAdam {
    states: Vec<AdamState>,
}

impl LayerAdam {
    pub fn for_layers<'a>(layers: impl IntoIterator<Item = &'a AffineLayer>) -> Self {
        let mut states = Vec::new();
        for l in layers {
            states.push(AdamState::new(l.out_dim() * l.in_dim()));
            states.push(AdamState::new(l.out_dim()));
        }
        LayerAdam { states }
    }

    /// Applies one update to every layer using its accumulated gradients.
    pub fn step<'a>(
        &mut self,
        layers: impl IntoIterator<Item = &'a mut AffineLayer>,
        lr: f64,
        name: &str,
    ) -> Result<()> {
        let mut states = self.states.iter_mut();
        for (li, layer) in layers.into_iter().enumerate() {
            for (bi, (p, g)) in layer.blocks_mut().into_iter().enumerate() {
                let st = states
                    .next()
                    .ok_or_else(|| Error::Numeric(format!("{name}: optimizer has fewer blocks than layers")))?;
                let kind = if bi == 0 { "weight" } else { "bias" };
                adam_step(p, g, st, lr, &format!("{name} layer {li} {kind}"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_fixed_point() {
        let mut p = vec![1.5, -2.0];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut s, 0.1, "p").unwrap();
        assert_eq!(p, vec![1.5, -2.0]);
        assert_eq!(s.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut s, 0.01, "p").unwrap();
        assert!((p[0] + 0.01).abs() < 1e-9, "{}", p[0]);
    }

    #[test]
    fn descends_quadratic() {
        let mut w = vec![1.0];
        let mut s = AdamState::new(1);
        for _ in 0..100 {
            let g = 2.0 * w[0];
            adam_step(&mut w, &[g], &mut s, 0.1, "w").unwrap();
        }
        assert!(w[0].abs() < 0.5, "{}", w[0]);
        assert_eq!(s.step_count, 100);
    }

    #[test]
    fn nan_gradient_names_block() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        let e = adam_step(&mut p, &[f64::NAN], &mut s, 0.1, "decoder bias").unwrap_err();
        assert!(e.to_string().contains("decoder bias"));
        assert_eq!(s.step_count, 0);
        assert_eq!(p, vec![0.0]);
    }
}
