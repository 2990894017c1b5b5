//! Dense linear algebra, affine layers with hand-written gradients, Adam and
//! seeded random streams.

mod adam;
mod layer;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamState, LayerAdam};
pub use layer::AffineLayer;
pub use matrix::{dot, Matrix};
pub use rng::{stream, SeededRng};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
