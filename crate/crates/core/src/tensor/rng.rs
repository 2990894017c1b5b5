use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// Stream labels used by the pipeline stages.
pub mod stream {
    pub const INIT: &str = "init";
    pub const REPARAM: &str = "reparam";
    pub const SHUFFLE: &str = "shuffle";
    pub const SYNTH: &str = "synth";
    pub const POISON: &str = "poison";
}

/// Deterministic random stream keyed by `(seed, stream_label)`.
///
/// The ChaCha key is the SHA-256 of the little-endian seed followed by the
/// label bytes, so streams are independent and platform-stable.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    label: String,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(stream_label.as_bytes());
        let key: [u8; 32] = h.finalize().into();
        SeededRng {
            seed,
            label: stream_label.to_owned(),
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// A child stream, e.g. one per sweep cell.
    pub fn derive(seed: u64, stream_label: &str, index: u64) -> Self {
        SeededRng::new(seed, &format!("{stream_label}/{index}"))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_label(&self) -> &str {
        &self.label
    }

    pub fn standard_normal(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.normal();
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}
