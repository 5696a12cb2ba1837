//! Seeded random numbers for reproducible problem instances.
//!
//! The stream is ChaCha8 (from `rand_chacha`) and normal deviates come from
//! the Box–Muller transform, so a seed fixes every generated instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProblemError;
use crate::linalg::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * th.sin());
        r * th.cos()
    }
}

/// `n` standard normal deviates.
pub fn rng_normal<T: Scalar>(rng: &mut SeededRng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::lit(rng.normal())).collect()
}

/// Sparse matrix whose entries are independently nonzero with probability
/// `density`, with standard normal values. Entries are visited row by row.
pub fn sparse_random<T: Scalar>(
    rng: &mut SeededRng,
    rows: usize,
    cols: usize,
    density: f64,
) -> Result<CsrMatrix<T>, ProblemError> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(ProblemError::InvalidParameter(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let mut trip = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.uniform() < density {
                trip.push((i, j, T::lit(rng.normal())));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(rows, cols, &trip)?)
}
