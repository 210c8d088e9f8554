//! Seeded channel generation.
//!
//! Entries are i.i.d. circularly-symmetric complex Gaussian with zero mean
//! and unit variance (real and imaginary parts each N(0, 1/2)). Draws come
//! from a ChaCha8 stream keyed by the experiment seed, with the trial index
//! as the stream number, filled row by row — so `(seed, trial)` pins the
//! matrix bit-for-bit across runs and platforms.

use mwf_core::ComplexMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn generate_channel(m: usize, n: usize, seed: u64, trial: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let normal = StandardNormal;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..(m * n) {
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        data.push(Complex64::new(re * scale, im * scale));
    }
    ComplexMatrix::new(m, n, data).expect("dimensions are positive")
}

/// Noise variance for a target SNR: `sigma^2 = P / 10^(snr/10)`.
pub fn noise_variance(total_power: f64, snr_db: f64) -> f64 {
    total_power / 10f64.powf(snr_db / 10.0)
}
