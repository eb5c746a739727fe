//! Seeded sampling: uniform torus elements, binary secrets and rounded
//! Gaussian noise.

use core::f64::consts::PI;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// The generator used for all key material and encryption randomness.
pub type CsRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> CsRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derive an independent child generator (for per-worker streams).
pub fn fork(rng: &mut impl RngCore) -> CsRng {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    ChaCha20Rng::from_seed(seed)
}

pub fn uniform_torus(rng: &mut impl RngCore) -> u64 {
    rng.next_u64()
}

pub fn binary(rng: &mut impl RngCore) -> u64 {
    rng.next_u64() & 1
}

/// Uniform `f64` in `(0, 1]`.
fn unit_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = unit_open(rng);
    let u2 = unit_open(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Rounded Gaussian torus noise with standard deviation `std * q`.
pub fn gaussian_torus(rng: &mut impl RngCore, std: f64) -> u64 {
    if std == 0.0 {
        return 0;
    }
    let x = standard_normal(rng) * std * 18_446_744_073_709_551_616.0;
    libm::round(x) as i64 as u64
}

/// Uniform integer in `0..=255`.
pub fn byte(rng: &mut impl RngCore) -> u8 {
    (rng.next_u32() & 0xff) as u8
}
