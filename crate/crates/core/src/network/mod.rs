//! The layer pipeline in three backends: float reference, exact integer
//! oracle and encrypted evaluation.

pub mod encrypted;
pub mod ops;
pub mod plain;

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::random::byte;

pub use encrypted::{
    encrypt_image, forward_encrypted, network_keygen, CipherTensor, ClientKey, Executor, Sequential, ServerKey,
};
pub use plain::{forward_float, forward_plain, Audit, FloatAudit, LayerAudit};

/// Index of the largest score; ties go to the lowest index.
pub fn classify<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Pixels at or above 128 become 1, the rest 0.
pub fn binarize(pixels: &[u8]) -> Vec<u8> {
    pixels.iter().map(|&p| (p >= 128) as u8).collect()
}

/// One Poisson-coded frame: a pixel spikes when it exceeds a uniform draw
/// from `0..=255`, so its rate is `pixel / 256`.
pub fn poisson_encode(pixels: &[u8], rng: &mut impl RngCore) -> Vec<u8> {
    pixels.iter().map(|&p| (p > byte(rng)) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    #[test]
    fn classify_ties_go_low() {
        assert_eq!(classify(&[0, 8, 0, 0, 0, 0, 0, 0, 0, 0]), 1);
        assert_eq!(classify(&[3i64; 10]), 0);
        assert_eq!(classify(&[1, 5, 5, 2]), 1);
    }

    #[test]
    fn poisson_extremes_and_determinism() {
        let mut rng = rng_from_seed(9);
        let zeros = [0u8; 100];
        for _ in 0..50 {
            assert!(poisson_encode(&zeros, &mut rng).iter().all(|&s| s == 0));
        }
        let img: Vec<u8> = (0..=255).collect();
        let a = poisson_encode(&img, &mut rng_from_seed(3));
        let b = poisson_encode(&img, &mut rng_from_seed(3));
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_full_pixel_rate() {
        let mut rng = rng_from_seed(10);
        let spikes: u32 = (0..256).map(|_| poisson_encode(&[255], &mut rng)[0] as u32).sum();
        // Binomial(256, 255/256): mean 255, sd ~1
        assert!((252..=256).contains(&spikes), "{spikes}");
    }

    #[test]
    fn binarize_threshold() {
        assert_eq!(binarize(&[0, 127, 128, 255]), [0, 0, 1, 1]);
    }
}
