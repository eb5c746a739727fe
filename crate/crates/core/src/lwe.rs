//! LWE ciphertexts over the 64-bit torus: `b = <a, s> + e + round(q/p * m)`.

use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::encoding::{decode, encode, in_range};
use crate::error::{Error, Result};
use crate::params::FheParams;
use crate::random::{binary, gaussian_torus, uniform_torus};

/// Binary LWE secret key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweSecretKey {
    pub coeffs: Vec<u64>,
}

impl LweSecretKey {
    pub fn generate(dimension: usize, rng: &mut impl RngCore) -> Self {
        LweSecretKey { coeffs: (0..dimension).map(|_| binary(rng)).collect() }
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweCiphertext {
    pub a: Vec<u64>,
    pub b: u64,
}

impl LweCiphertext {
    /// Noiseless encryption of a raw phase under any key: `a = 0`.
    pub fn trivial(dimension: usize, phase: u64) -> Self {
        LweCiphertext { a: vec![0; dimension], b: phase }
    }

    pub fn zero(dimension: usize) -> Self {
        Self::trivial(dimension, 0)
    }

    pub fn dimension(&self) -> usize {
        self.a.len()
    }

    pub fn add_assign(&mut self, other: &LweCiphertext) {
        debug_assert_eq!(self.a.len(), other.a.len());
        for (x, &y) in self.a.iter_mut().zip(&other.a) {
            *x = x.wrapping_add(y);
        }
        self.b = self.b.wrapping_add(other.b);
    }

    pub fn sub_assign(&mut self, other: &LweCiphertext) {
        debug_assert_eq!(self.a.len(), other.a.len());
        for (x, &y) in self.a.iter_mut().zip(&other.a) {
            *x = x.wrapping_sub(y);
        }
        self.b = self.b.wrapping_sub(other.b);
    }

    /// `self += w * other`.
    pub fn add_scaled_assign(&mut self, other: &LweCiphertext, w: i64) {
        debug_assert_eq!(self.a.len(), other.a.len());
        let w = w as u64;
        for (x, &y) in self.a.iter_mut().zip(&other.a) {
            *x = x.wrapping_add(y.wrapping_mul(w));
        }
        self.b = self.b.wrapping_add(other.b.wrapping_mul(w));
    }

    /// Add a plaintext phase to the body.
    pub fn add_phase(&mut self, phase: u64) {
        self.b = self.b.wrapping_add(phase);
    }

    pub fn sub_phase(&mut self, phase: u64) {
        self.b = self.b.wrapping_sub(phase);
    }
}

/// Encrypt a raw torus phase.
pub fn lwe_encrypt_phase(key: &LweSecretKey, phase: u64, noise_std: f64, rng: &mut impl RngCore) -> LweCiphertext {
    let a: Vec<u64> = (0..key.dimension()).map(|_| uniform_torus(rng)).collect();
    let mask = dot(&a, &key.coeffs);
    let b = mask.wrapping_add(phase).wrapping_add(gaussian_torus(rng, noise_std));
    LweCiphertext { a, b }
}

/// Encrypt `m` in the canonical range of modulus `p`.
pub fn lwe_encrypt_with(
    key: &LweSecretKey,
    m: i64,
    p: u64,
    noise_std: f64,
    rng: &mut impl RngCore,
) -> Result<LweCiphertext> {
    if !in_range(m, p) {
        return Err(Error::MessageOutOfRange { message: m, modulus: p });
    }
    Ok(lwe_encrypt_phase(key, encode(m, p), noise_std, rng))
}

pub fn lwe_encrypt(key: &LweSecretKey, m: i64, params: &FheParams, rng: &mut impl RngCore) -> Result<LweCiphertext> {
    lwe_encrypt_with(key, m, params.plaintext_modulus, params.noise_std, rng)
}

/// `b - <a, s>`.
pub fn lwe_phase(key: &LweSecretKey, ct: &LweCiphertext) -> u64 {
    ct.b.wrapping_sub(dot(&ct.a, &key.coeffs))
}

pub fn lwe_decrypt_with(key: &LweSecretKey, ct: &LweCiphertext, p: u64) -> i64 {
    decode(lwe_phase(key, ct), p)
}

pub fn lwe_decrypt(key: &LweSecretKey, ct: &LweCiphertext, params: &FheParams) -> i64 {
    lwe_decrypt_with(key, ct, params.plaintext_modulus)
}

/// `sum_j w_j * ct_j`.
pub fn lwe_linear(cts: &[&LweCiphertext], weights: &[i64]) -> Result<LweCiphertext> {
    let first = cts.first().ok_or(Error::EmptyInput)?;
    if cts.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: cts.len(), found: weights.len() });
    }
    let n = first.dimension();
    let mut out = LweCiphertext::zero(n);
    for (ct, &w) in cts.iter().zip(weights) {
        if ct.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ct.dimension() });
        }
        if w != 0 {
            out.add_scaled_assign(ct, w);
        }
    }
    Ok(out)
}

fn dot(a: &[u64], s: &[u64]) -> u64 {
    a.iter().zip(s).fold(0u64, |acc, (&x, &y)| acc.wrapping_add(x.wrapping_mul(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::phase_error;
    use crate::random::rng_from_seed;

    #[test]
    fn round_trip_all_messages_toy() {
        let params = FheParams::toy();
        let mut rng = rng_from_seed(1);
        let key = LweSecretKey::generate(params.lwe_dimension, &mut rng);
        for m in -31..=32 {
            for _ in 0..100 {
                let ct = lwe_encrypt(&key, m, &params, &mut rng).unwrap();
                assert_eq!(lwe_decrypt(&key, &ct, &params), m);
            }
        }
    }

    #[test]
    fn noiseless_zero_has_body_equal_to_mask_product() {
        let mut rng = rng_from_seed(2);
        let key = LweSecretKey::generate(32, &mut rng);
        let ct = lwe_encrypt_with(&key, 0, 64, 0.0, &mut rng).unwrap();
        assert_eq!(ct.b, dot(&ct.a, &key.coeffs));
    }

    #[test]
    fn rejects_out_of_range_message() {
        let mut rng = rng_from_seed(3);
        let key = LweSecretKey::generate(8, &mut rng);
        assert!(lwe_encrypt_with(&key, 33, 64, 0.0, &mut rng).is_err());
        assert!(lwe_encrypt_with(&key, -32, 64, 0.0, &mut rng).is_err());
    }

    #[test]
    fn linear_combination_small_example() {
        let params = FheParams::toy();
        let mut rng = rng_from_seed(4);
        let key = LweSecretKey::generate(params.lwe_dimension, &mut rng);
        let cts: Vec<_> = [1, 0, 1].iter().map(|&m| lwe_encrypt(&key, m, &params, &mut rng).unwrap()).collect();
        let refs: Vec<_> = cts.iter().collect();
        let out = lwe_linear(&refs, &[1, -2, 3]).unwrap();
        assert_eq!(lwe_decrypt(&key, &out, &params), 4);
        let zero = lwe_linear(&refs, &[0, 0, 0]).unwrap();
        assert_eq!(lwe_phase(&key, &zero), 0);
        assert_eq!(phase_error(lwe_phase(&key, &zero), 0, 64), 0);
    }

    #[test]
    fn linear_rejects_empty_and_mismatch() {
        assert_eq!(lwe_linear(&[], &[]), Err(Error::EmptyInput));
        let a = LweCiphertext::zero(4);
        let b = LweCiphertext::zero(5);
        assert!(lwe_linear(&[&a, &b], &[1, 1]).is_err());
        assert!(lwe_linear(&[&a], &[1, 1]).is_err());
    }
}
