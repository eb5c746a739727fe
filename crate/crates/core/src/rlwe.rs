//! RLWE ciphertexts over `Z_q[X]/(X^N + 1)`: `b = a*s + e + m`.

use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::fft::{mul_torus_small_exact, FftPlan};
use crate::lwe::{LweCiphertext, LweSecretKey};
use crate::poly::negacyclic_mul_torus_int;
use crate::random::{binary, gaussian_torus, uniform_torus};

/// Binary ring secret key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSecretKey {
    pub coeffs: Vec<u64>,
}

impl RingSecretKey {
    pub fn generate(ring_dimension: usize, rng: &mut impl RngCore) -> Self {
        RingSecretKey { coeffs: (0..ring_dimension).map(|_| binary(rng)).collect() }
    }

    pub fn ring_dimension(&self) -> usize {
        self.coeffs.len()
    }

    /// The coefficient vector as an LWE key of dimension `N`; sample
    /// extraction produces ciphertexts under this key.
    pub fn to_lwe_key(&self) -> LweSecretKey {
        LweSecretKey { coeffs: self.coeffs.clone() }
    }

    fn signed(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| c as i64).collect()
    }

    /// `a * s` computed exactly.
    pub fn mul(&self, a: &[u64], plan: &FftPlan) -> Vec<u64> {
        if self.ring_dimension() <= 64 {
            negacyclic_mul_torus_int(a, &self.signed())
        } else {
            mul_torus_small_exact(plan, a, &self.signed())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlweCiphertext {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl RlweCiphertext {
    pub fn zero(ring_dimension: usize) -> Self {
        RlweCiphertext { a: vec![0; ring_dimension], b: vec![0; ring_dimension] }
    }

    /// Noiseless encryption with `a = 0`.
    pub fn trivial(body: Vec<u64>) -> Self {
        RlweCiphertext { a: vec![0; body.len()], b: body }
    }

    pub fn ring_dimension(&self) -> usize {
        self.b.len()
    }
}

/// Encrypt a torus polynomial (already scaled).
pub fn rlwe_encrypt(
    key: &RingSecretKey,
    message: &[u64],
    noise_std: f64,
    plan: &FftPlan,
    rng: &mut impl RngCore,
) -> RlweCiphertext {
    let n = key.ring_dimension();
    assert_eq!(message.len(), n);
    let a: Vec<u64> = (0..n).map(|_| uniform_torus(rng)).collect();
    let mut b = key.mul(&a, plan);
    for (x, &m) in b.iter_mut().zip(message) {
        *x = x.wrapping_add(m).wrapping_add(gaussian_torus(rng, noise_std));
    }
    RlweCiphertext { a, b }
}

/// `b - a*s`, the noisy message polynomial.
pub fn rlwe_phase(key: &RingSecretKey, ct: &RlweCiphertext, plan: &FftPlan) -> Vec<u64> {
    let mut out = key.mul(&ct.a, plan);
    for (o, &b) in out.iter_mut().zip(&ct.b) {
        *o = b.wrapping_sub(*o);
    }
    out
}

/// LWE encryption (dimension `N`) of the constant coefficient.
pub fn sample_extract(ct: &RlweCiphertext) -> LweCiphertext {
    let n = ct.ring_dimension();
    let mut a = Vec::with_capacity(n);
    a.push(ct.a[0]);
    for j in 1..n {
        a.push(ct.a[n - j].wrapping_neg());
    }
    LweCiphertext { a, b: ct.b[0] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, encode};
    use crate::lwe::lwe_decrypt_with;
    use crate::random::rng_from_seed;
    use rand_core::RngCore;

    #[test]
    fn round_trip_polynomial() {
        let mut rng = rng_from_seed(5);
        for &n in &[16usize, 512] {
            let plan = FftPlan::new(n);
            let key = RingSecretKey::generate(n, &mut rng);
            let msg: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 64) as i64 - 31).collect();
            let enc: Vec<u64> = msg.iter().map(|&m| encode(m, 64)).collect();
            let ct = rlwe_encrypt(&key, &enc, 2f64.powi(-40), &plan, &mut rng);
            let dec: Vec<i64> = rlwe_phase(&key, &ct, &plan).iter().map(|&x| decode(x, 64)).collect();
            assert_eq!(dec, msg);
        }
    }

    #[test]
    fn extraction_recovers_constant_coefficient() {
        let mut rng = rng_from_seed(6);
        let n = 256;
        let plan = FftPlan::new(n);
        let key = RingSecretKey::generate(n, &mut rng);
        let lwe_key = key.to_lwe_key();
        for _ in 0..100 {
            let msg: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 64) as i64 - 31).collect();
            let enc: Vec<u64> = msg.iter().map(|&m| encode(m, 64)).collect();
            let ct = rlwe_encrypt(&key, &enc, 2f64.powi(-40), &plan, &mut rng);
            assert_eq!(lwe_decrypt_with(&lwe_key, &sample_extract(&ct), 64), msg[0]);
        }
        let zero = rlwe_encrypt(&key, &vec![0; n], 0.0, &plan, &mut rng);
        assert_eq!(lwe_decrypt_with(&lwe_key, &sample_extract(&zero), 64), 0);
    }
}
