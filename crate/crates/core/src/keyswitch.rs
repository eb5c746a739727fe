//! LWE key switching from the extracted ring key back to the LWE key.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::decomposition::Decomposer;
use crate::error::{Error, Result};
use crate::lwe::{lwe_encrypt_phase, LweCiphertext, LweSecretKey};

/// `keys[j * levels + lev]` encrypts `s'_j * q / B^(lev+1)` under the
/// output key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySwitchKey {
    pub input_dimension: usize,
    pub output_dimension: usize,
    pub decomposer: Decomposer,
    pub keys: Vec<LweCiphertext>,
}

impl KeySwitchKey {
    pub fn generate(
        from: &LweSecretKey,
        to: &LweSecretKey,
        decomposer: Decomposer,
        noise_std: f64,
        rng: &mut impl RngCore,
    ) -> Self {
        let mut keys = Vec::with_capacity(from.dimension() * decomposer.levels);
        for &s in &from.coeffs {
            for lev in 0..decomposer.levels {
                let phase = s.wrapping_mul(decomposer.weight(lev));
                keys.push(lwe_encrypt_phase(to, phase, noise_std, rng));
            }
        }
        KeySwitchKey {
            input_dimension: from.dimension(),
            output_dimension: to.dimension(),
            decomposer,
            keys,
        }
    }
}

/// Re-encrypt `ct` (under the input key) under the output key.
pub fn key_switch(ct: &LweCiphertext, ksk: &KeySwitchKey) -> Result<LweCiphertext> {
    if ct.dimension() != ksk.input_dimension {
        return Err(Error::DimensionMismatch { expected: ksk.input_dimension, found: ct.dimension() });
    }
    let levels = ksk.decomposer.levels;
    let mut out = LweCiphertext::trivial(ksk.output_dimension, ct.b);
    let mut digits = [0i64; 64];
    for (j, &a) in ct.a.iter().enumerate() {
        ksk.decomposer.decompose_into(a, &mut digits[..levels]);
        for (lev, &d) in digits[..levels].iter().enumerate() {
            if d != 0 {
                out.add_scaled_assign(&ksk.keys[j * levels + lev], -d);
            }
        }
    }
    Ok(out)
}
