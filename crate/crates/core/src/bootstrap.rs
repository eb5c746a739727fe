//! Programmable bootstrapping: modulus switch, blind rotation, sample
//! extraction and key switching.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::decomposition::Decomposer;
use crate::encoding::{canonical, encode};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::keyswitch::{key_switch, KeySwitchKey};
use crate::lwe::{LweCiphertext, LweSecretKey};
use crate::params::FheParams;
use crate::poly::{mul_by_monomial, mul_by_monomial_minus_one};
use crate::random::{fork, rng_from_seed};
use crate::rgsw::{external_product_add, rgsw_encrypt, ExternalProductBuffers, FourierRgsw, RgswCiphertext};
use crate::rlwe::{sample_extract, RingSecretKey, RlweCiphertext};

/// A lookup table `Z_{p_in} -> Z_{p_out}` satisfying the negacyclic
/// constraint `g(v + p_in/2) = -g(v) mod p_out`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramFunction {
    input_modulus: u64,
    output_modulus: u64,
    // indexed by the residue v mod p_in, values canonical mod p_out
    table: Vec<i64>,
}

impl ProgramFunction {
    /// `table[r]` is `g(v)` for the residue `r = v mod p_in`.
    pub fn new(input_modulus: u64, output_modulus: u64, table: Vec<i64>) -> Result<Self> {
        for p in [input_modulus, output_modulus] {
            if p < 2 || p % 2 != 0 {
                return Err(Error::InvalidParams(format!("program modulus {p} must be even and >= 2")));
            }
        }
        if table.len() as u64 != input_modulus {
            return Err(Error::DimensionMismatch { expected: input_modulus as usize, found: table.len() });
        }
        let table: Vec<i64> = table.into_iter().map(|x| canonical(x, output_modulus)).collect();
        let half = (input_modulus / 2) as usize;
        for r in 0..half {
            if canonical(table[r + half] + table[r], output_modulus) != 0 {
                return Err(Error::NotNegacyclic { input: canonical(r as i64, input_modulus) });
            }
        }
        Ok(ProgramFunction { input_modulus, output_modulus, table })
    }

    /// Tabulate `g` over the canonical range of `p_in`.
    pub fn from_fn(input_modulus: u64, output_modulus: u64, g: impl Fn(i64) -> i64) -> Result<Self> {
        let table = (0..input_modulus as i64).map(|r| g(canonical(r, input_modulus))).collect();
        Self::new(input_modulus, output_modulus, table)
    }

    /// Define `g` on `[0, p_in/2)` and extend it negacyclically.
    pub fn from_half(input_modulus: u64, output_modulus: u64, g: impl Fn(i64) -> i64) -> Result<Self> {
        let half = (input_modulus / 2) as i64;
        let table = (0..input_modulus as i64).map(|r| if r < half { g(r) } else { -g(r - half) }).collect();
        Self::new(input_modulus, output_modulus, table)
    }

    pub fn input_modulus(&self) -> u64 {
        self.input_modulus
    }

    pub fn output_modulus(&self) -> u64 {
        self.output_modulus
    }

    /// `g(v)` in canonical form modulo `p_out`.
    pub fn eval(&self, v: i64) -> i64 {
        self.table[v.rem_euclid(self.input_modulus as i64) as usize]
    }

    /// Table in canonical input order `-p/2+1 ..= p/2`.
    pub fn canonical_table(&self) -> Vec<i64> {
        let half = (self.input_modulus / 2) as i64;
        ((-half + 1)..=half).map(|v| self.eval(v)).collect()
    }

    /// Test polynomial: coefficient `j` encodes `g(round(j p / 2N))`.
    pub fn test_vector(&self, ring_dimension: usize) -> Result<TestVector> {
        let two_n = 2 * ring_dimension as u128;
        if self.input_modulus as u128 > two_n {
            return Err(Error::InvalidParams(format!(
                "input modulus {} exceeds 2N = {two_n}",
                self.input_modulus
            )));
        }
        let p = self.input_modulus as u128;
        let coeffs = (0..ring_dimension as u128)
            .map(|j| {
                let v = ((2 * j * p + two_n) / (2 * two_n)) as i64;
                encode(self.eval(v), self.output_modulus)
            })
            .collect();
        Ok(TestVector { coeffs, input_modulus: self.input_modulus, output_modulus: self.output_modulus })
    }
}

/// A program function compiled for one ring dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestVector {
    pub coeffs: Vec<u64>,
    pub input_modulus: u64,
    pub output_modulus: u64,
}

/// An LWE ciphertext whose components live in `Z_modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchedLwe {
    pub a: Vec<u64>,
    pub b: u64,
    pub modulus: u128,
}

/// `round(x * t / q)` componentwise.
pub fn mod_switch(ct: &LweCiphertext, to_modulus: u128) -> Result<SwitchedLwe> {
    let q = 1u128 << 64;
    if to_modulus > q {
        return Err(Error::ModulusTooLarge(to_modulus));
    }
    if to_modulus == 0 {
        return Err(Error::InvalidParams("target modulus must be positive".into()));
    }
    let sw = |x: u64| (((x as u128 * to_modulus) + (1u128 << 63)) >> 64) % to_modulus;
    Ok(SwitchedLwe { a: ct.a.iter().map(|&x| sw(x) as u64).collect(), b: sw(ct.b) as u64, modulus: to_modulus })
}

/// Everything the server needs to bootstrap under one parameter set.
#[derive(Debug, Clone)]
pub struct BootstrapKey {
    pub params: FheParams,
    pub bsk: Vec<RgswCiphertext>,
    pub ksk: KeySwitchKey,
    fourier: Vec<FourierRgsw>,
    plan: FftPlan,
}

impl PartialEq for BootstrapKey {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.bsk == other.bsk && self.ksk == other.ksk
    }
}

impl BootstrapKey {
    /// Assemble from standard-domain parts (e.g. after deserialization).
    pub fn from_parts(params: FheParams, bsk: Vec<RgswCiphertext>, ksk: KeySwitchKey) -> Result<Self> {
        params.validate()?;
        if bsk.len() != params.lwe_dimension {
            return Err(Error::DimensionMismatch { expected: params.lwe_dimension, found: bsk.len() });
        }
        if ksk.input_dimension != params.ring_dimension || ksk.output_dimension != params.lwe_dimension {
            return Err(Error::DimensionMismatch { expected: params.ring_dimension, found: ksk.input_dimension });
        }
        let plan = FftPlan::new(params.ring_dimension);
        let fourier = bsk.iter().map(|g| FourierRgsw::from_standard(g, &plan)).collect();
        Ok(BootstrapKey { params, bsk, ksk, fourier, plan })
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    pub fn ring_dimension(&self) -> usize {
        self.params.ring_dimension
    }

    pub fn lwe_dimension(&self) -> usize {
        self.params.lwe_dimension
    }

    pub fn buffers(&self) -> BootstrapBuffers {
        BootstrapBuffers::new(&self.plan, self.params.bsk_levels)
    }
}

/// Generate a ring key and bootstrap key for an existing LWE key.
pub fn keygen_for(params: &FheParams, lwe_key: &LweSecretKey, rng: &mut impl RngCore) -> Result<(RingSecretKey, BootstrapKey)> {
    params.validate()?;
    if lwe_key.dimension() != params.lwe_dimension {
        return Err(Error::DimensionMismatch { expected: params.lwe_dimension, found: lwe_key.dimension() });
    }
    let n = params.ring_dimension;
    let ring_key = RingSecretKey::generate(n, rng);
    let plan = FftPlan::new(n);
    let decomposer = Decomposer::new(params.bsk_base_log, params.bsk_levels);
    let mut mu = vec![0i64; n];
    let bsk = lwe_key
        .coeffs
        .iter()
        .map(|&s| {
            mu[0] = s as i64;
            rgsw_encrypt(&ring_key, &mu, decomposer, params.noise_std, &plan, rng)
        })
        .collect();
    let ks_decomposer = Decomposer::new(params.ksk_base_log, params.ksk_levels);
    let ksk = KeySwitchKey::generate(&ring_key.to_lwe_key(), lwe_key, ks_decomposer, params.noise_std, rng);
    let fourier = {
        let bsk: &Vec<RgswCiphertext> = &bsk;
        bsk.iter().map(|g| FourierRgsw::from_standard(g, &plan)).collect()
    };
    Ok((ring_key, BootstrapKey { params: *params, bsk, ksk, fourier, plan }))
}

/// Deterministic key generation from a seed.
pub fn keygen(params: &FheParams, seed: u64) -> Result<(LweSecretKey, RingSecretKey, BootstrapKey)> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let lwe_key = LweSecretKey::generate(params.lwe_dimension, &mut rng);
    let mut child = fork(&mut rng);
    let (ring_key, bsk) = keygen_for(params, &lwe_key, &mut child)?;
    Ok((lwe_key, ring_key, bsk))
}

/// Scratch space for one bootstrap at a time.
#[derive(Debug, Clone)]
pub struct BootstrapBuffers {
    ep: ExternalProductBuffers,
    diff: RlweCiphertext,
    acc_next: RlweCiphertext,
}

impl BootstrapBuffers {
    pub fn new(plan: &FftPlan, levels: usize) -> Self {
        let n = plan.ring_dim();
        BootstrapBuffers {
            ep: ExternalProductBuffers::new(plan, levels),
            diff: RlweCiphertext::zero(n),
            acc_next: RlweCiphertext::zero(n),
        }
    }
}

/// Rotate `acc` by `X^{-phase(ct)}` where `ct` is modulo `2N`.
pub fn blind_rotate(acc: &mut RlweCiphertext, ct: &SwitchedLwe, bsk: &BootstrapKey, buf: &mut BootstrapBuffers) -> Result<()> {
    let n = bsk.ring_dimension();
    if acc.ring_dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, found: acc.ring_dimension() });
    }
    if ct.a.len() != bsk.lwe_dimension() {
        return Err(Error::DimensionMismatch { expected: bsk.lwe_dimension(), found: ct.a.len() });
    }
    if ct.modulus != 2 * n as u128 {
        return Err(Error::InvalidParams(format!("blind rotation needs modulus {}, got {}", 2 * n, ct.modulus)));
    }
    let two_n = 2 * n;
    let shift = (two_n - ct.b as usize % two_n) % two_n;
    if shift != 0 {
        let next = &mut buf.acc_next;
        mul_by_monomial(&acc.a, shift, &mut next.a);
        mul_by_monomial(&acc.b, shift, &mut next.b);
        core::mem::swap(acc, next);
    }
    for (i, &a_i) in ct.a.iter().enumerate() {
        let a_i = a_i as usize % two_n;
        if a_i == 0 {
            continue;
        }
        mul_by_monomial_minus_one(&acc.a, a_i, &mut buf.diff.a);
        mul_by_monomial_minus_one(&acc.b, a_i, &mut buf.diff.b);
        external_product_add(acc, &buf.diff, &bsk.fourier[i], &bsk.plan, &mut buf.ep);
    }
    Ok(())
}

/// Bootstrap with a precompiled test vector and caller-owned buffers.
pub fn bootstrap_with(
    ct: &LweCiphertext,
    tv: &TestVector,
    bsk: &BootstrapKey,
    buf: &mut BootstrapBuffers,
) -> Result<LweCiphertext> {
    if ct.dimension() != bsk.lwe_dimension() {
        return Err(Error::DimensionMismatch { expected: bsk.lwe_dimension(), found: ct.dimension() });
    }
    if tv.coeffs.len() != bsk.ring_dimension() {
        return Err(Error::DimensionMismatch { expected: bsk.ring_dimension(), found: tv.coeffs.len() });
    }
    let switched = mod_switch(ct, 2 * bsk.ring_dimension() as u128)?;
    let mut acc = RlweCiphertext::trivial(tv.coeffs.clone());
    blind_rotate(&mut acc, &switched, bsk, buf)?;
    key_switch(&sample_extract(&acc), &bsk.ksk)
}

/// `LWE(m) -> LWE(g(m))`, refreshing the noise.
pub fn bootstrap(ct: &LweCiphertext, g: &ProgramFunction, bsk: &BootstrapKey) -> Result<LweCiphertext> {
    let tv = g.test_vector(bsk.ring_dimension())?;
    bootstrap_with(ct, &tv, bsk, &mut bsk.buffers())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::decode;
    use crate::lwe::{lwe_decrypt_with, lwe_encrypt_with};
    use crate::rgsw::rgsw_decrypt;
    use crate::rlwe::rlwe_phase;

    #[test]
    fn negacyclic_check() {
        assert!(ProgramFunction::from_fn(8, 8, |v| v).is_err());
        assert!(ProgramFunction::from_half(8, 8, |v| v).is_ok());
        let err = ProgramFunction::new(4, 4, vec![1, 0, 1, 0]).unwrap_err();
        assert_eq!(err, Error::NotNegacyclic { input: 0 });
    }

    #[test]
    fn forced_negacyclic_values() {
        let g = ProgramFunction::from_half(8, 8, |v| v).unwrap();
        assert_eq!(g.eval(1), 1);
        assert_eq!(g.eval(-1), -3);
        assert_eq!(g.canonical_table(), vec![-1, -2, -3, 0, 1, 2, 3, 0]);
    }

    #[test]
    fn mod_switch_identity_and_exact_scaling() {
        let ct = LweCiphertext { a: vec![1, 2, u64::MAX], b: encode(5, 64) };
        let same = mod_switch(&ct, 1u128 << 64).unwrap();
        assert_eq!(same.a, ct.a);
        assert_eq!(same.b, ct.b);
        for m in -31..=32i64 {
            let t = mod_switch(&LweCiphertext::trivial(0, encode(m, 64)), 1024).unwrap();
            assert_eq!(t.b as i64, (16 * m).rem_euclid(1024));
        }
        assert!(mod_switch(&ct, (1u128 << 64) + 1).is_err());
    }

    #[test]
    fn keygen_deterministic_and_bsk_encrypts_key_bits() {
        let params = FheParams { lwe_dimension: 4, ring_dimension: 64, ..FheParams::toy() };
        let (s1, r1, k1) = keygen(&params, 1).unwrap();
        let (s2, r2, k2) = keygen(&params, 1).unwrap();
        assert_eq!((&s1, &r1), (&s2, &r2));
        assert!(k1 == k2);
        let (s3, _, k3) = keygen(&params, 2).unwrap();
        assert!(k1 != k3 || s1 != s3);
        let plan = FftPlan::new(64);
        for (i, ggsw) in k1.bsk.iter().enumerate() {
            let mu = rgsw_decrypt(&r1, ggsw, &plan);
            assert_eq!(mu[0], s1.coeffs[i] as i64);
            assert!(mu[1..].iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn trivial_rotation() {
        let params = FheParams::toy();
        let (_, ring, bsk) = keygen(&params, 3).unwrap();
        let n = params.ring_dimension;
        let tv: Vec<u64> = (0..n as u64).map(|j| j << 40).collect();
        for k in [0usize, 1, 100, 511, 512, 700] {
            let ct = SwitchedLwe { a: vec![0; params.lwe_dimension], b: k as u64, modulus: 2 * n as u128 };
            let mut acc = RlweCiphertext::trivial(tv.clone());
            blind_rotate(&mut acc, &ct, &bsk, &mut bsk.buffers()).unwrap();
            let mut expected = vec![0u64; n];
            mul_by_monomial(&tv, (2 * n - k) % (2 * n), &mut expected);
            assert_eq!(acc.b, expected);
            assert!(acc.a.iter().all(|&x| x == 0));
            let _ = &ring;
        }
    }

    #[test]
    fn random_rotation_selects_negacyclic_coefficient() {
        let params = FheParams::toy();
        let (key, ring, bsk) = keygen(&params, 4).unwrap();
        let n = params.ring_dimension;
        let two_n = 2 * n as u64;
        let p = 2048u64;
        let tv_msg: Vec<i64> = (0..n as i64).map(|j| j - 256).collect();
        let tv: Vec<u64> = tv_msg.iter().map(|&m| encode(m, p)).collect();
        let mut rng = rng_from_seed(44);
        let plan = FftPlan::new(n);
        let mut buf = bsk.buffers();
        for _ in 0..200 {
            let a: Vec<u64> = (0..params.lwe_dimension).map(|_| rng.next_u64() % two_n).collect();
            let b = rng.next_u64() % two_n;
            let mask = a.iter().zip(&key.coeffs).map(|(x, s)| x * s).sum::<u64>();
            let phase = ((b + two_n * 64 - mask) % two_n) as usize;
            let expected = if phase < n { tv_msg[phase] } else { canonical(-tv_msg[phase - n], p) };
            let ct = SwitchedLwe { a, b, modulus: two_n as u128 };
            let mut acc = RlweCiphertext::trivial(tv.clone());
            blind_rotate(&mut acc, &ct, &bsk, &mut buf).unwrap();
            assert_eq!(decode(rlwe_phase(&ring, &acc, &plan)[0], p), expected);
        }
    }

    #[test]
    fn bootstrap_identity_small_space() {
        let params = FheParams::toy();
        let (key, _, bsk) = keygen(&params, 5).unwrap();
        let g = ProgramFunction::from_half(8, 8, |v| v).unwrap();
        let mut rng = rng_from_seed(55);
        for m in -3..=4 {
            let ct = lwe_encrypt_with(&key, m, 8, params.noise_std, &mut rng).unwrap();
            let out = bootstrap(&ct, &g, &bsk).unwrap();
            assert_eq!(lwe_decrypt_with(&key, &out, 8), g.eval(m), "m={m}");
        }
    }

    use rand_core::RngCore;
}
