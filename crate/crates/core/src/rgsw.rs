//! RGSW ciphertexts and the external product `RLWE x RGSW -> RLWE`.
//!
//! Rows `0..levels` carry `mu * q/B^(lev+1)` in the mask slot and rows
//! `levels..2*levels` carry it in the body slot.

use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::decomposition::Decomposer;
use crate::fft::{FftPlan, FourierPoly};
use crate::poly::negacyclic_mul_torus_int;
use crate::rlwe::{rlwe_encrypt, rlwe_phase, RingSecretKey, RlweCiphertext};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgswCiphertext {
    pub rows: Vec<RlweCiphertext>,
    pub decomposer: Decomposer,
}

/// Encrypt an integer polynomial `mu` (small coefficients) under `key`.
pub fn rgsw_encrypt(
    key: &RingSecretKey,
    mu: &[i64],
    decomposer: Decomposer,
    noise_std: f64,
    plan: &FftPlan,
    rng: &mut impl RngCore,
) -> RgswCiphertext {
    let n = key.ring_dimension();
    assert_eq!(mu.len(), n);
    let zero = vec![0u64; n];
    let levels = decomposer.levels;
    let mut rows = Vec::with_capacity(2 * levels);
    for slot in 0..2 {
        for lev in 0..levels {
            let mut row = rlwe_encrypt(key, &zero, noise_std, plan, rng);
            let w = decomposer.weight(lev);
            let target = if slot == 0 { &mut row.a } else { &mut row.b };
            for (x, &m) in target.iter_mut().zip(mu) {
                *x = x.wrapping_add((m as u64).wrapping_mul(w));
            }
            rows.push(row);
        }
    }
    RgswCiphertext { rows, decomposer }
}

/// Recover the integer message polynomial from the body-slot rows.
/// Used to inspect keys in tests and tooling.
pub fn rgsw_decrypt(key: &RingSecretKey, ct: &RgswCiphertext, plan: &FftPlan) -> Vec<i64> {
    let levels = ct.decomposer.levels;
    let row = &ct.rows[levels];
    let w = ct.decomposer.weight(0);
    rlwe_phase(key, row, plan)
        .iter()
        .map(|&x| {
            let v = (x as u128 + (w as u128 >> 1)) / w as u128;
            let base = 1u128 << ct.decomposer.base_log;
            let r = (v % base) as i64;
            if r >= (base as i64) / 2 {
                r - base as i64
            } else {
                r
            }
        })
        .collect()
}

/// RGSW ciphertext with every row in the evaluation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRgsw {
    pub rows_a: Vec<FourierPoly>,
    pub rows_b: Vec<FourierPoly>,
    pub decomposer: Decomposer,
}

impl FourierRgsw {
    pub fn from_standard(ct: &RgswCiphertext, plan: &FftPlan) -> Self {
        let mut rows_a = Vec::with_capacity(ct.rows.len());
        let mut rows_b = Vec::with_capacity(ct.rows.len());
        for row in &ct.rows {
            let mut fa = plan.zero_poly();
            let mut fb = plan.zero_poly();
            plan.forward_torus(&row.a, &mut fa);
            plan.forward_torus(&row.b, &mut fb);
            rows_a.push(fa);
            rows_b.push(fb);
        }
        FourierRgsw { rows_a, rows_b, decomposer: ct.decomposer }
    }
}

/// Per-call scratch space for external products; one per worker.
#[derive(Debug, Clone)]
pub struct ExternalProductBuffers {
    digits: Vec<Vec<i64>>,
    digit_hat: FourierPoly,
    acc_a: FourierPoly,
    acc_b: FourierPoly,
}

impl ExternalProductBuffers {
    pub fn new(plan: &FftPlan, levels: usize) -> Self {
        ExternalProductBuffers {
            digits: vec![vec![0i64; plan.ring_dim()]; levels],
            digit_hat: plan.zero_poly(),
            acc_a: plan.zero_poly(),
            acc_b: plan.zero_poly(),
        }
    }
}

/// `out += ct ⊡ ggsw`.
pub fn external_product_add(
    out: &mut RlweCiphertext,
    ct: &RlweCiphertext,
    ggsw: &FourierRgsw,
    plan: &FftPlan,
    buf: &mut ExternalProductBuffers,
) {
    let d = ggsw.decomposer;
    let levels = d.levels;
    buf.acc_a.clear();
    buf.acc_b.clear();
    for (slot, poly) in [&ct.a, &ct.b].into_iter().enumerate() {
        d.decompose_poly(poly, &mut buf.digits);
        for lev in 0..levels {
            plan.forward_int(&buf.digits[lev], &mut buf.digit_hat);
            let row = slot * levels + lev;
            buf.acc_a.mul_acc(&buf.digit_hat, &ggsw.rows_a[row]);
            buf.acc_b.mul_acc(&buf.digit_hat, &ggsw.rows_b[row]);
        }
    }
    plan.backward_add_torus(&mut buf.acc_a, &mut out.a);
    plan.backward_add_torus(&mut buf.acc_b, &mut out.b);
}

/// Exact coefficient-domain external product, the reference for tests.
pub fn external_product_exact(ct: &RlweCiphertext, ggsw: &RgswCiphertext) -> RlweCiphertext {
    let d = ggsw.decomposer;
    let n = ct.ring_dimension();
    let mut digits = vec![vec![0i64; n]; d.levels];
    let mut out = RlweCiphertext::zero(n);
    for (slot, poly) in [&ct.a, &ct.b].into_iter().enumerate() {
        d.decompose_poly(poly, &mut digits);
        for (lev, dig) in digits.iter().enumerate() {
            let row = &ggsw.rows[slot * d.levels + lev];
            crate::poly::add_assign(&mut out.a, &negacyclic_mul_torus_int(&row.a, dig));
            crate::poly::add_assign(&mut out.b, &negacyclic_mul_torus_int(&row.b, dig));
        }
    }
    out
}
