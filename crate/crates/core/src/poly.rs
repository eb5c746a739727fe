//! Coefficient-domain polynomial arithmetic in `Z_q[X]/(X^N + 1)`.
//!
//! The schoolbook products here are exact and quadratic; they serve as the
//! reference the FFT path is tested against and as the fallback for tiny
//! rings.

use alloc::vec;
use alloc::vec::Vec;

/// Exact negacyclic product of two integer polynomials (wrapping `i64`).
pub fn negacyclic_mul_int(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut out = vec![0i64; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let k = i + j;
            let prod = x.wrapping_mul(y);
            if k < n {
                out[k] = out[k].wrapping_add(prod);
            } else {
                out[k - n] = out[k - n].wrapping_sub(prod);
            }
        }
    }
    out
}

/// Exact negacyclic product of a torus polynomial and an integer polynomial
/// modulo `2^64`.
pub fn negacyclic_mul_torus_int(a: &[u64], b: &[i64]) -> Vec<u64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut out = vec![0u64; n];
    for (j, &y) in b.iter().enumerate() {
        if y == 0 {
            continue;
        }
        let y = y as u64;
        for (i, &x) in a.iter().enumerate() {
            let k = i + j;
            let prod = x.wrapping_mul(y);
            if k < n {
                out[k] = out[k].wrapping_add(prod);
            } else {
                out[k - n] = out[k - n].wrapping_sub(prod);
            }
        }
    }
    out
}

/// `out = X^k * a` for `k` taken modulo `2N`.
pub fn mul_by_monomial(a: &[u64], k: usize, out: &mut [u64]) {
    let n = a.len();
    assert_eq!(n, out.len());
    let k = k % (2 * n);
    let (shift, negate) = if k >= n { (k - n, true) } else { (k, false) };
    for (i, &x) in a.iter().enumerate() {
        let j = i + shift;
        let (idx, neg) = if j < n { (j, negate) } else { (j - n, !negate) };
        out[idx] = if neg { x.wrapping_neg() } else { x };
    }
}

/// `out = X^k * a - a`, the CMux difference used by blind rotation.
pub fn mul_by_monomial_minus_one(a: &[u64], k: usize, out: &mut [u64]) {
    mul_by_monomial(a, k, out);
    for (o, &x) in out.iter_mut().zip(a) {
        *o = o.wrapping_sub(x);
    }
}

pub fn add_assign(a: &mut [u64], b: &[u64]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = x.wrapping_add(y);
    }
}

pub fn sub_assign(a: &mut [u64], b: &[u64]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = x.wrapping_sub(y);
    }
}
