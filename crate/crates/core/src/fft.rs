//! Negacyclic polynomial multiplication in `Z[X]/(X^N + 1)` through an
//! `N/2`-point complex FFT.
//!
//! A real polynomial of degree `< N` is folded into `N/2` complex values
//! `(x_j + i x_{j+N/2}) * zeta^j` with `zeta = exp(i pi / N)`; a length-`N/2`
//! DFT of that vector evaluates the polynomial at the odd powers
//! `zeta^(4k+1)`, which is enough to recover any real product.
//!
//! The forward transform is a decimation-in-frequency pass that leaves its
//! output in bit-reversed order and the inverse is the matching
//! decimation-in-time pass, so no permutation is ever materialized. All
//! pointwise work happens in the bit-reversed domain.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;
const INV_TWO_POW_64: f64 = 1.0 / TWO_POW_64;
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52

/// A polynomial in the evaluation domain, split into real and imaginary
/// lanes.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPoly {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl FourierPoly {
    pub fn zero(len: usize) -> Self {
        FourierPoly { re: vec![0.0; len], im: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn clear(&mut self) {
        self.re.iter_mut().for_each(|x| *x = 0.0);
        self.im.iter_mut().for_each(|x| *x = 0.0);
    }

    /// `self += a * b` pointwise.
    pub fn mul_acc(&mut self, a: &FourierPoly, b: &FourierPoly) {
        let n = self.re.len();
        let (sr, si) = (&mut self.re[..n], &mut self.im[..n]);
        let (ar, ai) = (&a.re[..n], &a.im[..n]);
        let (br, bi) = (&b.re[..n], &b.im[..n]);
        for j in 0..n {
            sr[j] += ar[j] * br[j] - ai[j] * bi[j];
            si[j] += ar[j] * bi[j] + ai[j] * br[j];
        }
    }

    /// `self = a * b` pointwise.
    pub fn mul_assign_from(&mut self, a: &FourierPoly, b: &FourierPoly) {
        let n = self.re.len();
        let (sr, si) = (&mut self.re[..n], &mut self.im[..n]);
        let (ar, ai) = (&a.re[..n], &a.im[..n]);
        let (br, bi) = (&b.re[..n], &b.im[..n]);
        for j in 0..n {
            sr[j] = ar[j] * br[j] - ai[j] * bi[j];
            si[j] = ar[j] * bi[j] + ai[j] * br[j];
        }
    }
}

/// Precomputed twiddles for one ring dimension. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct FftPlan {
    ring_dim: usize,
    half: usize,
    twist_re: Vec<f64>,
    twist_im: Vec<f64>,
    tw_re: Vec<f64>,
    tw_im: Vec<f64>,
    // (butterfly half-width, offset into the twiddle tables), largest first
    stages: Vec<(usize, usize)>,
}

impl FftPlan {
    /// Plan for `Z[X]/(X^ring_dim + 1)`; `ring_dim` must be a power of two
    /// and at least 2.
    pub fn new(ring_dim: usize) -> Self {
        assert!(ring_dim >= 2 && ring_dim.is_power_of_two(), "ring dimension must be a power of two");
        let half = ring_dim / 2;
        let mut twist_re = Vec::with_capacity(half);
        let mut twist_im = Vec::with_capacity(half);
        for j in 0..half {
            let angle = PI * j as f64 / ring_dim as f64;
            twist_re.push(libm::cos(angle));
            twist_im.push(libm::sin(angle));
        }
        let mut tw_re = Vec::new();
        let mut tw_im = Vec::new();
        let mut stages = Vec::new();
        let mut len = half;
        while len >= 2 {
            let h = len / 2;
            stages.push((h, tw_re.len()));
            for j in 0..h {
                let angle = 2.0 * PI * j as f64 / len as f64;
                tw_re.push(libm::cos(angle));
                tw_im.push(libm::sin(angle));
            }
            len /= 2;
        }
        FftPlan { ring_dim, half, twist_re, twist_im, tw_re, tw_im, stages }
    }

    pub fn ring_dim(&self) -> usize {
        self.ring_dim
    }

    pub fn fourier_len(&self) -> usize {
        self.half
    }

    pub fn zero_poly(&self) -> FourierPoly {
        FourierPoly::zero(self.half)
    }

    /// Forward transform of a torus polynomial, read as signed integers.
    pub fn forward_torus(&self, poly: &[u64], out: &mut FourierPoly) {
        assert_eq!(poly.len(), self.ring_dim);
        let m = self.half;
        let (lo, hi) = poly.split_at(m);
        let (tr, ti) = (&self.twist_re[..m], &self.twist_im[..m]);
        let (or, oi) = (&mut out.re[..m], &mut out.im[..m]);
        for j in 0..m {
            let x = lo[j] as i64 as f64;
            let y = hi[j] as i64 as f64;
            or[j] = x * tr[j] - y * ti[j];
            oi[j] = x * ti[j] + y * tr[j];
        }
        self.dif(out);
    }

    /// Forward transform of an integer polynomial.
    pub fn forward_int(&self, poly: &[i64], out: &mut FourierPoly) {
        assert_eq!(poly.len(), self.ring_dim);
        let m = self.half;
        let (lo, hi) = poly.split_at(m);
        let (tr, ti) = (&self.twist_re[..m], &self.twist_im[..m]);
        let (or, oi) = (&mut out.re[..m], &mut out.im[..m]);
        for j in 0..m {
            let x = lo[j] as f64;
            let y = hi[j] as f64;
            or[j] = x * tr[j] - y * ti[j];
            oi[j] = x * ti[j] + y * tr[j];
        }
        self.dif(out);
    }

    /// Inverse transform, reduced modulo `2^64` and added into `out`.
    /// `data` is used as scratch.
    pub fn backward_add_torus(&self, data: &mut FourierPoly, out: &mut [u64]) {
        assert_eq!(out.len(), self.ring_dim);
        self.dit(data);
        let m = self.half;
        let scale = 1.0 / m as f64;
        let (lo, hi) = out.split_at_mut(m);
        let (tr, ti) = (&self.twist_re[..m], &self.twist_im[..m]);
        let (dr, di) = (&data.re[..m], &data.im[..m]);
        for j in 0..m {
            let x = (dr[j] * tr[j] + di[j] * ti[j]) * scale;
            let y = (di[j] * tr[j] - dr[j] * ti[j]) * scale;
            lo[j] = lo[j].wrapping_add(f64_to_torus(x));
            hi[j] = hi[j].wrapping_add(f64_to_torus(y));
        }
    }

    /// Inverse transform to real coefficients (no modular reduction).
    pub fn backward_real(&self, data: &mut FourierPoly, out: &mut [f64]) {
        assert_eq!(out.len(), self.ring_dim);
        self.dit(data);
        let m = self.half;
        let scale = 1.0 / m as f64;
        let (lo, hi) = out.split_at_mut(m);
        for j in 0..m {
            let (dr, di) = (data.re[j], data.im[j]);
            let (tr, ti) = (self.twist_re[j], self.twist_im[j]);
            lo[j] = (dr * tr + di * ti) * scale;
            hi[j] = (di * tr - dr * ti) * scale;
        }
    }

    fn dif(&self, data: &mut FourierPoly) {
        let (re, im) = (&mut data.re[..], &mut data.im[..]);
        let mut stages = self.stages.chunks_exact(2);
        for pair in &mut stages {
            let (h, off1) = pair[0];
            let (q, off2) = pair[1];
            let (w1r, w1i) = (&self.tw_re[off1..off1 + h], &self.tw_im[off1..off1 + h]);
            let (w2r, w2i) = (&self.tw_re[off2..off2 + q], &self.tw_im[off2..off2 + q]);
            for (rb, ib) in re.chunks_exact_mut(4 * q).zip(im.chunks_exact_mut(4 * q)) {
                let (r01, r23) = rb.split_at_mut(2 * q);
                let (i01, i23) = ib.split_at_mut(2 * q);
                let (r0, r1) = r01.split_at_mut(q);
                let (r2, r3) = r23.split_at_mut(q);
                let (i0, i1) = i01.split_at_mut(q);
                let (i2, i3) = i23.split_at_mut(q);
                for j in 0..q {
                    let (a0r, a0i, a1r, a1i) = (r0[j], i0[j], r1[j], i1[j]);
                    let (a2r, a2i, a3r, a3i) = (r2[j], i2[j], r3[j], i3[j]);
                    let (y0r, y0i) = (a0r + a2r, a0i + a2i);
                    let (d0r, d0i) = (a0r - a2r, a0i - a2i);
                    let (y2r, y2i) = (d0r * w1r[j] - d0i * w1i[j], d0r * w1i[j] + d0i * w1r[j]);
                    let (y1r, y1i) = (a1r + a3r, a1i + a3i);
                    let (d1r, d1i) = (a1r - a3r, a1i - a3i);
                    let (y3r, y3i) = (d1r * w1r[j + q] - d1i * w1i[j + q], d1r * w1i[j + q] + d1i * w1r[j + q]);
                    r0[j] = y0r + y1r;
                    i0[j] = y0i + y1i;
                    let (er, ei) = (y0r - y1r, y0i - y1i);
                    r1[j] = er * w2r[j] - ei * w2i[j];
                    i1[j] = er * w2i[j] + ei * w2r[j];
                    r2[j] = y2r + y3r;
                    i2[j] = y2i + y3i;
                    let (fr, fi) = (y2r - y3r, y2i - y3i);
                    r3[j] = fr * w2r[j] - fi * w2i[j];
                    i3[j] = fr * w2i[j] + fi * w2r[j];
                }
            }
        }
        if !stages.remainder().is_empty() {
            radix2_pairs(re, im);
        }
    }

    fn dit(&self, data: &mut FourierPoly) {
        let (re, im) = (&mut data.re[..], &mut data.im[..]);
        let rest = if self.stages.len() % 2 == 1 {
            radix2_pairs(re, im);
            &self.stages[..self.stages.len() - 1]
        } else {
            &self.stages[..]
        };
        for pair in rest.rchunks_exact(2) {
            let (h, off1) = pair[0];
            let (q, off2) = pair[1];
            let (w1r, w1i) = (&self.tw_re[off1..off1 + h], &self.tw_im[off1..off1 + h]);
            let (w2r, w2i) = (&self.tw_re[off2..off2 + q], &self.tw_im[off2..off2 + q]);
            for (rb, ib) in re.chunks_exact_mut(4 * q).zip(im.chunks_exact_mut(4 * q)) {
                let (r01, r23) = rb.split_at_mut(2 * q);
                let (i01, i23) = ib.split_at_mut(2 * q);
                let (r0, r1) = r01.split_at_mut(q);
                let (r2, r3) = r23.split_at_mut(q);
                let (i0, i1) = i01.split_at_mut(q);
                let (i2, i3) = i23.split_at_mut(q);
                for j in 0..q {
                    // v = b * conj(w)
                    let (vr, vi) = (r1[j] * w2r[j] + i1[j] * w2i[j], i1[j] * w2r[j] - r1[j] * w2i[j]);
                    let (y0r, y0i, y1r, y1i) = (r0[j] + vr, i0[j] + vi, r0[j] - vr, i0[j] - vi);
                    let (vr, vi) = (r3[j] * w2r[j] + i3[j] * w2i[j], i3[j] * w2r[j] - r3[j] * w2i[j]);
                    let (y2r, y2i, y3r, y3i) = (r2[j] + vr, i2[j] + vi, r2[j] - vr, i2[j] - vi);
                    let (vr, vi) = (y2r * w1r[j] + y2i * w1i[j], y2i * w1r[j] - y2r * w1i[j]);
                    r0[j] = y0r + vr;
                    i0[j] = y0i + vi;
                    r2[j] = y0r - vr;
                    i2[j] = y0i - vi;
                    let (wr, wi) = (w1r[j + q], w1i[j + q]);
                    let (vr, vi) = (y3r * wr + y3i * wi, y3i * wr - y3r * wi);
                    r1[j] = y1r + vr;
                    i1[j] = y1i + vi;
                    r3[j] = y1r - vr;
                    i3[j] = y1i - vi;
                }
            }
        }
    }
}

fn radix2_pairs(re: &mut [f64], im: &mut [f64]) {
    for (r, i) in re.chunks_exact_mut(2).zip(im.chunks_exact_mut(2)) {
        let (ur, vr) = (r[0], r[1]);
        let (ui, vi) = (i[0], i[1]);
        r[0] = ur + vr;
        r[1] = ur - vr;
        i[0] = ui + vi;
        i[1] = ui - vi;
    }
}

/// Reduce a real number modulo `2^64` to the nearest torus element.
#[inline(always)]
pub fn f64_to_torus(x: f64) -> u64 {
    let k = (x * INV_TWO_POW_64 + ROUND_MAGIC) - ROUND_MAGIC;
    let r = x - k * TWO_POW_64;
    (r as i64) as u64
}

/// Nearest integer for `|x| < 2^51`, ties to even.
#[inline(always)]
fn round_small(x: f64) -> i64 {
    ((x + ROUND_MAGIC) - ROUND_MAGIC) as i64
}

const SPLIT_BITS: u32 = 22;

/// Exact `a * s mod (X^N + 1, 2^64)` for a torus polynomial `a` and an
/// integer polynomial `s` with small coefficients (`|s_j| <= 64`).
///
/// The torus operand is split into three 22-bit limbs so that every
/// floating-point convolution stays far below 2^53 and rounds exactly.
pub fn mul_torus_small_exact(plan: &FftPlan, a: &[u64], s: &[i64]) -> Vec<u64> {
    let n = plan.ring_dim();
    assert_eq!(a.len(), n);
    assert_eq!(s.len(), n);
    debug_assert!(s.iter().all(|&x| x.unsigned_abs() <= 64));
    let mut s_hat = plan.zero_poly();
    plan.forward_int(s, &mut s_hat);
    let mut out = vec![0u64; n];
    let mut limb = vec![0i64; n];
    let mut limb_hat = plan.zero_poly();
    let mut real = vec![0.0f64; n];
    let mask = (1u64 << SPLIT_BITS) - 1;
    for k in 0..3 {
        let shift = SPLIT_BITS * k;
        for (l, &x) in limb.iter_mut().zip(a) {
            *l = ((x >> shift) & mask) as i64;
        }
        plan.forward_int(&limb, &mut limb_hat);
        let mut prod = plan.zero_poly();
        prod.mul_assign_from(&limb_hat, &s_hat);
        plan.backward_real(&mut prod, &mut real);
        for (o, &r) in out.iter_mut().zip(&real) {
            let v = round_small(r) as u64;
            *o = o.wrapping_add(v.wrapping_shl(shift));
        }
    }
    out
}

/// Approximate `a * b mod (X^N + 1, 2^64)` through a single floating-point
/// convolution. `b` must have small coefficients (gadget digits); the result
/// carries rounding noise far below the cryptographic noise.
pub fn mul_torus_int_approx(plan: &FftPlan, a: &[u64], b: &[i64]) -> Vec<u64> {
    let mut a_hat = plan.zero_poly();
    let mut b_hat = plan.zero_poly();
    plan.forward_torus(a, &mut a_hat);
    plan.forward_int(b, &mut b_hat);
    let mut prod = plan.zero_poly();
    prod.mul_assign_from(&a_hat, &b_hat);
    let mut out = vec![0u64; plan.ring_dim()];
    plan.backward_add_torus(&mut prod, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{negacyclic_mul_int, negacyclic_mul_torus_int};
    use crate::random::rng_from_seed;
    use rand_core::RngCore;

    #[test]
    fn integer_products_match_schoolbook() {
        let mut rng = rng_from_seed(7);
        for &n in &[2usize, 4, 8, 64, 256] {
            let plan = FftPlan::new(n);
            for _ in 0..5 {
                let a: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 2001) as i64 - 1000).collect();
                let b: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 2001) as i64 - 1000).collect();
                let expected = negacyclic_mul_int(&a, &b);
                let (mut ah, mut bh, mut ph) = (plan.zero_poly(), plan.zero_poly(), plan.zero_poly());
                plan.forward_int(&a, &mut ah);
                plan.forward_int(&b, &mut bh);
                ph.mul_assign_from(&ah, &bh);
                let mut real = vec![0.0; n];
                plan.backward_real(&mut ph, &mut real);
                let got: Vec<i64> = real.iter().map(|&x| libm::round(x) as i64).collect();
                assert_eq!(got, expected, "n={n}");
            }
        }
    }

    #[test]
    fn exact_split_product_matches_schoolbook() {
        let mut rng = rng_from_seed(11);
        for &n in &[16usize, 512, 2048] {
            let plan = FftPlan::new(n);
            let a: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
            let s: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 3) as i64 - 1).collect();
            assert_eq!(mul_torus_small_exact(&plan, &a, &s), negacyclic_mul_torus_int(&a, &s));
        }
    }

    #[test]
    fn approximate_product_is_close() {
        let mut rng = rng_from_seed(12);
        let n = 1024;
        let plan = FftPlan::new(n);
        let a: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
        let b: Vec<i64> = (0..n).map(|_| (rng.next_u32() % 65536) as i64 - 32768).collect();
        let exact = negacyclic_mul_torus_int(&a, &b);
        let approx = mul_torus_int_approx(&plan, &a, &b);
        for (x, y) in exact.iter().zip(&approx) {
            let err = x.wrapping_sub(*y) as i64;
            assert!(err.unsigned_abs() < 1 << 36, "error {err}");
        }
    }

    #[test]
    fn torus_reduction() {
        assert_eq!(f64_to_torus(3.0 * TWO_POW_64 + 1048576.0), 1 << 20);
        assert_eq!(f64_to_torus(-5.0), (-5i64) as u64);
        assert_eq!(f64_to_torus(TWO_POW_64 * 0.75), 3u64 << 62);
    }
}
