//! Signed gadget decomposition with base `B = 2^base_log`.
//!
//! A torus value is first rounded to its top `base_log * levels` bits and
//! then written as `sum_lev d_lev * q / B^(lev+1)` with balanced digits
//! `d_lev` in `[-B/2, B/2)`. Level 0 is the most significant.

/// Gadget decomposer for one `(base_log, levels)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decomposer {
    pub base_log: u32,
    pub levels: usize,
}

impl Decomposer {
    pub fn new(base_log: u32, levels: usize) -> Self {
        assert!((1..=32).contains(&base_log) && levels >= 1);
        assert!(base_log as usize * levels <= 64);
        Decomposer { base_log, levels }
    }

    fn total_bits(&self) -> u32 {
        self.base_log * self.levels as u32
    }

    /// Gadget weight `q / B^(lev+1)` of level `lev`.
    pub fn weight(&self, lev: usize) -> u64 {
        let shift = 64 - self.base_log * (lev as u32 + 1);
        1u64 << shift
    }

    /// `v` rounded to the nearest multiple of the smallest gadget weight.
    pub fn closest_representable(&self, v: u64) -> u64 {
        let shift = 64 - self.total_bits();
        if shift == 0 {
            return v;
        }
        let rounded = (v >> shift).wrapping_add((v >> (shift - 1)) & 1);
        rounded.wrapping_shl(shift)
    }

    /// Balanced digits of `v`, most significant first, into `out[..levels]`.
    #[inline]
    pub fn decompose_into(&self, v: u64, out: &mut [i64]) {
        let shift = 64 - self.total_bits();
        let mut state = if shift == 0 {
            v
        } else {
            (v >> shift).wrapping_add((v >> (shift - 1)) & 1)
        };
        let base = 1u64 << self.base_log;
        let mask = base - 1;
        let half = base >> 1;
        for lev in (0..self.levels).rev() {
            let digit = state & mask;
            state >>= self.base_log;
            if digit >= half {
                out[lev] = digit as i64 - base as i64;
                state = state.wrapping_add(1);
            } else {
                out[lev] = digit as i64;
            }
        }
    }

    /// Decompose every coefficient of `poly`; `out[lev][j]` receives the
    /// level-`lev` digit of coefficient `j`.
    pub fn decompose_poly(&self, poly: &[u64], out: &mut [alloc::vec::Vec<i64>]) {
        let shift = 64 - self.total_bits();
        let base = 1u64 << self.base_log;
        let mask = base - 1;
        let half = base >> 1;
        let (top, rest) = out.split_first_mut().expect("at least one level");
        let state = &mut top[..poly.len()];
        // the rounded value is kept in the level-0 row until the last pass
        for (st, &c) in state.iter_mut().zip(poly) {
            let r = if shift == 0 { c } else { (c >> shift).wrapping_add((c >> (shift - 1)) & 1) };
            *st = r as i64;
        }
        for row in rest.iter_mut().rev() {
            for (st, d) in state.iter_mut().zip(row.iter_mut()) {
                let s = *st as u64;
                let digit = s & mask;
                let carry = (digit >= half) as u64;
                *d = digit as i64 - (carry << self.base_log) as i64;
                *st = ((s >> self.base_log) + carry) as i64;
            }
        }
        for st in state.iter_mut() {
            let digit = *st as u64 & mask;
            let carry = (digit >= half) as u64;
            *st = digit as i64 - (carry << self.base_log) as i64;
        }
    }

    /// `sum_lev digits[lev] * weight(lev)` modulo `q`.
    pub fn recompose(&self, digits: &[i64]) -> u64 {
        digits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (lev, &d)| acc.wrapping_add((d as u64).wrapping_mul(self.weight(lev))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;
    use rand_core::RngCore;

    #[test]
    fn recomposition_equals_closest_representable() {
        let mut rng = rng_from_seed(3);
        for &(b, l) in &[(1u32, 1usize), (4, 6), (7, 4), (10, 3), (16, 2), (16, 4), (32, 2), (8, 8)] {
            let d = Decomposer::new(b, l);
            let mut digits = [0i64; 64];
            for _ in 0..2000 {
                let v = rng.next_u64();
                d.decompose_into(v, &mut digits[..l]);
                assert_eq!(d.recompose(&digits[..l]), d.closest_representable(v), "base 2^{b} levels {l}");
                let half = 1i64 << (b - 1);
                assert!(digits[..l].iter().all(|&x| x >= -half && x < half));
            }
        }
    }

    #[test]
    fn polynomial_decomposition_matches_scalar() {
        let mut rng = rng_from_seed(5);
        for &(b, l) in &[(16u32, 2usize), (10, 3), (4, 6), (32, 2), (7, 1)] {
            let d = Decomposer::new(b, l);
            let poly: alloc::vec::Vec<u64> = (0..64).map(|_| rng.next_u64()).collect();
            let mut out = alloc::vec![alloc::vec![0i64; 64]; l];
            d.decompose_poly(&poly, &mut out);
            let mut digits = [0i64; 64];
            for (j, &c) in poly.iter().enumerate() {
                d.decompose_into(c, &mut digits[..l]);
                for lev in 0..l {
                    assert_eq!(out[lev][j], digits[lev]);
                }
            }
        }
    }

    #[test]
    fn rounding_error_is_at_most_half_the_last_weight() {
        let mut rng = rng_from_seed(4);
        let d = Decomposer::new(10, 3);
        let half_last = d.weight(2) / 2;
        for _ in 0..2000 {
            let v = rng.next_u64();
            let err = v.wrapping_sub(d.closest_representable(v)) as i64;
            assert!(err.unsigned_abs() <= half_last);
        }
    }

    #[test]
    fn small_example() {
        // 2^63 + 2^62 = q * 3/4 = -q/4 -> digits with base 4, 1 level: -1 * q/4
        let d = Decomposer::new(2, 1);
        let mut out = [0i64; 1];
        d.decompose_into(3u64 << 62, &mut out);
        assert_eq!(out, [-1]);
    }
}
