//! Message encoding on the 64-bit torus and integer rounding helpers.
//!
//! Messages live in the canonical signed range `{-p/2 + 1, ..., p/2}` and
//! are embedded as `round(q/p * m) mod q`.

/// Reduce `x` into the canonical range `{-p/2 + 1, ..., p/2}`.
pub fn canonical(x: i64, p: u64) -> i64 {
    let p_i = p as i64;
    let r = x.rem_euclid(p_i);
    if r > p_i / 2 {
        r - p_i
    } else {
        r
    }
}

/// `true` when `m` is already in canonical form for modulus `p`.
pub fn in_range(m: i64, p: u64) -> bool {
    let half = (p / 2) as i64;
    m > -half && m <= half
}

/// `round(q/p * m) mod q` with `q = 2^64`.
pub fn encode(m: i64, p: u64) -> u64 {
    let r = m.rem_euclid(p as i64) as u128;
    let p = p as u128;
    (((r << 64) + p / 2) / p) as u64
}

/// Nearest message to a phase, in canonical form.
pub fn decode(phase: u64, p: u64) -> i64 {
    let scaled = ((phase as u128 * p as u128) + (1u128 << 63)) >> 64;
    canonical((scaled % p as u128) as i64, p)
}

/// Signed distance from `phase` to the encoding of `m`, as an integer in
/// `[-2^63, 2^63)`.
pub fn phase_error(phase: u64, m: i64, p: u64) -> i64 {
    phase.wrapping_sub(encode(m, p)) as i64
}

/// `round(num / den)` with ties away from zero; `den > 0`.
pub fn div_round(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    let q = (2 * num.unsigned_abs() as u128 + den as u128) / (2 * den as u128);
    if num < 0 {
        -(q as i64)
    } else {
        q as i64
    }
}

/// Nearest integer to `x` with ties away from zero.
pub fn round_half_away(x: f64) -> f64 {
    libm::round(x)
}
