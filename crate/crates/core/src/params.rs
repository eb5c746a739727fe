//! Parameter sets for the LWE/RLWE/RGSW cryptosystem.
//!
//! The ciphertext modulus is fixed at `q = 2^64`: every torus element is a
//! `u64` and modular reduction is plain wrapping arithmetic.

use alloc::format;

use crate::error::{Error, Result};

/// `log2(q)`; the ciphertext modulus is the machine word.
pub const LOG_CIPHERTEXT_MODULUS: u32 = 64;

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Small, insecure, fast. Used throughout the unit tests.
    Toy,
    /// `n = 128`, `N = 2^15`, `p = 2^14`.
    Paper,
    /// 128-bit FHEW-style set (boolean-sized message space).
    Std128,
    /// Desk-scale set for a given message modulus: `n = 8`, redundancy 8.
    Desk,
}

impl Preset {
    pub fn from_name(name: &str) -> Option<Preset> {
        match name.to_ascii_lowercase().as_str() {
            "toy" => Some(Preset::Toy),
            "paper" => Some(Preset::Paper),
            "std128" => Some(Preset::Std128),
            "desk" => Some(Preset::Desk),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy => "TOY",
            Preset::Paper => "PAPER",
            Preset::Std128 => "STD128",
            Preset::Desk => "DESK",
        }
    }

    /// Parameters for this preset. `Desk` is parameterized by the message
    /// modulus; the others ignore `plaintext_modulus` unless it is `Some`.
    pub fn params(self, plaintext_modulus: Option<u64>) -> Result<FheParams> {
        let params = match self {
            Preset::Toy => FheParams::toy(),
            Preset::Paper => FheParams::paper(),
            Preset::Std128 => FheParams::std128(),
            Preset::Desk => return FheParams::desk(plaintext_modulus.unwrap_or(1024)),
        };
        match plaintext_modulus {
            Some(p) => params.with_plaintext_modulus(p),
            None => Ok(params),
        }
    }
}

/// Parameters of one LWE key / ring key / bootstrap key triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FheParams {
    /// LWE dimension `n`.
    pub lwe_dimension: usize,
    /// Ring dimension `N` (power of two).
    pub ring_dimension: usize,
    /// Plaintext modulus `p` (even).
    pub plaintext_modulus: u64,
    /// Standard deviation of fresh noise as a fraction of `q`.
    pub noise_std: f64,
    pub bsk_base_log: u32,
    pub bsk_levels: usize,
    pub ksk_base_log: u32,
    pub ksk_levels: usize,
}

impl FheParams {
    pub const fn toy() -> Self {
        FheParams {
            lwe_dimension: 32,
            ring_dimension: 512,
            plaintext_modulus: 64,
            noise_std: 5.684_341_886_080_802e-14, // 2^-44
            bsk_base_log: 10,
            bsk_levels: 3,
            ksk_base_log: 4,
            ksk_levels: 6,
        }
    }

    pub const fn paper() -> Self {
        FheParams {
            lwe_dimension: 128,
            ring_dimension: 1 << 15,
            plaintext_modulus: 1 << 14,
            noise_std: 2.220_446_049_250_313e-16, // 2^-52
            bsk_base_log: 16,
            bsk_levels: 2,
            ksk_base_log: 12,
            ksk_levels: 3,
        }
    }

    pub const fn std128() -> Self {
        FheParams {
            lwe_dimension: 512,
            ring_dimension: 1024,
            plaintext_modulus: 4,
            noise_std: 2.376_776_695_296_637e-8, // 3.19 / 2^27
            bsk_base_log: 7,
            bsk_levels: 4,
            ksk_base_log: 5,
            ksk_levels: 5,
        }
    }

    /// Desk-scale parameters for message modulus `p`: `n = 8` and
    /// `N = 4p`, i.e. eight test-polynomial slots per message.
    pub fn desk(plaintext_modulus: u64) -> Result<Self> {
        let ring_dimension = (plaintext_modulus as usize).saturating_mul(4).max(16);
        let params = FheParams {
            lwe_dimension: 8,
            ring_dimension,
            plaintext_modulus,
            noise_std: 2.220_446_049_250_313e-16, // 2^-52
            bsk_base_log: 16,
            bsk_levels: 2,
            ksk_base_log: 12,
            ksk_levels: 3,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_plaintext_modulus(mut self, p: u64) -> Result<Self> {
        self.plaintext_modulus = p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ring_dimension;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!("ring dimension {n} is not a power of two >= 2")));
        }
        if self.lwe_dimension == 0 {
            return Err(Error::InvalidParams("LWE dimension must be positive".into()));
        }
        let p = self.plaintext_modulus;
        if p < 2 || !p.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("plaintext modulus {p} must be even and >= 2")));
        }
        if p > 2 * n as u64 {
            return Err(Error::InvalidParams(format!("plaintext modulus {p} exceeds 2N = {}", 2 * n)));
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return Err(Error::InvalidParams(format!("noise std {} must be finite and >= 0", self.noise_std)));
        }
        check_gadget("bootstrap", self.bsk_base_log, self.bsk_levels)?;
        check_gadget("key-switch", self.ksk_base_log, self.ksk_levels)?;
        Ok(())
    }

    /// `q` as an integer.
    pub fn ciphertext_modulus(&self) -> u128 {
        1u128 << LOG_CIPHERTEXT_MODULUS
    }

    /// Number of test-polynomial coefficients per message, `2N / p`.
    pub fn redundancy(&self) -> f64 {
        2.0 * self.ring_dimension as f64 / self.plaintext_modulus as f64
    }

    /// Standard deviation (in units of `q / 2N`) of the rounding error that
    /// modulus switching adds to the phase, for a uniform binary key.
    pub fn mod_switch_error_std(&self) -> f64 {
        libm::sqrt((self.lwe_dimension as f64) / 24.0 + 1.0 / 12.0)
    }
}

fn check_gadget(what: &str, base_log: u32, levels: usize) -> Result<()> {
    if base_log == 0 || base_log > 32 || levels == 0 || base_log as usize * levels > LOG_CIPHERTEXT_MODULUS as usize {
        return Err(Error::InvalidParams(format!(
            "{what} gadget base 2^{base_log} with {levels} levels is unsupported"
        )));
    }
    Ok(())
}
