//! Preset resolution and per-layer parameter selection.

use spiketfhe_core::{FheParams, Preset};

use crate::error::{Error, Result};

pub const PRESET_ENV: &str = "SPIKETFHE_PRESET";

pub fn parse_preset(name: &str) -> Result<Preset> {
    Preset::from_name(name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?} (expected toy, paper, std128 or desk)")))
}

/// One parameter set per spiking layer, sharing the LWE dimension of the
/// preset and differing only in the message modulus (and, for `desk`, the
/// ring dimension).
pub fn layer_params(preset: Preset, moduli: &[u64]) -> Result<Vec<FheParams>> {
    if moduli.is_empty() {
        return Err(Error::Config("at least one message modulus is required".into()));
    }
    moduli
        .iter()
        .map(|&p| preset.params(Some(p)).map_err(|e| Error::Config(format!("{} preset with p = {p}: {e}", preset.name()))))
        .collect()
}

/// The preset's own modulus, repeated for every spiking layer.
pub fn default_moduli(preset: Preset, layers: usize) -> Result<Vec<u64>> {
    let p = preset.params(None).map_err(|e| Error::Config(e.to_string()))?.plaintext_modulus;
    Ok(vec![p; layers])
}

pub fn parse_moduli(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            let v = match s.strip_prefix("2^") {
                Some(e) => e.parse::<u32>().ok().and_then(|e| 1u64.checked_shl(e)),
                None => s.parse::<u64>().ok(),
            };
            v.ok_or_else(|| Error::Config(format!("bad modulus {s:?}")))
        })
        .collect()
}

/// Size in bytes of the key material for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySizes {
    pub lwe_secret: usize,
    pub ring_secret: usize,
    pub bootstrap: usize,
    pub key_switch: usize,
}

/// Payload sizes in the standard (coefficient) representation:
/// `n` RGSW ciphertexts of `2l` RLWE rows of `2N` words, and `N * l_ks`
/// LWE ciphertexts of `n + 1` words.
pub fn key_sizes(p: &FheParams) -> KeySizes {
    KeySizes {
        lwe_secret: p.lwe_dimension,
        ring_secret: p.ring_dimension,
        bootstrap: p.lwe_dimension * 2 * p.bsk_levels * 2 * p.ring_dimension * 8,
        key_switch: p.ring_dimension * p.ksk_levels * (p.lwe_dimension + 1) * 8,
    }
}
