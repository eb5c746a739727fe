//! Core of an encrypted spiking-network evaluator: a TFHE-style scheme over
//! the 64-bit torus, the discretized LIF neuron, weight discretization, the
//! layer pipeline and parameter vetting.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bootstrap;
pub mod decomposition;
pub mod discretize;
pub mod encoding;
pub mod error;
pub mod fft;
pub mod keyswitch;
pub mod lwe;
pub mod model;
pub mod network;
pub mod neuron;
pub mod params;
pub mod poly;
pub mod random;
pub mod rgsw;
pub mod rlwe;

pub use bootstrap::{bootstrap, keygen, mod_switch, BootstrapKey, ProgramFunction, TestVector};
pub use error::{Error, Result};
pub use lwe::{lwe_decrypt, lwe_encrypt, lwe_linear, LweCiphertext, LweSecretKey};
pub use params::{FheParams, Preset};
pub use rlwe::{RingSecretKey, RlweCiphertext};
