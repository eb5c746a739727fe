//! On-disk formats: `FDSN` binaries for keys and ciphertexts, JSON for
//! models and network descriptions, IDX for datasets.

pub mod binary;
pub mod discrete;
pub mod exchange;
pub mod idx;
pub mod spec;
