use alloc::string::String;

/// Errors raised by the cryptosystem and network evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("message {message} outside the plaintext range of modulus {modulus}")]
    MessageOutOfRange { message: i64, modulus: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("target modulus {0} exceeds the ciphertext modulus")]
    ModulusTooLarge(u128),
    #[error("program function is not negacyclic at input {input}")]
    NotNegacyclic { input: i64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported layer: {0}")]
    UnsupportedLayer(String),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("message bound violated in spiking layer {layer}: {value} > {limit}")]
    BoundViolation { layer: usize, value: i64, limit: i64 },
}

pub type Result<T> = core::result::Result<T, Error>;
