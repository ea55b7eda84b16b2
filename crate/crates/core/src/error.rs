use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("determinant {det} is not a unit modulo {modulus}")]
    NonUnit { det: u32, modulus: u32 },
    #[error("{0}")]
    Domain(String),
    #[error("inconsistent input: {0}")]
    Inconsistency(String),
    #[error("ambiguous: {0}")]
    Ambiguity(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::ModulusMismatch(..) | Error::NonUnit { .. } | Error::Domain(_) | Error::Inconsistency(_) => 3,
            Error::Ambiguity(_) => 4,
            Error::ResourceCap(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
