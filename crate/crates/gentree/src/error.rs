//! Error type shared by the library and the command-line front end.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("entries are not pairwise distinct")]
    DuplicateEntries,
    #[error("not a permutation of 1..{0}")]
    NotAPermutation(usize),
    #[error("empty input")]
    Empty,
    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("label {label} is not a valid label for {family}")]
    Domain { family: &'static str, label: i64 },
    #[error("label sequence inconsistent with the succession rule at index {index}: {reason}")]
    Inconsistent { index: usize, reason: String },
    #[error("permutation {0} is not in family {1}")]
    NotInFamily(String, &'static str),
    #[error("jump {0} is not in the jump alphabet")]
    Alphabet(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("S-list guard violated: {0}")]
    Guard(String),
    #[error("malformed S-list: {0}")]
    Structure(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("effective length {n} is infeasible for {family}")]
    Infeasible { family: &'static str, n: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) | Error::Io(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
