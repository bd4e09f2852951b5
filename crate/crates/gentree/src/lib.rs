//! Generating trees for pattern-avoiding permutations: exact enumeration,
//! uniform sampling through conditioned colored random walks, the
//! jump-to-pattern map, and constants of the consecutive-pattern central
//! limit theorem.

pub mod cli;
pub mod error;
pub mod family;
pub mod growth;
pub mod oracle;
pub mod perm;
pub mod pat;
pub mod rng;
pub mod slist;
pub mod stats;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use family::{FamilyId, FamilySpec};
pub use perm::Permutation;
