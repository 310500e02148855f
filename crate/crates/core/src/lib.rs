//! Quaternionic Kähler angles of real subspaces of ℍⁿ and their
//! classification under Sp(1)Sp(n).

pub mod catalog;
pub mod classify;
pub mod error;
pub mod oracle;
pub mod quat;
pub mod selftest;
pub mod subspace;

pub use catalog::{FamilySpec, GramMatrix, Sign};
pub use classify::{ClassificationRecord, ModuliStratum, StratumId, TypeSignature, Verdict, VerdictValue};
pub use error::{QkaError, Result};
pub use quat::{CanonicalBasis, GroupElement, HVector, QMatrix, Quaternion};
pub use subspace::{AngleTriple, ConstancyReport, OmegaMatrix, Subspace};
