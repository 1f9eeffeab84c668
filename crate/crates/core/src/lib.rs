//! Finite relational structures, product constructions of classes, and
//! bounded checkers and builders for amalgamation, partition and
//! configuration properties.

pub mod amalgamation;
pub mod classes;
pub mod configurations;
pub mod error;
pub mod kernel;
pub mod partition;
pub mod products;
pub mod verdict;

pub use error::{Error, Result};
pub use classes::{Builtin, ClassSpec};
pub use kernel::{CanonicalForm, Map, RawStructure, Signature, Structure};
pub use verdict::{Verdict, VerdictKind};
