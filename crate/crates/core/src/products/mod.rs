//! Lexicographic products, full products and free superpositions, at the
//! level of structures and of classes.

mod checks;
mod decompose;
mod layout;
mod structures;

pub use checks::{age_product_check, aut_order_product_check, AgeMismatch, AutMismatch, ProductMode, AUT_PRODUCT_LIMIT};
pub use decompose::{decompose_full, decompose_lex, FullDecomposition, FullVerdict, LexDecomposition, LexRejection};
pub(crate) use decompose::{decompose_full_membership, is_lex_member};
pub use layout::{FullLayout, LexLayout, SuperLayout};
pub use structures::{full_structure, lex_structure, superpose_structures, FullAssembly, LexAssembly, Superposition};
