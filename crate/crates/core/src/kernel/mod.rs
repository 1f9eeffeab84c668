//! Finite relational structures and structure-level primitives.

mod canon;
mod embed;
mod ops;
mod signature;
mod structure;

pub use canon::{
    aut_order, canonical_form, canonical_form_limited, canonical_labeling, enumerate_automorphisms,
    find_isomorphism, is_isomorphic, refine, CanonicalForm, CANONICAL_SOFT_LIMIT,
};
pub use embed::{
    compose, count_embeddings, embeds, enumerate_embeddings, first_embedding, for_each_embedding, inverse,
    is_embedding, tuples_over, Map,
};
pub(crate) use embed::check_same_sig;
pub use ops::{
    age_of, normalize_classes, qf_class, quotient_by_congruence, NotCongruence, QfClassSelector, Quotient,
};
pub(crate) use ops::qf_class_unchecked;
pub use signature::{Rename, Signature, Symbol};
pub use structure::{RawStructure, Structure, Violation};
