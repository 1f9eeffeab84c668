//! Bounded checkers for joint embedding, (strong) amalgamation and disjoint
//! `n`-amalgamation, plus amalgam builders for product classes.

pub(crate) mod ap;
mod builders;
mod system;

pub use ap::{
    ap_instances, check_ap, check_ap_instance, check_jep, verify_amalgam, AmalgInstance, Amalgam, AmalgamSearch,
};
pub use builders::{
    full_amalgam_builder, lex_amalgam_builder, lex_strong_amalgam_builder, super_n_amalgam_builder, FactorBounds,
};
pub use system::{
    base_systems, check_disjoint_n, colimit_base, complete_system, fmt_subset, is_transitivity_pattern, proper_subsets,
    transitivity_system, verify_p_system, Colimit, Completion, PSystem, Subset, SystemViolation, MAX_SYSTEM_ARITY,
};
