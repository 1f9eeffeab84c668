//! Quantifier-free interpretations between classes, checked on finite
//! targets: the doubling constructions, composition, injectivization and
//! transfers to product classes.

mod builtin;
mod formula;
mod transfer;
mod witness;

pub use builtin::{builtin_configuration, builtin_configuration_on, check_reductive_subclass, BuiltinConfig};
pub use formula::{eval_qf, QfFormula, Var};
pub use transfer::{full_config_transfer, lex_config_transfer, super_config_transfer};
pub use witness::{
    compose_configurations, make_injective, share_targets, verify_configuration, ConfigEntry, ConfigViolation,
    ConfigWitness, Interpretation,
};
