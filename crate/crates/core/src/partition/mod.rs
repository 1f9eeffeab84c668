//! Indivisibility witnesses, definable self-similarity, and witness
//! builders for product classes.

mod coloring;
mod dss;
mod witness;

pub use coloring::{copy_sets, find_bad_coloring, find_indivisibility_witness, verify_indivisibility_witness, Coloring};
pub use dss::{
    check_dss, check_dss_instance, dss_from_3amalg, dss_instances, super_dss_transfer, verify_dss_witness, DssInstance,
    DssSearch, DssWitness,
};
pub use witness::{full_indivisibility_witness, lex_indivisibility_witness, ProductWitness, WitnessBounds};
