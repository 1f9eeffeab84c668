use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;

use super::structures::{full_structure, lex_structure, FullAssembly, LexAssembly};
use crate::error::{Error, Result};
use crate::kernel::{age_of, aut_order, CanonicalForm, Structure};
use crate::verdict::Verdict;

/// Largest product size accepted by [`aut_order_product_check`].
pub const AUT_PRODUCT_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductMode {
    Lex,
    Full,
}

impl fmt::Display for ProductMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductMode::Lex => "lex",
            ProductMode::Full => "full",
        })
    }
}

impl FromStr for ProductMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(ProductMode::Lex),
            "full" => Ok(ProductMode::Full),
            other => Err(Error::Invalid(format!("unknown product mode {other:?}"))),
        }
    }
}

/// An isomorphism type seen on exactly one side of the age comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgeMismatch {
    pub shape: CanonicalForm,
    /// True when the shape is in the age of the product but missing from the
    /// product of the ages.
    pub only_in_product_age: bool,
}

/// Compares, up to `size`, the age of `a ≀ b` (or `a ⊠ b`) with the product
/// of the ages: lex products of members of `age(a)` over members of
/// `age(b)`, or substructures of `D ⊠ B` for `D ∈ age(a)`, `B ∈ age(b)`.
pub fn age_product_check(a: &Structure, b: &Structure, mode: ProductMode, size: usize) -> Result<Verdict<AgeMismatch>> {
    let age_a: Vec<Structure> = age_of(a, size).into_iter().map(|c| c.into_structure()).collect();
    let age_b: Vec<Structure> = age_of(b, size).into_iter().map(|c| c.into_structure()).collect();
    let (product_age, age_product) = match mode {
        ProductMode::Lex => {
            let whole = lex_structure(&LexAssembly::uniform(a, b))?;
            (age_of(&whole, size), lex_of_ages(a, &age_a, &age_b, size)?)
        }
        ProductMode::Full => {
            let whole = full_structure(&FullAssembly { left: a.clone(), right: b.clone() });
            let parts: Vec<BTreeSet<CanonicalForm>> = age_a
                .iter()
                .cartesian_product(&age_b)
                .collect_vec()
                .par_iter()
                .map(|(d, e)| age_of(&full_structure(&FullAssembly { left: (*d).clone(), right: (*e).clone() }), size))
                .collect();
            (age_of(&whole, size), parts.into_iter().flatten().collect())
        }
    };
    if let Some(shape) = product_age.difference(&age_product).next() {
        return Ok(Verdict::Fail(AgeMismatch { shape: shape.clone(), only_in_product_age: true }));
    }
    if let Some(shape) = age_product.difference(&product_age).next() {
        return Ok(Verdict::Fail(AgeMismatch { shape: shape.clone(), only_in_product_age: false }));
    }
    Ok(Verdict::Pass)
}

/// Lex products of nonempty fibres from `fibers` over bases from `bases`,
/// of total size at most `size`. The empty structure is included.
fn lex_of_ages(
    a: &Structure,
    fibers: &[Structure],
    bases: &[Structure],
    size: usize,
) -> Result<BTreeSet<CanonicalForm>> {
    let nonempty: Vec<&Structure> = fibers.iter().filter(|f| f.size() > 0).collect();
    let mut out = BTreeSet::new();
    for base in bases {
        let m = base.size();
        if m > size {
            continue;
        }
        for choice in (0..m).map(|_| nonempty.iter()).multi_cartesian_product() {
            if choice.iter().map(|f| f.size()).sum::<usize>() > size {
                continue;
            }
            let asm = LexAssembly {
                l0: a.sig_arc().clone(),
                base: base.clone(),
                fibers: choice.into_iter().map(|f| (*f).clone()).collect(),
            };
            out.insert(crate::kernel::canonical_form(&lex_structure(&asm)?));
        }
    }
    Ok(out)
}

/// Automorphism orders that disagree with the product formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutMismatch {
    pub mode: ProductMode,
    pub expected: u64,
    pub actual: u64,
}

/// Checks `|Aut(a ≀ b)| = |Aut(a)|^|b|·|Aut(b)|` and
/// `|Aut(a ⊠ b)| = |Aut(a)|·|Aut(b)|`. Both factors must be nonempty.
pub fn aut_order_product_check(a: &Structure, b: &Structure) -> Result<Verdict<AutMismatch>> {
    if a.size() == 0 || b.size() == 0 {
        return Err(Error::Hypothesis("automorphism-order identities need nonempty factors".into()));
    }
    if a.size() * b.size() > AUT_PRODUCT_LIMIT {
        return Err(Error::Limit(format!(
            "product of sizes {} and {} exceeds {AUT_PRODUCT_LIMIT}",
            a.size(),
            b.size()
        )));
    }
    let (oa, ob) = (aut_order(a), aut_order(b));
    let lex = lex_structure(&LexAssembly::uniform(a, b))?;
    let expected = oa.pow(b.size() as u32) * ob;
    let actual = aut_order(&lex);
    if actual != expected {
        return Ok(Verdict::Fail(AutMismatch { mode: ProductMode::Lex, expected, actual }));
    }
    let full = full_structure(&FullAssembly { left: a.clone(), right: b.clone() });
    let expected = oa * ob;
    let actual = aut_order(&full);
    if actual != expected {
        return Ok(Verdict::Fail(AutMismatch { mode: ProductMode::Full, expected, actual }));
    }
    Ok(Verdict::Pass)
}
