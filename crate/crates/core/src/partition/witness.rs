use crate::amalgamation::{check_ap_instance, AmalgInstance, AmalgamSearch};
use crate::classes::{enumerate_members, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{count_embeddings, embeds, Structure};
use crate::products::{decompose_full, decompose_lex, full_structure, lex_structure, FullAssembly, FullVerdict, LexAssembly};

use super::coloring::{find_indivisibility_witness, verify_indivisibility_witness};

/// Limits for the product witness builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessBounds {
    /// Host size when joining fibres.
    pub jep_host: usize,
    /// Largest component witness searched.
    pub component_size: usize,
    /// Largest product, witness or sub-product, checked by colouring search.
    pub verify_limit: usize,
}

impl Default for WitnessBounds {
    fn default() -> Self {
        // Full products multiply colours, so the second component can be
        // large; structured classes stop earlier at their enumeration limit.
        WitnessBounds { jep_host: 8, component_size: 256, verify_limit: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductWitness {
    pub witness: Structure,
    /// Component witnesses `(D', B')`.
    pub components: (Structure, Structure),
    /// Colours handed to the second component.
    pub base_colors: usize,
    /// `None` when neither the witness nor any sub-product within the
    /// verification limit could be checked; it is then justified by the
    /// verified components alone.
    pub verified: Option<bool>,
    /// A smaller product of members embedded in the components, checked
    /// exhaustively, that embeds into `witness`. Every colouring of the
    /// witness restricts to it, so it certifies the witness.
    pub certificate: Option<Structure>,
}

fn component(k: &ClassSpec, a: &Structure, colors: usize, bounds: &WitnessBounds) -> Result<Structure> {
    find_indivisibility_witness(k, a, colors, bounds.component_size)?.ok_or_else(|| {
        Error::Inconclusive(format!(
            "no witness for {a} with {colors} colours in {k} up to size {}",
            bounds.component_size
        ))
    })
}

type Verification = (Option<bool>, Option<Structure>);

/// Exhaustive check of the witness when it is small enough, otherwise a
/// search for a certifying sub-product `m0 · m1` with `m0 ↪ D'`, `m1 ↪ B'`.
fn check_final(
    k: &ClassSpec,
    (k0, k1): (&ClassSpec, &ClassSpec),
    a: &Structure,
    colors: usize,
    (w, d_prime, b_prime): (&Structure, &Structure, &Structure),
    product: impl Fn(&Structure, &Structure) -> Result<Structure>,
    bounds: &WitnessBounds,
) -> Result<Verification> {
    if w.size() <= bounds.verify_limit {
        return Ok((Some(verify_indivisibility_witness(k, a, colors, w)?), None));
    }
    let left = embedded_members(k0, d_prime, bounds.verify_limit)?;
    let right = embedded_members(k1, b_prime, bounds.verify_limit)?;
    let mut pairs: Vec<(&Structure, &Structure)> = left
        .iter()
        .flat_map(|m0| right.iter().map(move |m1| (m0, m1)))
        .filter(|(m0, m1)| m0.size() * m1.size() <= bounds.verify_limit && m0.size() * m1.size() >= a.size())
        .collect();
    pairs.sort_by_key(|(m0, m1)| m0.size() * m1.size());
    for (m0, m1) in pairs {
        let sub = product(m0, m1)?;
        if verify_indivisibility_witness(k, a, colors, &sub)? {
            return Ok((Some(true), Some(sub)));
        }
    }
    Ok((None, None))
}

/// Members of `k` up to `limit` points that embed into `host`, sizes in
/// increasing order. Stops quietly at the class's enumeration limit.
fn embedded_members(k: &ClassSpec, host: &Structure, limit: usize) -> Result<Vec<Structure>> {
    let mut out = Vec::new();
    for n in 1..=limit.min(host.size()) {
        let members = match enumerate_members(k, n) {
            Ok(m) => m,
            Err(Error::Limit(_)) => break,
            Err(e) => return Err(e),
        };
        for m in members.iter() {
            if embeds(m, host)? {
                out.push(m.clone());
            }
        }
    }
    Ok(out)
}

/// `D' ≀ B'`: fibres of `a` joined into one `D`, then component witnesses
/// for `D` and the base.
pub fn lex_indivisibility_witness(
    k0: &ClassSpec,
    k1: &ClassSpec,
    a: &Structure,
    colors: usize,
    bounds: &WitnessBounds,
) -> Result<ProductWitness> {
    if a.size() == 0 {
        return Err(Error::Invalid("the empty structure has no witness".into()));
    }
    let dec = decompose_lex(a, k0, k1)?.map_err(|r| Error::Invalid(format!("{a} is not in the lexicographic product: {r}")))?;
    let mut fibers = dec.assembly.fibers.iter().filter(|f| f.size() > 0);
    let mut d = fibers.next().expect("nonempty").clone();
    for f in fibers {
        d = match check_ap_instance(k0, &AmalgInstance::joint(d.clone(), f.clone()), bounds.jep_host, false)? {
            AmalgamSearch::Found(am) => am.c,
            AmalgamSearch::NoneUpToBound { exhaustive: true } => {
                return Err(Error::Hypothesis(format!("fibres {d} and {f} have no joint embedding in {k0}")))
            }
            AmalgamSearch::NoneUpToBound { exhaustive: false } => {
                return Err(Error::Inconclusive(format!(
                    "no joint embedding of {d} and {f} within {} points",
                    bounds.jep_host
                )))
            }
        };
    }
    let d_prime = component(k0, &d, colors, bounds)?;
    let b_prime = component(k1, &dec.assembly.base, colors, bounds)?;
    let witness = lex_structure(&LexAssembly::uniform(&d_prime, &b_prime))?;
    let (verified, certificate) = check_final(
        &ClassSpec::lex(k0.clone(), k1.clone()),
        (k0, k1),
        a,
        colors,
        (&witness, &d_prime, &b_prime),
        |m0, m1| lex_structure(&LexAssembly::uniform(m0, m1)),
        bounds,
    )?;
    Ok(ProductWitness { witness, components: (d_prime, b_prime), base_colors: colors, verified, certificate })
}

/// `D' ⊠ B'` for the quotients `D`, `B` of `a`. The second component must
/// absorb one colour per pair (colour, embedding `D → D'`).
pub fn full_indivisibility_witness(
    k0: &ClassSpec,
    k1: &ClassSpec,
    a: &Structure,
    colors: usize,
    bounds: &WitnessBounds,
) -> Result<ProductWitness> {
    if a.size() == 0 {
        return Err(Error::Invalid("the empty structure has no witness".into()));
    }
    let dec = match decompose_full(a, k0, k1, a.size())? {
        FullVerdict::Accept(dec) => dec,
        FullVerdict::Reject(r) => return Err(Error::Invalid(format!("{a} is not in the full product: {r}"))),
        FullVerdict::Inconclusive(r) => return Err(Error::Inconclusive(r)),
    };
    let d_prime = component(k0, &dec.q0, colors, bounds)?;
    let base_colors = colors
        .checked_mul(count_embeddings(&dec.q0, &d_prime)?)
        .ok_or_else(|| Error::Limit("colour count overflows".into()))?;
    let b_prime = component(k1, &dec.q1, base_colors, bounds)?;
    let witness = full_structure(&FullAssembly { left: d_prime.clone(), right: b_prime.clone() });
    let (verified, certificate) = check_final(
        &ClassSpec::full(k0.clone(), k1.clone()),
        (k0, k1),
        a,
        colors,
        (&witness, &d_prime, &b_prime),
        |m0, m1| Ok(full_structure(&FullAssembly { left: m0.clone(), right: m1.clone() })),
        bounds,
    )?;
    Ok(ProductWitness { witness, components: (d_prime, b_prime), base_colors, verified, certificate })
}
