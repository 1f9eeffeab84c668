use std::collections::BTreeSet;

use itertools::Itertools;

use super::canon::{canonical_form, CanonicalForm};
use super::structure::Structure;
use crate::error::{Error, Result};

/// Canonical forms of all induced substructures with at most `max_size`
/// elements, including the empty one.
pub fn age_of(s: &Structure, max_size: usize) -> BTreeSet<CanonicalForm> {
    let mut out = BTreeSet::new();
    for k in 0..=max_size.min(s.size()) {
        for subset in (0..s.size()).combinations(k) {
            out.insert(canonical_form(&s.pullback(&subset)));
        }
    }
    out
}

/// Selects the elements of `ambient` that realize the same quantifier-free
/// type over `base` as `pivot`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QfClassSelector {
    pub ambient: Structure,
    pub base: Vec<usize>,
    pub pivot: usize,
}

/// Elements `x ∉ base` such that `pivot ↦ x` plus the identity on `base`
/// is an isomorphism of induced substructures. Sorted; contains `pivot`.
pub fn qf_class(sel: &QfClassSelector) -> Result<Vec<usize>> {
    let n = sel.ambient.size();
    for &x in sel.base.iter().chain(std::iter::once(&sel.pivot)) {
        if x >= n {
            return Err(Error::OutOfRange { element: x, size: n });
        }
    }
    if sel.base.contains(&sel.pivot) {
        return Err(Error::Invalid(format!("pivot {} lies in the base", sel.pivot)));
    }
    Ok(qf_class_unchecked(&sel.ambient, &sel.base, sel.pivot))
}

pub(crate) fn qf_class_unchecked(c: &Structure, base: &[usize], pivot: usize) -> Vec<usize> {
    let mut map = Vec::with_capacity(base.len() + 1);
    map.push(pivot);
    map.extend_from_slice(base);
    let reference = c.pullback(&map);
    (0..c.size())
        .filter(|x| !base.contains(x))
        .filter(|&x| {
            map[0] = x;
            c.pullback(&map) == reference
        })
        .collect()
}

/// A tuple that holds and a tuple in the same classes that does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotCongruence {
    pub symbol: String,
    pub holds: Vec<usize>,
    pub fails: Vec<usize>,
}

/// A quotient structure with the class of each original element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub structure: Structure,
    pub class_of: Vec<usize>,
}

/// Normalizes class labels to `0..k` by first occurrence.
pub fn normalize_classes(labels: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

/// Quotient of the reduct to `symbols` by the partition given as a class
/// label per element. Fails with a witness pair when some listed relation
/// does not depend only on classes.
pub fn quotient_by_congruence(
    s: &Structure,
    labels: &[usize],
    symbols: &[usize],
) -> Result<std::result::Result<Quotient, NotCongruence>> {
    if labels.len() != s.size() {
        return Err(Error::Invalid(format!(
            "partition has {} labels for a structure of size {}",
            labels.len(),
            s.size()
        )));
    }
    if let Some(&r) = symbols.iter().find(|&&r| r >= s.sig().len()) {
        return Err(Error::Invalid(format!("symbol index {r} out of range")));
    }
    let class_of = normalize_classes(labels);
    let k = class_of.iter().max().map_or(0, |m| m + 1);
    let mut rep = vec![0; k];
    for (x, &c) in class_of.iter().enumerate().rev() {
        rep[c] = x;
    }
    let reduct = s.reduct(symbols);
    let quotient = reduct.pullback(&rep);
    for r in 0..reduct.sig().len() {
        let arity = reduct.sig().arity(r);
        for idx in 0..reduct.cell_count(r) {
            let t = reduct.decode(idx, arity);
            let image: Vec<usize> = t.iter().map(|&x| class_of[x]).collect();
            let here = reduct.holds_idx(r, idx);
            if here != quotient.holds(r, &image) {
                let other: Vec<usize> = image.iter().map(|&c| rep[c]).collect();
                let (holds, fails) = if here { (t, other) } else { (other, t) };
                return Ok(Err(NotCongruence { symbol: reduct.sig().name(r).to_string(), holds, fails }));
            }
        }
    }
    Ok(Ok(Quotient { structure: quotient, class_of }))
}
