use std::fmt;
use std::sync::Arc;

use super::layout::{FullLayout, LexLayout};
use super::structures::LexAssembly;
use crate::classes::{member, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{normalize_classes, quotient_by_congruence, NotCongruence, Structure};

/// Why a structure is not a lexicographic product of members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LexRejection {
    NotEquivalence,
    CrossClassTuple { symbol: String, tuple: Vec<usize> },
    NotCongruence(NotCongruence),
    BaseNotMember,
    FiberNotMember { class: usize },
}

impl fmt::Display for LexRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexRejection::NotEquivalence => write!(f, "E not equivalence"),
            LexRejection::CrossClassTuple { symbol, tuple } => write!(f, "cross-class L0 tuple {symbol}{tuple:?}"),
            LexRejection::NotCongruence(w) => {
                write!(f, "L1 relation {} not an E-congruence: {:?} holds, {:?} fails", w.symbol, w.holds, w.fails)
            }
            LexRejection::BaseNotMember => write!(f, "E-quotient not in the base class"),
            LexRejection::FiberNotMember { class } => write!(f, "E-class {class} not in the fibre class"),
        }
    }
}

/// A lexicographic decomposition: the assembly and, for each element, its
/// coordinates `(b, a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexDecomposition {
    pub assembly: LexAssembly,
    pub coords: Vec<(usize, usize)>,
}

fn is_equivalence(s: &Structure, e: usize) -> bool {
    let n = s.size();
    (0..n).all(|x| s.holds(e, &[x, x]))
        && (0..n).all(|x| (0..x).all(|y| s.holds(e, &[x, y]) == s.holds(e, &[y, x])))
        && (0..n).all(|x| (0..n).all(|y| !s.holds(e, &[x, y]) || (0..n).all(|z| !s.holds(e, &[y, z]) || s.holds(e, &[x, z]))))
}

/// Class label per element, numbered by first occurrence.
fn classes_of(s: &Structure, e: usize) -> Vec<usize> {
    let n = s.size();
    let labels: Vec<usize> = (0..n).map(|x| (0..n).find(|&y| s.holds(e, &[x, y])).unwrap_or(x)).collect();
    normalize_classes(&labels)
}

/// Accepts iff `E` is an equivalence, every `L0` tuple stays inside one
/// class, `L1` relations are `E`-congruences, the quotient is in `k1` and
/// every class is in `k0`.
pub fn decompose_lex(
    s: &Structure,
    k0: &ClassSpec,
    k1: &ClassSpec,
) -> Result<std::result::Result<LexDecomposition, LexRejection>> {
    let layout = LexLayout::new(k0.sig(), k1.sig());
    if s.sig() != &*layout.sig {
        return Err(Error::SignatureMismatch(format!("{} is not the product signature {}", s.sig(), layout.sig)));
    }
    lex_parts(s, k0, k1, true)
}

pub(crate) fn is_lex_member(s: &Structure, k0: &ClassSpec, k1: &ClassSpec) -> Result<bool> {
    Ok(lex_parts(s, k0, k1, false)?.is_ok())
}

fn lex_parts(
    s: &Structure,
    k0: &ClassSpec,
    k1: &ClassSpec,
    want_assembly: bool,
) -> Result<std::result::Result<LexDecomposition, LexRejection>> {
    let (n0, n1) = (k0.sig().len(), k1.sig().len());
    let e = n0 + n1;
    if !is_equivalence(s, e) {
        return Ok(Err(LexRejection::NotEquivalence));
    }
    let class = classes_of(s, e);
    for r in 0..n0 {
        for t in s.tuples(r) {
            if t.iter().any(|&x| class[x] != class[t[0]]) {
                return Ok(Err(LexRejection::CrossClassTuple { symbol: s.sig().name(r).to_string(), tuple: t }));
            }
        }
    }
    let l1: Vec<usize> = (n0..n0 + n1).collect();
    let quotient = match quotient_by_congruence(s, &class, &l1)? {
        Ok(q) => q.structure.retag(k1.sig_arc().clone())?,
        Err(w) => return Ok(Err(LexRejection::NotCongruence(w))),
    };
    if !member(k1, &quotient)? {
        return Ok(Err(LexRejection::BaseNotMember));
    }
    let l0: Vec<usize> = (0..n0).collect();
    let mut fibers = Vec::with_capacity(quotient.size());
    let mut coords = vec![(0, 0); s.size()];
    for b in 0..quotient.size() {
        let elems: Vec<usize> = (0..s.size()).filter(|&x| class[x] == b).collect();
        for (a, &x) in elems.iter().enumerate() {
            coords[x] = (b, a);
        }
        let fiber = s.pullback(&elems).reduct(&l0).retag(k0.sig_arc().clone())?;
        if !member(k0, &fiber)? {
            return Ok(Err(LexRejection::FiberNotMember { class: b }));
        }
        if want_assembly {
            fibers.push(fiber);
        }
    }
    Ok(Ok(LexDecomposition {
        assembly: LexAssembly { l0: Arc::new(k0.sig().clone()), base: quotient, fibers },
        coords,
    }))
}

/// Accepted full-product decomposition: quotients by `E0` and `E1`, the
/// class of each element in each, host members and the embedding of `s`
/// into `host0 ⊠ host1` (element `(c0, c1)` numbered `c0·|host1| + c1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullDecomposition {
    pub q0: Structure,
    pub q1: Structure,
    pub class0: Vec<usize>,
    pub class1: Vec<usize>,
    pub hosts: (Structure, Structure),
    pub embedding: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FullVerdict {
    Accept(FullDecomposition),
    Reject(String),
    Inconclusive(String),
}

impl FullVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, FullVerdict::Accept(_))
    }
}

enum FullParts {
    Ok { q0: Structure, q1: Structure, class0: Vec<usize>, class1: Vec<usize> },
    Reject(String),
}

fn full_parts(s: &Structure, k0: &ClassSpec, k1: &ClassSpec) -> Result<FullParts> {
    let (n0, n1) = (k0.sig().len(), k1.sig().len());
    let (e0, e1) = (n0 + n1, n0 + n1 + 1);
    if !is_equivalence(s, e0) {
        return Ok(FullParts::Reject("E0 not equivalence".into()));
    }
    if !is_equivalence(s, e1) {
        return Ok(FullParts::Reject("E1 not equivalence".into()));
    }
    let n = s.size();
    for x in 0..n {
        for y in 0..x {
            if s.holds(e0, &[x, y]) && s.holds(e1, &[x, y]) {
                return Ok(FullParts::Reject(format!("class intersection > 1: elements {y} and {x}")));
            }
        }
    }
    let class0 = classes_of(s, e0);
    let class1 = classes_of(s, e1);
    let q0 = match quotient_by_congruence(s, &class0, &(0..n0).collect::<Vec<_>>())? {
        Ok(q) => q.structure.retag(k0.sig_arc().clone())?,
        Err(w) => return Ok(FullParts::Reject(format!("L0 relation {} not an E0-congruence", w.symbol))),
    };
    let q1 = match quotient_by_congruence(s, &class1, &(n0..n0 + n1).collect::<Vec<_>>())? {
        Ok(q) => q.structure.retag(k1.sig_arc().clone())?,
        Err(w) => return Ok(FullParts::Reject(format!("L1 relation {} not an E1-congruence", w.symbol))),
    };
    Ok(FullParts::Ok { q0, q1, class0, class1 })
}

pub(crate) fn decompose_full_membership(s: &Structure, k0: &ClassSpec, k1: &ClassSpec) -> Result<bool> {
    Ok(match full_parts(s, k0, k1)? {
        FullParts::Ok { q0, q1, .. } => member(k0, &q0)? && member(k1, &q1)?,
        FullParts::Reject(_) => false,
    })
}

/// Decides membership in `full(k0, k1)` with hosts of size at most `bound`.
/// The classes are hereditary, so a quotient has a host iff it is itself a
/// member; the quotient is then its own smallest host.
pub fn decompose_full(s: &Structure, k0: &ClassSpec, k1: &ClassSpec, bound: usize) -> Result<FullVerdict> {
    let layout = FullLayout::new(k0.sig(), k1.sig());
    if s.sig() != &*layout.sig {
        return Err(Error::SignatureMismatch(format!("{} is not the product signature {}", s.sig(), layout.sig)));
    }
    let (q0, q1, class0, class1) = match full_parts(s, k0, k1)? {
        FullParts::Ok { q0, q1, class0, class1 } => (q0, q1, class0, class1),
        FullParts::Reject(reason) => return Ok(FullVerdict::Reject(reason)),
    };
    for (q, k, side) in [(&q0, k0, 0), (&q1, k1, 1)] {
        if !member(k, q)? {
            return Ok(FullVerdict::Reject(format!("quotient Q{side} is not in {k}, and no member contains it")));
        }
        if q.size() > bound {
            return Ok(FullVerdict::Inconclusive(format!("quotient Q{side} has {} elements, host bound {bound}", q.size())));
        }
    }
    let embedding = class0.iter().zip(&class1).map(|(&a, &b)| a * q1.size() + b).collect();
    Ok(FullVerdict::Accept(FullDecomposition {
        hosts: (q0.clone(), q1.clone()),
        q0,
        q1,
        class0,
        class1,
        embedding,
    }))
}
