use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use itertools::Itertools;
use rayon::prelude::*;

use super::extend::one_point_extensions;
use super::{member, Builtin, ClassKind, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{canonical_form, Signature, Structure};

/// Every structure over `sig` on `0..size`, in order of the cell bitmask.
/// Meant for oracles; panics beyond 40 cells.
pub fn all_structures(sig: &Signature, size: usize) -> impl Iterator<Item = Structure> {
    let base = Structure::with_sig(sig, size);
    let counts: Vec<usize> = (0..sig.len()).map(|r| base.cell_count(r)).collect();
    let total: usize = counts.iter().sum();
    assert!(total <= 40, "{total} cells is too many to enumerate");
    (0..1u64 << total).map(move |mut mask| {
        let mut s = base.clone();
        for (r, &c) in counts.iter().enumerate() {
            for idx in 0..c {
                if mask & 1 == 1 {
                    s.set_idx(r, idx, true);
                }
                mask >>= 1;
            }
        }
        s
    })
}

/// Default largest size accepted by [`enumerate_members`].
pub fn enumeration_limit(k: &ClassSpec) -> usize {
    match k.kind() {
        ClassKind::Builtin(b) => match b {
            Builtin::Sets
            | Builtin::LinearOrders
            | Builtin::EquivalenceRelations
            | Builtin::UnaryAll
            | Builtin::UnaryAtMostOne => 10,
            Builtin::Graphs | Builtin::Forests | Builtin::PlanarGraphs | Builtin::Hypergraphs(2) => 7,
            Builtin::Hypergraphs(_) => 6,
            Builtin::PartialOrders | Builtin::Tournaments | Builtin::Digraphs => 5,
        },
        ClassKind::Forbidden(_) => 5,
        ClassKind::Lex(..) | ClassKind::Full(..) | ClassKind::Super(..) => 6,
    }
}

/// One canonical representative per isomorphism type of members of the
/// given size, sorted.
pub fn enumerate_members(k: &ClassSpec, size: usize) -> Result<Arc<Vec<Structure>>> {
    enumerate_members_with_limit(k, size, enumeration_limit(k))
}

pub fn enumerate_members_with_limit(k: &ClassSpec, size: usize, limit: usize) -> Result<Arc<Vec<Structure>>> {
    if size > limit {
        return Err(Error::Limit(format!("enumeration of {k} at size {size} (limit {limit})")));
    }
    level(k, size)
}

type LevelCache = Mutex<HashMap<ClassSpec, Vec<Arc<Vec<Structure>>>>>;

fn cache() -> &'static LevelCache {
    static CACHE: OnceLock<LevelCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn level(k: &ClassSpec, size: usize) -> Result<Arc<Vec<Structure>>> {
    let mut known = cache().lock().expect("cache lock").get(k).cloned().unwrap_or_default();
    if known.is_empty() {
        let empty = Structure::new(k.sig_arc().clone(), 0);
        let first = if member(k, &empty)? { vec![empty] } else { Vec::new() };
        known.push(Arc::new(first));
    }
    while known.len() <= size {
        let prev = known.last().expect("nonempty").clone();
        let children: Vec<Vec<Structure>> = prev
            .par_iter()
            .map(|s| {
                one_point_extensions(k, s).map(|exts| exts.iter().map(|e| canonical_form(e).into_structure()).collect())
            })
            .collect::<Result<_>>()?;
        let next: BTreeSet<Structure> = children.into_iter().flatten().collect();
        known.push(Arc::new(next.into_iter().collect()));
    }
    let out = known[size].clone();
    let mut guard = cache().lock().expect("cache lock");
    let entry = guard.entry(k.clone()).or_default();
    if entry.len() < known.len() {
        *entry = known;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HereditaryVerdict {
    Pass,
    /// A member with an induced substructure outside the class.
    Counterexample { member: Structure, subset: Vec<usize> },
}

/// Checks every member of size at most `size`, found by brute force over
/// all structures, against all of its induced substructures.
pub fn check_hereditary(k: &ClassSpec, size: usize) -> Result<HereditaryVerdict> {
    for m in 0..=size {
        let probe = Structure::new(k.sig_arc().clone(), m);
        let cells: usize = (0..k.sig().len()).map(|r| probe.cell_count(r)).sum();
        if cells > 24 {
            return Err(Error::Limit(format!("hereditary check of {k} at size {m} needs 2^{cells} structures")));
        }
        for s in all_structures(k.sig(), m) {
            if !member(k, &s)? {
                continue;
            }
            for j in 0..m {
                for subset in (0..m).combinations(j) {
                    if !member(k, &s.pullback(&subset))? {
                        return Ok(HereditaryVerdict::Counterexample { member: s, subset });
                    }
                }
            }
        }
    }
    Ok(HereditaryVerdict::Pass)
}

/// Number of isomorphism types of one-element members.
pub fn singleton_census(k: &ClassSpec) -> Result<usize> {
    Ok(level(k, 1)?.len())
}
