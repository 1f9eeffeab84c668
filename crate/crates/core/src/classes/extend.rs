//! One-point extensions of members of hereditary classes.
//!
//! The new point `p` is appended after the old universe. Its cells are
//! grouped by the set `S` of old elements they mention; groups are decided
//! one at a time, and each choice is filtered by membership of the induced
//! structure on `S ∪ {p}` (memoized). After all groups inside `{0..x, p}`
//! are decided, the induced structure there is checked as well unless the
//! class is local enough for that to be implied.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use itertools::Itertools;

use super::{member, Builtin, ClassKind, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{canonical_labeling, Signature, Structure};

/// Most cells in one local group tried by brute force.
const MAX_LOCAL_CELLS: usize = 22;

type MaskMemo = HashMap<ClassSpec, HashMap<Structure, Arc<Vec<u64>>>>;
type ExtMemo = HashMap<ClassSpec, HashMap<Structure, Arc<Vec<Structure>>>>;

thread_local! {
    static MASKS: RefCell<MaskMemo> = RefCell::new(HashMap::new());
    static EXTENSIONS: RefCell<ExtMemo> = RefCell::new(HashMap::new());
}

/// Cells over `0..m` that mention every element, in relation order.
fn local_cells(sig: &Signature, m: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for r in 0..sig.len() {
        for t in crate::kernel::tuples_over(m, sig.arity(r)) {
            if (0..m).all(|x| t.contains(&x)) {
                out.push((r, t));
            }
        }
    }
    out
}

fn set_mask(s: &mut Structure, cells: &[(usize, Vec<usize>)], mask: u64) {
    for (i, (r, t)) in cells.iter().enumerate() {
        s.set(*r, t, mask >> i & 1 == 1);
    }
}

/// Admissible values for the cells over `0..m` that mention every element,
/// given the rest of `key` (those cells are false in `key`).
fn allowed_masks(k: &ClassSpec, key: &Structure) -> Result<Arc<Vec<u64>>> {
    if let Some(hit) = MASKS.with(|m| m.borrow().get(k).and_then(|inner| inner.get(key)).cloned()) {
        return Ok(hit);
    }
    let m = key.size();
    let cells = local_cells(key.sig(), m);
    let masks: Vec<u64> = match &k.kind {
        ClassKind::Builtin(Builtin::Hypergraphs(arity)) => {
            if m == *arity {
                vec![0, (1u64 << cells.len()) - 1]
            } else {
                vec![0]
            }
        }
        ClassKind::Super(k0, k1) => {
            let n0 = k0.sig().len();
            let c0 = cells.iter().filter(|(r, _)| *r < n0).count();
            let left = key.reduct(&(0..n0).collect::<Vec<_>>()).retag(k0.sig_arc().clone())?;
            let right = key.reduct(&(n0..key.sig().len()).collect::<Vec<_>>()).retag(k1.sig_arc().clone())?;
            let a = allowed_masks(k0, &left)?;
            let b = allowed_masks(k1, &right)?;
            a.iter().cartesian_product(b.iter()).map(|(x, y)| x | y << c0).sorted().collect()
        }
        _ => {
            if cells.len() > MAX_LOCAL_CELLS {
                return Err(Error::Limit(format!(
                    "{} cells in one extension group for {} (limit {MAX_LOCAL_CELLS})",
                    cells.len(),
                    k
                )));
            }
            let mut out = Vec::new();
            let mut t = key.clone();
            for mask in 0..1u64 << cells.len() {
                set_mask(&mut t, &cells, mask);
                if member(k, &t)? {
                    out.push(mask);
                }
            }
            out
        }
    };
    let masks = Arc::new(masks);
    MASKS.with(|memo| {
        memo.borrow_mut().entry(k.clone()).or_default().insert(key.clone(), masks.clone());
    });
    Ok(masks)
}

struct Unit {
    elems: Vec<usize>,
    cells: Vec<(usize, Vec<usize>)>,
    /// Set on the last group mentioning old element `x`.
    stage_end: Option<usize>,
}

/// Known cell values: `known(r, tuple)` over the extended universe.
pub type Known<'a> = &'a dyn Fn(usize, &[usize]) -> Option<bool>;

/// Calls `visit` on every member of `k` of size `|s|+1` whose restriction to
/// `0..|s|` is `s`, agreeing with `known` where it is defined. Order is
/// deterministic. Does nothing if `s` itself is not a member.
pub fn for_each_extension(
    k: &ClassSpec,
    s: &Structure,
    known: Option<Known>,
    visit: &mut dyn FnMut(&Structure) -> ControlFlow<()>,
) -> Result<()> {
    if s.sig() != k.sig() {
        return Err(Error::SignatureMismatch(format!("structure over {} extended in a class over {}", s.sig(), k.sig())));
    }
    if !member(k, s)? {
        return Ok(());
    }
    let n = s.size();
    let p = n;
    let sig = k.sig();
    let maxar = sig.max_arity();
    let mut units = vec![Unit { elems: Vec::new(), cells: local_cells(sig, 1), stage_end: None }];
    if maxar >= 2 {
        for x in 0..n {
            let start = units.len();
            for size in 0..=maxar - 2 {
                for rest in (0..x).combinations(size) {
                    let mut elems = rest;
                    elems.push(x);
                    units.push(Unit { elems, cells: local_cells(sig, size + 2), stage_end: None });
                }
            }
            if units.len() > start {
                units.last_mut().expect("nonempty").stage_end = Some(x);
            }
        }
    }
    let need_checks = k.locality().map_or(true, |d| d > maxar);
    let whole_checked = n == 0 || maxar >= 2;
    let mut search = Search { k, units, need_checks, whole_checked, known, p, t: s.with_extra_points(1), visit };
    let _ = search.dfs(0)?;
    Ok(())
}

struct Search<'a, 'v> {
    k: &'a ClassSpec,
    units: Vec<Unit>,
    need_checks: bool,
    whole_checked: bool,
    known: Option<Known<'a>>,
    p: usize,
    t: Structure,
    visit: &'v mut dyn FnMut(&Structure) -> ControlFlow<()>,
}

impl Search<'_, '_> {
    fn dfs(&mut self, i: usize) -> Result<ControlFlow<()>> {
        if i == self.units.len() {
            if self.need_checks && !self.whole_checked && !member(self.k, &self.t)? {
                return Ok(ControlFlow::Continue(()));
            }
            return Ok((self.visit)(&self.t));
        }
        let mut local = self.units[i].elems.clone();
        local.push(self.p);
        let masks = allowed_masks(self.k, &self.t.pullback(&local))?;
        let global: Vec<(usize, Vec<usize>)> = self.units[i]
            .cells
            .iter()
            .map(|(r, lt)| (*r, lt.iter().map(|&j| local[j]).collect()))
            .collect();
        'masks: for &mask in masks.iter() {
            if let Some(known) = self.known {
                for (bit, (r, gt)) in global.iter().enumerate() {
                    if known(*r, gt).is_some_and(|v| v != (mask >> bit & 1 == 1)) {
                        continue 'masks;
                    }
                }
            }
            set_mask(&mut self.t, &global, mask);
            let mut ok = true;
            if let (true, Some(x)) = (self.need_checks, self.units[i].stage_end) {
                let mut sub: Vec<usize> = (0..=x).collect();
                sub.push(self.p);
                ok = member(self.k, &self.t.pullback(&sub))?;
            }
            if ok && self.dfs(i + 1)?.is_break() {
                set_mask(&mut self.t, &global, 0);
                return Ok(ControlFlow::Break(()));
            }
            set_mask(&mut self.t, &global, 0);
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// All one-point extensions of `s` in `k`, sorted. Memoized per thread by
/// isomorphism type of `s`.
pub fn one_point_extensions(k: &ClassSpec, s: &Structure) -> Result<Vec<Structure>> {
    if s.sig() != k.sig() {
        return Err(Error::SignatureMismatch(format!("structure over {} extended in a class over {}", s.sig(), k.sig())));
    }
    let (canon, perm) = canonical_labeling(s);
    let canon = canon.into_structure();
    let cached = EXTENSIONS.with(|m| m.borrow().get(k).and_then(|inner| inner.get(&canon)).cloned());
    let exts = match cached {
        Some(hit) => hit,
        None => {
            let mut out = Vec::new();
            for_each_extension(k, &canon, None, &mut |t| {
                out.push(t.clone());
                ControlFlow::Continue(())
            })?;
            let out = Arc::new(out);
            EXTENSIONS.with(|m| {
                m.borrow_mut().entry(k.clone()).or_default().insert(canon, out.clone());
            });
            out
        }
    };
    let mut map = perm;
    map.push(s.size());
    let mut result: Vec<Structure> = exts.iter().map(|e| e.pullback(&map)).collect();
    result.sort();
    Ok(result)
}
