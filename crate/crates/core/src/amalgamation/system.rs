//! Disjoint amalgamation systems indexed by intersection-closed families of
//! subsets of `n = {0, …, n−1}`, represented as bitmasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::ap::complete;
use crate::classes::{all_structures, member, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{canonical_form, compose, is_embedding, tuples_over, Map, Signature, Structure};
use crate::verdict::Verdict;

pub type Subset = u32;

/// Largest `n` accepted by the system checkers.
pub const MAX_SYSTEM_ARITY: usize = 5;

pub fn fmt_subset(p: Subset) -> String {
    let elems: Vec<String> = (0..32).filter(|i| p >> i & 1 == 1).map(|i| i.to_string()).collect();
    format!("{{{}}}", elems.join(","))
}

/// Structures `A_p` for `p` in the family and maps `f_{p,q}` for `p ⊆ q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PSystem {
    pub n: usize,
    pub family: Vec<Subset>,
    pub structures: BTreeMap<Subset, Structure>,
    pub maps: BTreeMap<(Subset, Subset), Map>,
}

/// All proper subsets of `n`, by size and then by mask.
pub fn proper_subsets(n: usize) -> Vec<Subset> {
    let full: Subset = (1 << n) - 1;
    let mut out: Vec<Subset> = (0..full).collect();
    out.sort_by_key(|p| (p.count_ones(), *p));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemViolation {
    OutOfRange { p: Subset },
    NotIntersectionClosed { p: Subset, q: Subset },
    MissingStructure { p: Subset },
    MissingMap { p: Subset, q: Subset },
    NotEmbedding { p: Subset, q: Subset },
    Identity { p: Subset },
    Commutativity { p: Subset, q: Subset, r: Subset, element: usize },
    Disjointness { p: Subset, q: Subset, r: Subset, element: usize },
}

impl fmt::Display for SystemViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = fmt_subset;
        match *self {
            SystemViolation::OutOfRange { p } => write!(f, "index set {} is not a subset of n", s(p)),
            SystemViolation::NotIntersectionClosed { p, q } => {
                write!(f, "family not closed under intersection: {} ∩ {} missing", s(p), s(q))
            }
            SystemViolation::MissingStructure { p } => write!(f, "no structure for {}", s(p)),
            SystemViolation::MissingMap { p, q } => write!(f, "no map {} → {}", s(p), s(q)),
            SystemViolation::NotEmbedding { p, q } => write!(f, "map {} → {} is not an embedding", s(p), s(q)),
            SystemViolation::Identity { p } => write!(f, "identity: map {} → {} is not the identity", s(p), s(p)),
            SystemViolation::Commutativity { p, q, r, element } => {
                write!(f, "commutativity: {} → {} → {} differs from {} → {} at element {element}", s(p), s(q), s(r), s(p), s(r))
            }
            SystemViolation::Disjointness { p, q, r, element } => write!(
                f,
                "disjointness: element {element} of A{} lies in the images of {} and {} but not of {}",
                s(r),
                s(p),
                s(q),
                s(p & q)
            ),
        }
    }
}

/// Checks the identity, commutativity and disjointness axioms.
pub fn verify_p_system(sys: &PSystem) -> std::result::Result<(), SystemViolation> {
    let full: Subset = if sys.n >= 32 { Subset::MAX } else { (1 << sys.n) - 1 };
    let fam: BTreeSet<Subset> = sys.family.iter().copied().collect();
    for &p in &sys.family {
        if p & !full != 0 {
            return Err(SystemViolation::OutOfRange { p });
        }
        if !sys.structures.contains_key(&p) {
            return Err(SystemViolation::MissingStructure { p });
        }
        for &q in &sys.family {
            if !fam.contains(&(p & q)) {
                return Err(SystemViolation::NotIntersectionClosed { p, q });
            }
        }
    }
    let map = |p: Subset, q: Subset| sys.maps.get(&(p, q)).ok_or(SystemViolation::MissingMap { p, q });
    for &p in &sys.family {
        for &q in sys.family.iter().filter(|&&q| p & q == p) {
            let f = map(p, q)?;
            let (ap, aq) = (&sys.structures[&p], &sys.structures[&q]);
            if f.len() != ap.size() || f.iter().any(|&x| x >= aq.size()) || ap.sig() != aq.sig() || !is_embedding(ap, aq, f)
            {
                return Err(SystemViolation::NotEmbedding { p, q });
            }
            if p == q && f.iter().enumerate().any(|(i, &x)| i != x) {
                return Err(SystemViolation::Identity { p });
            }
        }
    }
    for &p in &sys.family {
        for &q in sys.family.iter().filter(|&&q| p & q == p) {
            for &r in sys.family.iter().filter(|&&r| q & r == q) {
                let direct = map(p, r)?;
                let via = compose(map(p, q)?, map(q, r)?);
                if let Some(element) = (0..direct.len()).find(|&i| direct[i] != via[i]) {
                    return Err(SystemViolation::Commutativity { p, q, r, element });
                }
            }
        }
    }
    for &r in &sys.family {
        let subs: Vec<Subset> = sys.family.iter().copied().filter(|&p| p & r == p).collect();
        for (i, &p) in subs.iter().enumerate() {
            for &q in &subs[i + 1..] {
                let img = |s: Subset| -> BTreeSet<usize> { sys.maps[&(s, r)].iter().copied().collect() };
                let meet = img(p & q);
                if let Some(&element) = img(p).intersection(&img(q)).find(|x| !meet.contains(x)) {
                    return Err(SystemViolation::Disjointness { p, q, r, element });
                }
            }
        }
    }
    Ok(())
}

/// The glued universe of a system: each element has a unique minimal origin
/// set; relations are copied from the images of the `A_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colimit {
    /// Relations on covered tuples; other tuples are false.
    pub structure: Structure,
    pub origin: Vec<Subset>,
    pub inclusions: BTreeMap<Subset, Map>,
    covers: Vec<u64>,
}

impl Colimit {
    /// Value of a cell lying inside the image of some `A_p`.
    pub fn known(&self, r: usize, t: &[usize]) -> Option<bool> {
        let common = t.iter().fold(u64::MAX, |acc, &x| acc & self.covers.get(x).copied().unwrap_or(0));
        (common != 0).then(|| self.structure.holds(r, t))
    }

    pub fn size(&self) -> usize {
        self.structure.size()
    }
}

/// Glues the `A_p` along the system maps.
pub fn colimit_base(sys: &PSystem) -> Result<Colimit> {
    verify_p_system(sys).map_err(|v| Error::Invalid(format!("not a disjoint amalgamation system: {v}")))?;
    if sys.family.len() > 64 {
        return Err(Error::Limit(format!("family of {} index sets (limit 64)", sys.family.len())));
    }
    let mut order = sys.family.clone();
    order.sort_by_key(|p| (p.count_ones(), *p));
    // The minimal origin of an element of A_q is the least p ⊆ q whose image
    // contains it.
    let mut elements: Vec<(Subset, usize)> = Vec::new();
    for &p in &order {
        let own: BTreeSet<usize> = order
            .iter()
            .filter(|&&s| s & p == s && s != p)
            .flat_map(|&s| sys.maps[&(s, p)].iter().copied())
            .collect();
        for x in 0..sys.structures[&p].size() {
            if !own.contains(&x) {
                elements.push((p, x));
            }
        }
    }
    let index: BTreeMap<(Subset, usize), usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let sig = sys.structures[&order[0]].sig_arc().clone();
    let mut structure = Structure::new(sig.clone(), elements.len());
    let mut inclusions = BTreeMap::new();
    let mut covers = vec![0u64; elements.len()];
    for (bit, &q) in order.iter().enumerate() {
        let aq = &sys.structures[&q];
        let mut inc = vec![usize::MAX; aq.size()];
        for &p in order.iter().filter(|&&p| p & q == p) {
            for (x, &y) in sys.maps[&(p, q)].iter().enumerate() {
                if let Some(&i) = index.get(&(p, x)) {
                    inc[y] = i;
                }
            }
        }
        for &i in &inc {
            covers[i] |= 1 << bit;
        }
        for r in 0..sig.len() {
            for t in aq.tuples(r) {
                let image: Vec<usize> = t.iter().map(|&x| inc[x]).collect();
                structure.set(r, &image, true);
            }
        }
        inclusions.insert(q, inc);
    }
    let origin = elements.iter().map(|&(p, _)| p).collect();
    Ok(Colimit { structure, origin, inclusions, covers })
}

/// The system over all proper subsets of `n` determined by a partial
/// structure on elements with the given origins.
fn system_from_parts(n: usize, sig: &Arc<Signature>, origin: &[Subset], cells: &Structure) -> PSystem {
    let family = proper_subsets(n);
    let elems_of = |p: Subset| -> Vec<usize> { (0..origin.len()).filter(|&i| origin[i] & p == origin[i]).collect() };
    let mut structures = BTreeMap::new();
    let mut maps = BTreeMap::new();
    for &q in &family {
        let eq = elems_of(q);
        structures.insert(q, cells.pullback(&eq).retag(sig.clone()).expect("same signature"));
        for &p in family.iter().filter(|&&p| p & q == p) {
            let map = elems_of(p).iter().map(|x| eq.iter().position(|y| y == x).expect("subset")).collect();
            maps.insert((p, q), map);
        }
    }
    PSystem { n, family, structures, maps }
}

/// Every base system over the proper subsets of `n` with `|A_p| ≤ base`, up
/// to simultaneous isomorphism, ordered by colimit size.
pub fn base_systems(k: &ClassSpec, n: usize, base: usize) -> Result<Vec<PSystem>> {
    if !(2..=MAX_SYSTEM_ARITY).contains(&n) {
        return Err(Error::Limit(format!("system arity {n} outside 2..={MAX_SYSTEM_ARITY}")));
    }
    let family = proper_subsets(n);
    let maximal: Vec<Subset> = family.iter().copied().filter(|p| p.count_ones() as usize == n - 1).collect();
    let full: Subset = (1 << n) - 1;
    let mut out: Vec<(usize, PSystem)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut sizes = vec![0usize; family.len()];
    let mut size_vectors = Vec::new();
    part_sizes(&family, &maximal, base, 0, &mut sizes, &mut size_vectors);
    for sizes in size_vectors {
        let origin: Vec<Subset> = family.iter().zip(&sizes).flat_map(|(&p, &m)| std::iter::repeat(p).take(m)).collect();
        let total = origin.len();
        // Marker predicates make the canonical form respect origins.
        let mut marked = k.sig().symbols().iter().map(|s| (s.name.clone(), s.arity)).collect::<Vec<_>>();
        marked.extend(family.iter().map(|p| (format!("origin_{p}"), 1)));
        let marked = Arc::new(Signature::new(marked)?);
        let mut found = Vec::new();
        let mut cells = Structure::new(k.sig_arc().clone(), total);
        fill(k, &origin, full, &maximal, 0, &mut cells, &mut found)?;
        for cells in found {
            let mut key = Structure::new(marked.clone(), total);
            for r in 0..k.sig().len() {
                for t in cells.tuples(r) {
                    key.set(r, &t, true);
                }
            }
            for (i, &p) in origin.iter().enumerate() {
                let slot = k.sig().len() + family.iter().position(|&q| q == p).expect("member");
                key.set(slot, &[i], true);
            }
            if seen.insert(canonical_form(&key)) {
                out.push((total, system_from_parts(n, k.sig_arc(), &origin, &cells)));
            }
        }
    }
    out.sort_by_key(|(total, _)| *total);
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

fn part_sizes(family: &[Subset], maximal: &[Subset], base: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i == family.len() {
        out.push(cur.clone());
        return;
    }
    for m in 0..=base {
        cur[i] = m;
        let ok = maximal.iter().all(|&q| {
            family.iter().zip(cur.iter()).take(i + 1).filter(|(&p, _)| p & q == p).map(|(_, &m)| m).sum::<usize>() <= base
        });
        if !ok {
            break;
        }
        part_sizes(family, maximal, base, i + 1, cur, out);
    }
    cur[i] = 0;
}

/// Assigns the covered cells point by point, keeping every `A_p` inside `k`.
fn fill(
    k: &ClassSpec,
    origin: &[Subset],
    full: Subset,
    maximal: &[Subset],
    i: usize,
    cells: &mut Structure,
    out: &mut Vec<Structure>,
) -> Result<()> {
    if i == origin.len() {
        out.push(cells.clone());
        return Ok(());
    }
    let sig = k.sig();
    let mut new_cells = Vec::new();
    for r in 0..sig.len() {
        for t in tuples_over(i + 1, sig.arity(r)) {
            let union = t.iter().fold(0, |acc, &x| acc | origin[x]);
            if t.contains(&i) && union != full {
                new_cells.push((r, t));
            }
        }
    }
    if new_cells.len() > 24 {
        return Err(Error::Limit(format!("{} cells for one point of a base system", new_cells.len())));
    }
    let checks: Vec<Vec<usize>> = maximal
        .iter()
        .filter(|&&q| origin[i] & q == origin[i])
        .map(|&q| (0..=i).filter(|&x| origin[x] & q == origin[x]).collect())
        .collect();
    for mask in 0..1u64 << new_cells.len() {
        for (bit, (r, t)) in new_cells.iter().enumerate() {
            cells.set(*r, t, mask >> bit & 1 == 1);
        }
        let mut ok = true;
        for elems in &checks {
            if !member(k, &cells.pullback(elems))? {
                ok = false;
                break;
            }
        }
        if ok {
            fill(k, origin, full, maximal, i + 1, cells, out)?;
        }
    }
    for (r, t) in &new_cells {
        cells.set(*r, t, false);
    }
    Ok(())
}

/// `A_n` with inclusions `f_{p,n}` completing a base system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub top: Structure,
    pub inclusions: BTreeMap<Subset, Map>,
}

impl Completion {
    /// The base system with `n` added.
    pub fn extend(&self, base: &PSystem) -> PSystem {
        let top: Subset = (1 << base.n) - 1;
        let mut sys = base.clone();
        sys.family.push(top);
        sys.structures.insert(top, self.top.clone());
        for (&p, inc) in &self.inclusions {
            sys.maps.insert((p, top), inc.clone());
        }
        sys.maps.insert((top, top), (0..self.top.size()).collect());
        sys
    }
}

/// Searches a member of `k` on the colimit universe plus at most `pad` fresh
/// points in which every `A_p` sits as an induced substructure.
pub fn complete_system(k: &ClassSpec, sys: &PSystem, pad: usize) -> Result<Option<Completion>> {
    let col = colimit_base(sys)?;
    if col.structure.sig() != k.sig() {
        return Err(Error::SignatureMismatch(format!("system over {} for a class over {}", col.structure.sig(), k.sig())));
    }
    for extra in 0..=pad {
        let known = |r: usize, t: &[usize]| col.known(r, t);
        if let Some(top) = complete(k, col.size() + extra, &known)? {
            return Ok(Some(Completion { top, inclusions: col.inclusions.clone() }));
        }
    }
    Ok(None)
}

/// Disjoint `n`-amalgamation over every base system with `|A_p| ≤ base`.
/// The class is hereditary, so a base system without a completion on its
/// colimit universe has none at all; the first such system is returned.
pub fn check_disjoint_n(k: &ClassSpec, n: usize, base: usize, pad: usize) -> Result<Verdict<PSystem>> {
    let systems = base_systems(k, n, base)?;
    let results: Vec<bool> =
        systems.par_iter().map(|s| complete_system(k, s, pad).map(|c| c.is_some())).collect::<Result<_>>()?;
    Ok(match systems.into_iter().zip(results).find(|(_, ok)| !ok) {
        Some((sys, _)) => Verdict::Fail(sys),
        None => Verdict::Pass,
    })
}

/// Whether the colimit of a three-index system realizes `R(x, y) ∧ R(y, z) ∧
/// ¬R(x, z)` on its three singleton-origin points, for some ordering.
pub fn is_transitivity_pattern(sys: &PSystem, symbol: usize) -> Result<bool> {
    let col = colimit_base(sys)?;
    if sys.n != 3 || col.size() != 3 || col.origin.iter().any(|p| p.count_ones() != 1) {
        return Ok(false);
    }
    let s = &col.structure;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    Ok(perms.iter().any(|&[x, y, z]| s.holds(symbol, &[x, y]) && s.holds(symbol, &[y, z]) && !s.holds(symbol, &[x, z])))
}

/// The base system on three singletons with `R(0,1)`, `R(1,2)` and
/// `¬R(0,2)`, each pair structure chosen as the first member of `k` on two
/// points with that value.
pub fn transitivity_system(k: &ClassSpec, symbol: &str) -> Result<PSystem> {
    let r = k.sig().index_of(symbol).ok_or_else(|| Error::Invalid(format!("no symbol {symbol} in {}", k.sig())))?;
    if k.sig().arity(r) != 2 {
        return Err(Error::Invalid(format!("{symbol} is not binary")));
    }
    let pick = |value: bool| -> Result<Structure> {
        for s in all_structures(k.sig(), 2) {
            if s.holds(r, &[0, 1]) == value && member(k, &s)? {
                return Ok(s);
            }
        }
        Err(Error::Hypothesis(format!("no two-point member with {symbol}(0,1) = {value}")))
    };
    let pairs = [(0b011, pick(true)?), (0b110, pick(true)?), (0b101, pick(false)?)];
    let singles: BTreeSet<Structure> = pairs.iter().flat_map(|(_, s)| [s.pullback(&[0]), s.pullback(&[1])]).collect();
    if singles.len() != 1 {
        return Err(Error::Hypothesis("the two-point members disagree on singletons".into()));
    }
    let single = singles.into_iter().next().expect("one");
    let family = proper_subsets(3);
    let mut structures = BTreeMap::new();
    let mut maps = BTreeMap::new();
    structures.insert(0, Structure::new(k.sig_arc().clone(), 0));
    for i in 0..3 {
        structures.insert(1 << i, single.clone());
    }
    for (p, s) in pairs {
        structures.insert(p, s);
    }
    for &q in &family {
        let elems: Vec<usize> = (0..3).filter(|i| q >> i & 1 == 1).collect();
        for &p in family.iter().filter(|&&p| p & q == p) {
            let map = (0..3).filter(|i| p >> i & 1 == 1).map(|i| elems.iter().position(|&e| e == i).expect("subset")).collect();
            maps.insert((p, q), map);
        }
    }
    Ok(PSystem { n: 3, family, structures, maps })
}
