use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::amalgamation::ap::{complete, embedding_orbit_reps, identifications};
use crate::amalgamation::{check_disjoint_n, complete_system, proper_subsets, PSystem, Subset};
use crate::classes::{enumerate_members, member, singleton_census, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{compose, for_each_embedding, is_embedding, qf_class_unchecked, Map, Structure};
use crate::products::{superpose_structures, SuperLayout, Superposition};
use crate::verdict::Verdict;

/// `f: A → B`, a base `C₀ ⊆ C`, a pivot `c ∉ C₀` and `g: A → C` landing in
/// the qf-class of `c` over `C₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DssInstance {
    pub a: Structure,
    pub b: Structure,
    pub c: Structure,
    pub f: Map,
    pub base: Vec<usize>,
    pub pivot: usize,
    pub g: Map,
}

impl DssInstance {
    pub fn validate(&self) -> Result<()> {
        if self.a.sig() != self.b.sig() || self.a.sig() != self.c.sig() {
            return Err(Error::SignatureMismatch("A, B and C must share a signature".into()));
        }
        if !is_embedding(&self.a, &self.b, &self.f) {
            return Err(Error::Invalid(format!("f = {:?} is not an embedding of A into B", self.f)));
        }
        let n = self.c.size();
        if let Some(&x) = self.base.iter().chain([&self.pivot]).find(|&&x| x >= n) {
            return Err(Error::OutOfRange { element: x, size: n });
        }
        let mut sorted = self.base.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.base.len() {
            return Err(Error::Invalid("base lists an element twice".into()));
        }
        if self.base.contains(&self.pivot) {
            return Err(Error::Invalid(format!("pivot {} lies in the base", self.pivot)));
        }
        if !is_embedding(&self.a, &self.c, &self.g) {
            return Err(Error::Invalid(format!("g = {:?} is not an embedding of A into C", self.g)));
        }
        let class = self.class();
        if let Some(x) = self.g.iter().find(|x| !class.contains(x)) {
            return Err(Error::Invalid(format!("g sends an element to {x}, outside the qf-class of the pivot")));
        }
        Ok(())
    }

    /// Qf-class of the pivot over the base in `C`.
    pub fn class(&self) -> Vec<usize> {
        qf_class_unchecked(&self.c, &self.base, self.pivot)
    }

    /// `|B| + |C|`, enough for an exhaustive search.
    pub fn default_host(&self) -> usize {
        self.b.size() + self.c.size()
    }
}

/// `D`, `j: C → D` and `h: B → D` with `h ∘ f = j ∘ g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DssWitness {
    pub d: Structure,
    pub j: Map,
    pub h: Map,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DssSearch {
    Found(DssWitness),
    /// `exhaustive` when no candidate was cut off by the host bound.
    NoneUpToBound { exhaustive: bool },
}

impl DssSearch {
    pub fn witness(&self) -> Option<&DssWitness> {
        match self {
            DssSearch::Found(w) => Some(w),
            DssSearch::NoneUpToBound { .. } => None,
        }
    }
}

pub fn verify_dss_witness(k: &ClassSpec, inst: &DssInstance, w: &DssWitness) -> Result<bool> {
    inst.validate()?;
    if w.d.sig() != k.sig() || !member(k, &w.d)? {
        return Ok(false);
    }
    if !is_embedding(&inst.c, &w.d, &w.j) || !is_embedding(&inst.b, &w.d, &w.h) {
        return Ok(false);
    }
    if compose(&inst.f, &w.h) != compose(&inst.g, &w.j) {
        return Ok(false);
    }
    let base: Vec<usize> = inst.base.iter().map(|&x| w.j[x]).collect();
    let class = qf_class_unchecked(&w.d, &base, w.j[inst.pivot]);
    Ok(w.h.iter().all(|x| class.contains(x)))
}

/// Placement of `B` over `C` plus fresh points: `h` and the universe size.
struct Placement {
    n: usize,
    h: Map,
}

/// Every placement with `j` the identity, most identifications first. The
/// flag is false when some placement exceeded `host`.
fn placements(inst: &DssInstance, host: usize) -> (Vec<Placement>, bool) {
    let nc = inst.c.size();
    let rest: Vec<usize> = (0..inst.b.size()).filter(|x| !inst.f.contains(x)).collect();
    let cands: Vec<usize> = inst.class().into_iter().filter(|x| !inst.g.contains(x)).collect();
    let mut out = Vec::new();
    let mut exhaustive = true;
    for pattern in identifications(cands.len(), rest.len()) {
        let fresh = pattern.iter().filter(|m| m.is_none()).count();
        if nc + fresh > host {
            exhaustive = false;
            continue;
        }
        let mut h = vec![0; inst.b.size()];
        for (i, &x) in inst.f.iter().enumerate() {
            h[x] = inst.g[i];
        }
        let mut next = nc;
        for (&x, m) in rest.iter().zip(&pattern) {
            h[x] = match m {
                Some(i) => cands[*i],
                None => {
                    next += 1;
                    next - 1
                }
            };
        }
        out.push(Placement { n: next, h });
    }
    (out, exhaustive)
}

/// Completes a placement in `k`. Cells come from `C`, then from `B` through
/// `h`, then a fresh point copies the pivot's cells over the base. The
/// result is re-verified, which rejects placements whose sources disagree.
fn realize(k: &ClassSpec, inst: &DssInstance, p: &Placement) -> Result<Option<DssWitness>> {
    let nc = inst.c.size();
    let mut hinv = vec![None; p.n];
    for (b, &x) in p.h.iter().enumerate() {
        hinv[x] = Some(b);
    }
    let mut in_base = vec![false; p.n];
    for &x in &inst.base {
        in_base[x] = true;
    }
    let known = |r: usize, t: &[usize]| {
        if t.iter().all(|&x| x < nc) {
            return Some(inst.c.holds(r, t));
        }
        if let Some(pre) = t.iter().map(|&x| hinv[x]).collect::<Option<Vec<usize>>>() {
            return Some(inst.b.holds(r, &pre));
        }
        let mut fresh = t.iter().filter(|&&x| x >= nc);
        let x = *fresh.next()?;
        if t.iter().all(|&y| y == x || in_base[y]) {
            let moved: Vec<usize> = t.iter().map(|&y| if y == x { inst.pivot } else { y }).collect();
            return Some(inst.c.holds(r, &moved));
        }
        None
    };
    let Some(d) = complete(k, p.n, &known)? else { return Ok(None) };
    let w = DssWitness { d, j: (0..nc).collect(), h: p.h.clone() };
    Ok(verify_dss_witness(k, inst, &w)?.then_some(w))
}

/// Searches `D` of at most `host` points. Any witness restricts to
/// `j(C) ∪ h(B)`, so for hereditary classes the placements are exhaustive.
pub fn check_dss_instance(k: &ClassSpec, inst: &DssInstance, host: usize) -> Result<DssSearch> {
    inst.validate()?;
    for (name, s) in [("A", &inst.a), ("B", &inst.b), ("C", &inst.c)] {
        if s.sig() != k.sig() || !member(k, s)? {
            return Err(Error::Invalid(format!("{name} = {s} is not a member of {k}")));
        }
    }
    let (ps, exhaustive) = placements(inst, host);
    for p in &ps {
        if let Some(w) = realize(k, inst, p)? {
            return Ok(DssSearch::Found(w));
        }
    }
    Ok(DssSearch::NoneUpToBound { exhaustive })
}

/// Every instance with `|A|, |B|, |C| ≤ size`, `A` and `C` up to
/// isomorphism and `f` up to automorphisms of `B`. Without `full_range`,
/// `|B| = |A| + 1`.
pub fn dss_instances(k: &ClassSpec, size: usize, full_range: bool) -> Result<Vec<DssInstance>> {
    let members: Vec<Vec<Structure>> =
        (0..=size).map(|n| enumerate_members(k, n).map(|v| v.to_vec())).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for na in 0..=size {
        for a in &members[na] {
            let b_sizes = if full_range { na..=size } else { na + 1..=(na + 1).min(size) };
            let mut pairs = Vec::new();
            for nb in b_sizes {
                for b in &members[nb] {
                    for f in embedding_orbit_reps(a, b)? {
                        pairs.push((b, f));
                    }
                }
            }
            if pairs.is_empty() {
                continue;
            }
            for c in members.iter().flatten().filter(|c| c.size() >= 1) {
                for (base, pivot, g) in pivots(a, c)? {
                    for (b, f) in &pairs {
                        out.push(DssInstance {
                            a: a.clone(),
                            b: (*b).clone(),
                            c: c.clone(),
                            f: f.clone(),
                            base: base.clone(),
                            pivot,
                            g: g.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn pivots(a: &Structure, c: &Structure) -> Result<Vec<(Vec<usize>, usize, Map)>> {
    let n = c.size();
    let mut out = Vec::new();
    for pivot in 0..n {
        for mask in 0u32..1 << n {
            if mask >> pivot & 1 == 1 {
                continue;
            }
            let base: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let class = qf_class_unchecked(c, &base, pivot);
            let cands = vec![class; a.size()];
            for_each_embedding(a, c, Some(&cands), |g| {
                out.push((base.clone(), pivot, g.to_vec()));
                ControlFlow::Continue(())
            })?;
        }
    }
    Ok(out)
}

/// Definable self-similarity over all instances of [`dss_instances`]. Each
/// instance gets `host` points, or its default host when `None`.
pub fn check_dss(k: &ClassSpec, size: usize, host: Option<usize>, full_range: bool) -> Result<Verdict<DssInstance>> {
    let instances = dss_instances(k, size, full_range)?;
    let results: Vec<DssSearch> = instances
        .par_iter()
        .map(|inst| check_dss_instance(k, inst, host.unwrap_or_else(|| inst.default_host())))
        .collect::<Result<_>>()?;
    let mut open = 0;
    for (inst, r) in instances.into_iter().zip(results) {
        match r {
            DssSearch::Found(_) => {}
            DssSearch::NoneUpToBound { exhaustive: true } => return Ok(Verdict::Fail(inst)),
            DssSearch::NoneUpToBound { exhaustive: false } => open += 1,
        }
    }
    Ok(if open == 0 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive(format!("{open} instances unresolved within the host bound"))
    })
}

/// Witness read off a disjoint 3-amalgam of the system `∅`, `A`, a point,
/// `C₀`, `B`, `C`, `C`. Requires exactly one singleton, heredity, and
/// disjoint 3-amalgamation over pairs (checked up to size 2); a larger `B`
/// is added one point at a time.
pub fn dss_from_3amalg(k: &ClassSpec, inst: &DssInstance) -> Result<DssWitness> {
    inst.validate()?;
    let census = singleton_census(k)?;
    if census != 1 {
        return Err(Error::Hypothesis(format!("{k} has {census} singletons up to isomorphism, not one")));
    }
    if !k.is_hereditary() {
        return Err(Error::Hypothesis(format!("{k} is not known to be hereditary")));
    }
    if check_disjoint_n(k, 3, 2, 0)?.is_fail() {
        return Err(Error::Hypothesis(format!("{k} fails disjoint 3-amalgamation over pairs")));
    }
    let rest: Vec<usize> = (0..inst.b.size()).filter(|x| !inst.f.contains(x)).collect();
    let mut chain: Vec<usize> = inst.f.clone();
    let mut step = DssInstance { b: inst.a.clone(), f: (0..inst.a.size()).collect(), ..inst.clone() };
    let mut j: Map = (0..inst.c.size()).collect();
    for &x in &rest {
        chain.push(x);
        let b_next = inst.b.pullback(&chain);
        let prev_len = chain.len() - 1;
        step = DssInstance {
            a: step.b.pullback(&(0..prev_len).collect::<Vec<_>>()),
            b: b_next,
            f: (0..prev_len).collect(),
            ..step
        };
        let w = one_point_3amalg(k, &step)?;
        j = compose(&j, &w.j);
        step = DssInstance {
            c: w.d,
            base: step.base.iter().map(|&y| w.j[y]).collect(),
            pivot: w.j[step.pivot],
            g: w.h,
            ..step
        };
    }
    // `step.g` now embeds the reordered `B` into the final `D`.
    let mut h = vec![0; inst.b.size()];
    for (i, &x) in chain.iter().enumerate() {
        h[x] = step.g[i];
    }
    Ok(DssWitness { d: step.c, j, h })
}

fn one_point_3amalg(k: &ClassSpec, inst: &DssInstance) -> Result<DssWitness> {
    let extra = (0..inst.b.size()).find(|x| !inst.f.contains(x)).expect("one new point");
    let point = inst.b.pullback(&[extra]);
    if inst.c.pullback(&[inst.pivot]) != point {
        return Err(Error::Hypothesis("the new point and the pivot differ as singletons".into()));
    }
    const A: Subset = 0b001;
    const P: Subset = 0b010;
    const C0: Subset = 0b100;
    let structures = [
        (0, Structure::new(inst.a.sig_arc().clone(), 0)),
        (A, inst.a.clone()),
        (P, point),
        (C0, inst.c.pullback(&inst.base)),
        (A | P, inst.b.clone()),
        (A | C0, inst.c.clone()),
        (P | C0, inst.c.clone()),
    ];
    let edges: [((Subset, Subset), Map); 6] = [
        ((A, A | P), inst.f.clone()),
        ((P, A | P), vec![extra]),
        ((A, A | C0), inst.g.clone()),
        ((C0, A | C0), inst.base.clone()),
        ((P, P | C0), vec![inst.pivot]),
        ((C0, P | C0), inst.base.clone()),
    ];
    let mut sys = PSystem { n: 3, family: proper_subsets(3), structures: structures.into_iter().collect(), maps: Default::default() };
    for (&p, s) in &sys.structures {
        sys.maps.insert((p, p), (0..s.size()).collect());
        sys.maps.insert((0, p), Vec::new());
    }
    sys.maps.extend(edges);
    let completion = complete_system(k, &sys, 0)?
        .ok_or_else(|| Error::Hypothesis("the self-similarity system has no disjoint 3-amalgam".into()))?;
    let w = DssWitness {
        d: completion.top,
        j: completion.inclusions[&(A | C0)].clone(),
        h: completion.inclusions[&(A | P)].clone(),
    };
    if !verify_dss_witness(k, inst, &w)? {
        return Err(Error::Invalid("3-amalgam does not yield a self-similarity witness".into()));
    }
    Ok(w)
}

/// Witness for an instance of a free superposition, solving both reducts
/// over one shared placement so the two completions live on one universe.
pub fn super_dss_transfer(k0: &ClassSpec, k1: &ClassSpec, inst: &DssInstance, host: usize) -> Result<DssWitness> {
    inst.validate()?;
    let layout = SuperLayout::new(k0.sig(), k1.sig());
    if inst.a.sig() != &*layout.sig {
        return Err(Error::SignatureMismatch(format!("instance over {} for a superposition over {}", inst.a.sig(), layout.sig)));
    }
    let split = |s: &Structure| layout.split(s);
    let (a0, a1) = split(&inst.a)?;
    let (b0, b1) = split(&inst.b)?;
    let (c0, c1) = split(&inst.c)?;
    let parts = [
        DssInstance { a: a0, b: b0, c: c0, ..inst.clone() },
        DssInstance { a: a1, b: b1, c: c1, ..inst.clone() },
    ];
    for (kt, part) in [k0, k1].into_iter().zip(&parts) {
        if let DssSearch::NoneUpToBound { .. } = check_dss_instance(kt, part, host)? {
            return Err(Error::Hypothesis(format!("component {kt} has no witness within {host} points")));
        }
    }
    let (ps, _) = placements(inst, host);
    for p in &ps {
        let (Some(w0), Some(w1)) = (realize(k0, &parts[0], p)?, realize(k1, &parts[1], p)?) else { continue };
        let d = superpose_structures(&Superposition { left: w0.d, right: w1.d, aligner: (0..p.n).collect() })?;
        let w = DssWitness { d, j: w0.j, h: w0.h };
        let sk = ClassSpec::superpose(k0.clone(), k1.clone());
        if !verify_dss_witness(&sk, inst, &w)? {
            return Err(Error::Invalid("superposed witness failed verification".into()));
        }
        return Ok(w);
    }
    Err(Error::Hypothesis(format!("the components have no common placement within {host} points")))
}
