//! Amalgams assembled from amalgams of the factors.

use std::collections::BTreeMap;

use super::ap::{check_ap_instance, verify_amalgam, Amalgam, AmalgInstance, AmalgamSearch};
use super::system::{complete_system, verify_p_system, Completion, PSystem, Subset};
use crate::classes::{member, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{Map, Structure};
use crate::products::{
    decompose_full, decompose_lex, full_structure, lex_structure, superpose_structures, FullAssembly, FullDecomposition,
    FullVerdict, LexAssembly, LexDecomposition, SuperLayout, Superposition,
};

/// Host bounds for the searches run inside each factor class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorBounds {
    pub host0: usize,
    pub host1: usize,
}

impl Default for FactorBounds {
    fn default() -> Self {
        FactorBounds { host0: 8, host1: 8 }
    }
}

fn solve(k: &ClassSpec, inst: &AmalgInstance, host: usize, strong: bool) -> Result<Amalgam> {
    match check_ap_instance(k, inst, host, strong)? {
        AmalgamSearch::Found(am) => Ok(am),
        AmalgamSearch::NoneUpToBound { .. } => {
            Err(Error::Inconclusive(format!("factor class {k} has no amalgam within {host} points for {inst:?}")))
        }
    }
}

fn lex_parts(s: &Structure, k0: &ClassSpec, k1: &ClassSpec) -> Result<LexDecomposition> {
    decompose_lex(s, k0, k1)?.map_err(|why| Error::Invalid(format!("not a lexicographic product member: {why}")))
}

/// AP for `k0 ≀ k1` from amalgams in `k1` of the quotients and, fibre by
/// fibre, amalgams or joint embeddings in `k0`.
pub fn lex_amalgam_builder(inst: &AmalgInstance, k0: &ClassSpec, k1: &ClassSpec, bounds: FactorBounds) -> Result<Amalgam> {
    build_lex(inst, k0, k1, bounds, false)
}

/// As [`lex_amalgam_builder`] with strong amalgams in both factors; the
/// result meets the strong disjointness condition.
pub fn lex_strong_amalgam_builder(
    inst: &AmalgInstance,
    k0: &ClassSpec,
    k1: &ClassSpec,
    bounds: FactorBounds,
) -> Result<Amalgam> {
    build_lex(inst, k0, k1, bounds, true)
}

fn build_lex(inst: &AmalgInstance, k0: &ClassSpec, k1: &ClassSpec, bounds: FactorBounds, strong: bool) -> Result<Amalgam> {
    inst.validate()?;
    let da = lex_parts(&inst.a, k0, k1)?;
    let db = [lex_parts(&inst.b0, k0, k1)?, lex_parts(&inst.b1, k0, k1)?];
    let fs = [&inst.f0, &inst.f1];
    // Embeddings factor through the quotient: f(x) has base coordinate
    // f¹(base of x) and fibre coordinate f⁰_b(fibre coordinate of x).
    let base_maps: Vec<Map> = (0..2)
        .map(|t| {
            let mut m = vec![0; da.assembly.base.size()];
            for (x, &(b, _)) in da.coords.iter().enumerate() {
                m[b] = db[t].coords[fs[t][x]].0;
            }
            m
        })
        .collect();
    let fiber_map = |t: usize, b: usize| -> Map {
        let mut m = vec![0; da.assembly.fibers[b].size()];
        for (x, &(bx, i)) in da.coords.iter().enumerate() {
            if bx == b {
                m[i] = db[t].coords[fs[t][x]].1;
            }
        }
        m
    };
    let top = AmalgInstance::new(
        da.assembly.base.clone(),
        db[0].assembly.base.clone(),
        db[1].assembly.base.clone(),
        base_maps[0].clone(),
        base_maps[1].clone(),
    )?;
    let c1 = solve(k1, &top, bounds.host1, strong)?;
    let nc = c1.c.size();
    let preimage = |t: usize, c: usize| c1_pre(&c1, t, c);
    let a_at: Vec<Option<usize>> = (0..nc)
        .map(|c| (0..da.assembly.base.size()).find(|&a| c1.g0[base_maps[0][a]] == c))
        .collect();
    let mut fibers = Vec::with_capacity(nc);
    // Fibre embeddings g⁰_{t,b} indexed by (t, b).
    let mut inner: BTreeMap<(usize, usize), Map> = BTreeMap::new();
    for c in 0..nc {
        let (p0, p1) = (preimage(0, c), preimage(1, c));
        let fiber = match (p0, p1, a_at[c]) {
            (None, None, _) => Structure::new(k0.sig_arc().clone(), 0),
            (Some(b), None, _) | (None, Some(b), _) => {
                let t = usize::from(p0.is_none());
                let f = db[t].assembly.fibers[b].clone();
                inner.insert((t, b), (0..f.size()).collect());
                f
            }
            (Some(b0), Some(b1), None) => {
                let joint = AmalgInstance::joint(db[0].assembly.fibers[b0].clone(), db[1].assembly.fibers[b1].clone());
                let am = solve(k0, &joint, bounds.host0, strong)?;
                inner.insert((0, b0), am.g0);
                inner.insert((1, b1), am.g1);
                am.c
            }
            (Some(b0), Some(b1), Some(a)) => {
                let sub = AmalgInstance::new(
                    da.assembly.fibers[a].clone(),
                    db[0].assembly.fibers[b0].clone(),
                    db[1].assembly.fibers[b1].clone(),
                    fiber_map(0, a),
                    fiber_map(1, a),
                )?;
                let am = solve(k0, &sub, bounds.host0, strong)?;
                inner.insert((0, b0), am.g0);
                inner.insert((1, b1), am.g1);
                am.c
            }
        };
        fibers.push(fiber);
    }
    let asm = LexAssembly { l0: k0.sig_arc().clone(), base: c1.c.clone(), fibers };
    let offsets = asm.offsets();
    let c = lex_structure(&asm)?.retag(inst.a.sig_arc().clone())?;
    let g: Vec<Map> = (0..2)
        .map(|t| {
            let g1 = if t == 0 { &c1.g0 } else { &c1.g1 };
            db[t].coords.iter().map(|&(b, i)| offsets[g1[b]] + inner[&(t, b)][i]).collect()
        })
        .collect();
    let am = Amalgam { c, g0: g[0].clone(), g1: g[1].clone() };
    let k = ClassSpec::lex(k0.clone(), k1.clone());
    if !verify_amalgam(&k, inst, &am, strong)? {
        return Err(Error::Invalid("assembled lexicographic amalgam failed verification".into()));
    }
    Ok(am)
}

fn c1_pre(c1: &Amalgam, t: usize, c: usize) -> Option<usize> {
    let g = if t == 0 { &c1.g0 } else { &c1.g1 };
    g.iter().position(|&x| x == c)
}

fn full_parts(s: &Structure, k0: &ClassSpec, k1: &ClassSpec) -> Result<FullDecomposition> {
    match decompose_full(s, k0, k1, s.size())? {
        FullVerdict::Accept(d) => Ok(d),
        FullVerdict::Reject(why) => Err(Error::Invalid(format!("not a full product member: {why}"))),
        FullVerdict::Inconclusive(why) => Err(Error::Inconclusive(why)),
    }
}

/// AP for `k0 ⊠ k1`: amalgamate the two quotients separately and embed
/// coordinatewise into the full product of the two amalgams.
pub fn full_amalgam_builder(inst: &AmalgInstance, k0: &ClassSpec, k1: &ClassSpec, bounds: FactorBounds) -> Result<Amalgam> {
    inst.validate()?;
    let da = full_parts(&inst.a, k0, k1)?;
    let db = [full_parts(&inst.b0, k0, k1)?, full_parts(&inst.b1, k0, k1)?];
    let fs = [&inst.f0, &inst.f1];
    let mut comps = Vec::new();
    for side in 0..2 {
        let class = |d: &FullDecomposition| if side == 0 { d.class0.clone() } else { d.class1.clone() };
        let quotient = |d: &FullDecomposition| if side == 0 { d.q0.clone() } else { d.q1.clone() };
        let ca = class(&da);
        let maps: Vec<Map> = (0..2)
            .map(|t| {
                let cb = class(&db[t]);
                let mut m = vec![0; quotient(&da).size()];
                for (x, &q) in ca.iter().enumerate() {
                    m[q] = cb[fs[t][x]];
                }
                m
            })
            .collect();
        let sub = AmalgInstance::new(quotient(&da), quotient(&db[0]), quotient(&db[1]), maps[0].clone(), maps[1].clone())?;
        let (k, host) = if side == 0 { (k0, bounds.host0) } else { (k1, bounds.host1) };
        comps.push(solve(k, &sub, host, false)?);
    }
    let width = comps[1].c.size();
    let c = full_structure(&FullAssembly { left: comps[0].c.clone(), right: comps[1].c.clone() })
        .retag(inst.a.sig_arc().clone())?;
    let g: Vec<Map> = (0..2)
        .map(|t| {
            let (h0, h1) = if t == 0 { (&comps[0].g0, &comps[1].g0) } else { (&comps[0].g1, &comps[1].g1) };
            db[t].class0.iter().zip(&db[t].class1).map(|(&x, &y)| h0[x] * width + h1[y]).collect()
        })
        .collect();
    let am = Amalgam { c, g0: g[0].clone(), g1: g[1].clone() };
    if !verify_amalgam(&ClassSpec::full(k0.clone(), k1.clone()), inst, &am, false)? {
        return Err(Error::Invalid("assembled full-product amalgam failed verification".into()));
    }
    Ok(am)
}

/// Completes a base system in `k0 ∗ k1`: each reduct system is completed in
/// its own class, the two tops are trimmed to the union of images and
/// glued by matching elements of equal minimal origin.
pub fn super_n_amalgam_builder(sys: &PSystem, k0: &ClassSpec, k1: &ClassSpec, pad: usize) -> Result<PSystem> {
    if !k0.is_hereditary() || !k1.is_hereditary() {
        return Err(Error::Hypothesis("superposition amalgams need hereditary factor classes".into()));
    }
    verify_p_system(sys).map_err(|v| Error::Invalid(format!("not a disjoint amalgamation system: {v}")))?;
    let layout = SuperLayout::new(k0.sig(), k1.sig());
    let mut reducts = [sys.clone(), sys.clone()];
    for (p, s) in &sys.structures {
        let (l, r) = layout.split(s)?;
        reducts[0].structures.insert(*p, l);
        reducts[1].structures.insert(*p, r);
    }
    let mut tops = Vec::new();
    for (t, (red, k)) in reducts.iter().zip([k0, k1]).enumerate() {
        let done = complete_system(k, red, pad)?
            .ok_or_else(|| Error::Inconclusive(format!("the L{t} reduct system has no completion in {k}")))?;
        tops.push(trim(&done));
    }
    // g(a) = f_{X,n,1}(b) where X is the minimal origin of a = f_{X,n,0}(b).
    let n0 = tops[0].top.size();
    let mut g = vec![usize::MAX; n0];
    let mut order: Vec<Subset> = tops[0].inclusions.keys().copied().collect();
    order.sort_by_key(|p| (p.count_ones(), *p));
    for p in order {
        for (b, &a) in tops[0].inclusions[&p].iter().enumerate() {
            if g[a] == usize::MAX {
                g[a] = tops[1].inclusions[&p][b];
            }
        }
    }
    let left = tops[0].top.retag(k0.sig_arc().clone())?;
    let right = tops[1].top.retag(k1.sig_arc().clone())?;
    let joined = superpose_structures(&Superposition { left, right, aligner: g })?;
    let top = joined.retag(sys.structures[&0].sig_arc().clone())?;
    let completion = Completion { top, inclusions: tops[0].inclusions.clone() };
    let out = completion.extend(sys);
    verify_p_system(&out).map_err(|v| Error::Invalid(format!("glued system is not valid: {v}")))?;
    if !member(&ClassSpec::superpose(k0.clone(), k1.clone()), &out.structures[&((1 << sys.n) - 1)])? {
        return Err(Error::Invalid("glued top structure is not in the superposition class".into()));
    }
    Ok(out)
}

/// Restriction of a completion to the union of the images.
fn trim(c: &Completion) -> Completion {
    let mut used: Vec<usize> = c.inclusions.values().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let pos: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    Completion {
        top: c.top.pullback(&used),
        inclusions: c.inclusions.iter().map(|(&p, m)| (p, m.iter().map(|x| pos[x]).collect())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgamation::{ap_instances, base_systems, check_ap_instance, transitivity_system};
    use crate::classes::Builtin;

    fn sets() -> ClassSpec {
        ClassSpec::sets()
    }

    #[test]
    fn lex_sets_sets_merges_one_class() {
        let e = ClassSpec::lex(sets(), sets());
        let class = |n: usize| lex_structure(&LexAssembly::uniform(&Structure::plain(n), &Structure::plain(1))).unwrap();
        let inst = AmalgInstance::new(class(1), class(2), class(2), vec![0], vec![0]).unwrap();
        let am = lex_amalgam_builder(&inst, &sets(), &sets(), FactorBounds::default()).unwrap();
        assert_eq!(am.c.size(), 2);
        let strong = lex_strong_amalgam_builder(&inst, &sets(), &sets(), FactorBounds::default()).unwrap();
        assert_eq!(strong.c.size(), 3);
        assert_eq!(strong.c.tuple_count(0), 9);
        assert!(check_ap_instance(&e, &inst, 3, true).unwrap().amalgam().is_some());
    }

    #[test]
    fn lex_builders_agree_with_direct_search() {
        let lo = ClassSpec::builtin(Builtin::LinearOrders);
        for (k0, k1) in [(sets(), sets()), (lo.clone(), lo.clone()), (ClassSpec::graphs(), lo)] {
            let k = ClassSpec::lex(k0.clone(), k1.clone());
            for inst in ap_instances(&k, 2).unwrap() {
                let direct = check_ap_instance(&k, &inst, 4, true).unwrap();
                assert!(direct.amalgam().is_some());
                let am = lex_strong_amalgam_builder(&inst, &k0, &k1, FactorBounds::default()).unwrap();
                assert!(verify_amalgam(&k, &inst, &am, true).unwrap());
                let am = lex_amalgam_builder(&inst, &k0, &k1, FactorBounds::default()).unwrap();
                assert!(verify_amalgam(&k, &inst, &am, false).unwrap());
            }
        }
    }

    #[test]
    fn lex_of_empty_base_is_a_disjoint_union() {
        let k0 = ClassSpec::graphs();
        let b0 = lex_structure(&LexAssembly::uniform(&Structure::graph(2, &[(0, 1)]), &Structure::plain(1))).unwrap();
        let b1 = lex_structure(&LexAssembly::uniform(&Structure::graph(1, &[]), &Structure::plain(1))).unwrap();
        let inst = AmalgInstance::joint(b0, b1);
        let am = lex_strong_amalgam_builder(&inst, &k0, &sets(), FactorBounds::default()).unwrap();
        assert_eq!(am.c.size(), 3);
    }

    #[test]
    fn full_builder_verifies_but_is_not_strong_on_the_antidiagonal() {
        let k = ClassSpec::full(sets(), sets());
        let inst = crate::amalgamation::ap::tests::antidiagonal_instance();
        let am = full_amalgam_builder(&inst, &sets(), &sets(), FactorBounds::default()).unwrap();
        assert!(verify_amalgam(&k, &inst, &am, false).unwrap());
        assert!(!verify_amalgam(&k, &inst, &am, true).unwrap());
    }

    #[test]
    fn full_builder_on_small_instances() {
        let (k0, k1) = (ClassSpec::graphs(), sets());
        let k = ClassSpec::full(k0.clone(), k1.clone());
        for inst in ap_instances(&k, 2).unwrap() {
            let am = full_amalgam_builder(&inst, &k0, &k1, FactorBounds::default()).unwrap();
            assert!(verify_amalgam(&k, &inst, &am, false).unwrap());
        }
    }

    #[test]
    fn superposition_systems_complete() {
        for (k0, k1) in [
            (ClassSpec::graphs(), ClassSpec::graphs()),
            (ClassSpec::builtin(Builtin::Tournaments), ClassSpec::graphs()),
        ] {
            let k = ClassSpec::superpose(k0.clone(), k1.clone());
            for sys in base_systems(&k, 3, 1).unwrap() {
                let done = super_n_amalgam_builder(&sys, &k0, &k1, 0).unwrap();
                assert_eq!(verify_p_system(&done), Ok(()));
            }
        }
    }

    #[test]
    fn unsolvable_reduct_is_reported() {
        let lo = ClassSpec::builtin(Builtin::LinearOrders);
        let g = ClassSpec::graphs();
        let k = ClassSpec::superpose(lo.clone(), g.clone());
        let order = transitivity_system(&lo, "E").unwrap();
        let layout = SuperLayout::new(lo.sig(), g.sig());
        let mut sys = order.clone();
        for (p, s) in &order.structures {
            let mut t = Structure::new(layout.sig.clone(), s.size());
            for tup in s.tuples(0) {
                t.set(0, &tup, true);
            }
            sys.structures.insert(*p, t);
        }
        assert_eq!(sys.structures[&0].sig(), k.sig());
        let err = super_n_amalgam_builder(&sys, &lo, &g, 0).unwrap_err();
        assert!(matches!(err, Error::Inconclusive(_)));
    }
}
