use std::collections::HashSet;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::classes::{enumerate_members, for_each_extension, member, ClassSpec, Known};
use crate::error::{Error, Result};
use crate::kernel::{check_same_sig, compose, enumerate_automorphisms, enumerate_embeddings, is_embedding, tuples_over, Map, Structure};
use crate::verdict::Verdict;

/// An amalgamation problem: `f0: a → b0` and `f1: a → b1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmalgInstance {
    pub a: Structure,
    pub b0: Structure,
    pub b1: Structure,
    pub f0: Map,
    pub f1: Map,
}

impl AmalgInstance {
    pub fn new(a: Structure, b0: Structure, b1: Structure, f0: Map, f1: Map) -> Result<AmalgInstance> {
        let inst = AmalgInstance { a, b0, b1, f0, f1 };
        inst.validate()?;
        Ok(inst)
    }

    /// Both maps go from `a`, so an empty `a` gives a joint-embedding problem.
    pub fn joint(b0: Structure, b1: Structure) -> AmalgInstance {
        let a = Structure::new(b0.sig_arc().clone(), 0);
        AmalgInstance { a, b0, b1, f0: Vec::new(), f1: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        check_same_sig(&self.a, &self.b0)?;
        check_same_sig(&self.a, &self.b1)?;
        for (f, b, name) in [(&self.f0, &self.b0, "f0"), (&self.f1, &self.b1, "f1")] {
            if f.len() != self.a.size() || f.iter().any(|&x| x >= b.size()) || !is_embedding(&self.a, b, f) {
                return Err(Error::Invalid(format!("{name} is not an embedding")));
            }
        }
        Ok(())
    }
}

/// `C` with `g0: b0 → C` and `g1: b1 → C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgam {
    pub c: Structure,
    pub g0: Map,
    pub g1: Map,
}

/// The amalgam equations: `C ∈ k`, both maps are embeddings, the square
/// commutes and, when `strong`, the images meet exactly in the image of `a`.
pub fn verify_amalgam(k: &ClassSpec, inst: &AmalgInstance, am: &Amalgam, strong: bool) -> Result<bool> {
    if am.c.sig() != k.sig() || !member(k, &am.c)? {
        return Ok(false);
    }
    let valid = |g: &Map, b: &Structure| g.len() == b.size() && g.iter().all(|&x| x < am.c.size());
    if !valid(&am.g0, &inst.b0) || !valid(&am.g1, &inst.b1) {
        return Ok(false);
    }
    if !is_embedding(&inst.b0, &am.c, &am.g0) || !is_embedding(&inst.b1, &am.c, &am.g1) {
        return Ok(false);
    }
    if compose(&inst.f0, &am.g0) != compose(&inst.f1, &am.g1) {
        return Ok(false);
    }
    if strong {
        let img0: HashSet<usize> = am.g0.iter().copied().collect();
        let common = am.g1.iter().filter(|x| img0.contains(x)).count();
        if common != inst.a.size() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmalgamSearch {
    Found(Amalgam),
    /// No amalgam on any candidate universe of at most `host` points. When
    /// `exhaustive`, every identification pattern fit under the bound, so
    /// for a hereditary class no amalgam exists at all.
    NoneUpToBound { exhaustive: bool },
}

impl AmalgamSearch {
    pub fn amalgam(&self) -> Option<&Amalgam> {
        match self {
            AmalgamSearch::Found(a) => Some(a),
            AmalgamSearch::NoneUpToBound { .. } => None,
        }
    }
}

/// First member of `k` on `0..n` agreeing with `known`, grown one point at a
/// time. Exact for hereditary classes.
pub(crate) fn complete(k: &ClassSpec, n: usize, known: Known) -> Result<Option<Structure>> {
    fn grow(k: &ClassSpec, t: &Structure, n: usize, known: Known, out: &mut Option<Structure>) -> Result<()> {
        if t.size() == n {
            *out = Some(t.clone());
            return Ok(());
        }
        let mut failure = None;
        for_each_extension(k, t, Some(known), &mut |e| match grow(k, e, n, known, out) {
            Err(err) => {
                failure = Some(err);
                ControlFlow::Break(())
            }
            Ok(()) if out.is_some() => ControlFlow::Break(()),
            Ok(()) => ControlFlow::Continue(()),
        })?;
        failure.map_or(Ok(()), Err)
    }
    let mut out = None;
    grow(k, &Structure::new(k.sig_arc().clone(), 0), n, known, &mut out)?;
    Ok(out)
}

/// Partial injections `rest1 → rest0`, most identifications first.
pub(crate) fn identifications(m0: usize, m1: usize) -> Vec<Vec<Option<usize>>> {
    fn rec(i: usize, m0: usize, m1: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == m1 {
            out.push(cur.clone());
            return;
        }
        for j in 0..m0 {
            if !used[j] {
                used[j] = true;
                cur.push(Some(j));
                rec(i + 1, m0, m1, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
        cur.push(None);
        rec(i + 1, m0, m1, used, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, m0, m1, &mut vec![false; m0], &mut Vec::new(), &mut out);
    out.sort_by_key(|m| std::cmp::Reverse(m.iter().filter(|x| x.is_some()).count()));
    out
}

/// Searches for an amalgam on candidate universes of at most `host` points,
/// smallest first. A candidate universe is the union of the two images:
/// the image of `a`, the rest of `b0`, and the rest of `b1` with some of its
/// points identified with points of `b0` (none when `strong`).
pub fn check_ap_instance(k: &ClassSpec, inst: &AmalgInstance, host: usize, strong: bool) -> Result<AmalgamSearch> {
    inst.validate()?;
    if inst.a.sig() != k.sig() {
        return Err(Error::SignatureMismatch(format!("instance over {} for a class over {}", inst.a.sig(), k.sig())));
    }
    let na = inst.a.size();
    let rest0: Vec<usize> = (0..inst.b0.size()).filter(|x| !inst.f0.contains(x)).collect();
    let rest1: Vec<usize> = (0..inst.b1.size()).filter(|x| !inst.f1.contains(x)).collect();
    let patterns = if strong { vec![vec![None; rest1.len()]] } else { identifications(rest0.len(), rest1.len()) };
    let mut exhaustive = true;
    for pattern in patterns {
        let matched = pattern.iter().filter(|x| x.is_some()).count();
        let n = na + rest0.len() + rest1.len() - matched;
        if n > host {
            exhaustive = false;
            continue;
        }
        let mut g0 = vec![0; inst.b0.size()];
        for (i, &x) in inst.f0.iter().enumerate() {
            g0[x] = i;
        }
        for (j, &x) in rest0.iter().enumerate() {
            g0[x] = na + j;
        }
        let mut g1 = vec![0; inst.b1.size()];
        for (i, &x) in inst.f1.iter().enumerate() {
            g1[x] = i;
        }
        let mut next = na + rest0.len();
        for (&x, m) in rest1.iter().zip(&pattern) {
            g1[x] = match m {
                Some(j) => na + j,
                None => {
                    next += 1;
                    next - 1
                }
            };
        }
        let Some(am) = complete_square(k, inst, n, g0, g1)? else { continue };
        return Ok(AmalgamSearch::Found(am));
    }
    Ok(AmalgamSearch::NoneUpToBound { exhaustive })
}

fn complete_square(k: &ClassSpec, inst: &AmalgInstance, n: usize, g0: Map, g1: Map) -> Result<Option<Amalgam>> {
    let mut inv0 = vec![None; n];
    for (b, &c) in g0.iter().enumerate() {
        inv0[c] = Some(b);
    }
    let mut inv1 = vec![None; n];
    for (b, &c) in g1.iter().enumerate() {
        inv1[c] = Some(b);
    }
    // The two sides must agree on their overlap.
    let overlap: Vec<usize> = (0..n).filter(|&c| inv0[c].is_some() && inv1[c].is_some()).collect();
    for r in 0..k.sig().len() {
        for t in tuples_over(overlap.len(), k.sig().arity(r)) {
            let t0: Vec<usize> = t.iter().map(|&i| inv0[overlap[i]].expect("overlap")).collect();
            let t1: Vec<usize> = t.iter().map(|&i| inv1[overlap[i]].expect("overlap")).collect();
            if inst.b0.holds(r, &t0) != inst.b1.holds(r, &t1) {
                return Ok(None);
            }
        }
    }
    let lookup = |inv: &[Option<usize>], t: &[usize]| t.iter().map(|&c| inv[c]).collect::<Option<Vec<usize>>>();
    let known = |r: usize, t: &[usize]| {
        if let Some(pre) = lookup(&inv0, t) {
            return Some(inst.b0.holds(r, &pre));
        }
        lookup(&inv1, t).map(|pre| inst.b1.holds(r, &pre))
    };
    Ok(complete(k, n, &known)?.map(|c| Amalgam { c, g0, g1 }))
}

/// Embeddings `a → b`, one per orbit of `Aut(b)` acting by composition.
pub(crate) fn embedding_orbit_reps(a: &Structure, b: &Structure) -> Result<Vec<Map>> {
    let auts = enumerate_automorphisms(b);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in enumerate_embeddings(a, b)? {
        let rep = auts.iter().map(|s| compose(&f, s)).min().expect("identity");
        if seen.insert(rep.clone()) {
            out.push(rep);
        }
    }
    out.sort();
    Ok(out)
}

/// Every instance with `|b0|, |b1| ≤ base`, up to isomorphism of each factor
/// and automorphisms of `b0` and `b1`.
pub fn ap_instances(k: &ClassSpec, base: usize) -> Result<Vec<AmalgInstance>> {
    let members: Vec<Structure> =
        (0..=base).map(|n| enumerate_members(k, n).map(|v| v.to_vec())).collect::<Result<Vec<_>>>()?.concat();
    let mut out = Vec::new();
    for a in &members {
        let sides: Vec<(Structure, Map)> = members
            .iter()
            .filter(|b| b.size() >= a.size())
            .map(|b| embedding_orbit_reps(a, b).map(|fs| fs.into_iter().map(|f| (b.clone(), f)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?
            .concat();
        for (i, (b0, f0)) in sides.iter().enumerate() {
            for (b1, f1) in &sides[i..] {
                out.push(AmalgInstance { a: a.clone(), b0: b0.clone(), b1: b1.clone(), f0: f0.clone(), f1: f1.clone() });
            }
        }
    }
    Ok(out)
}

/// Exhaustive (strong) amalgamation check over [`ap_instances`]. Fails with
/// the first instance in order that has no amalgam on any candidate
/// universe; inconclusive when such an instance only ran out of host room.
pub fn check_ap(k: &ClassSpec, base: usize, host: usize, strong: bool) -> Result<Verdict<AmalgInstance>> {
    let instances = ap_instances(k, base)?;
    let results: Vec<AmalgamSearch> =
        instances.par_iter().map(|inst| check_ap_instance(k, inst, host, strong)).collect::<Result<_>>()?;
    Ok(first_failure(instances, results, |inst| format!("no amalgam within {host} points for {inst:?}")))
}

fn first_failure<C>(cases: Vec<C>, results: Vec<AmalgamSearch>, describe: impl Fn(&C) -> String) -> Verdict<C> {
    for (case, res) in cases.into_iter().zip(results) {
        match res {
            AmalgamSearch::Found(_) => {}
            AmalgamSearch::NoneUpToBound { exhaustive: true } => return Verdict::Fail(case),
            AmalgamSearch::NoneUpToBound { exhaustive: false } => return Verdict::Inconclusive(describe(&case)),
        }
    }
    Verdict::Pass
}

/// Joint embedding over all pairs of members of size at most `base`. The
/// class is hereditary, so a pair with no joint host on the union of the
/// two images has none at all and is reported as a failure.
pub fn check_jep(k: &ClassSpec, base: usize, host: usize) -> Result<Verdict<(Structure, Structure)>> {
    let members: Vec<Structure> =
        (0..=base).map(|n| enumerate_members(k, n).map(|v| v.to_vec())).collect::<Result<Vec<_>>>()?.concat();
    let pairs: Vec<(Structure, Structure)> = members
        .iter()
        .enumerate()
        .flat_map(|(i, x)| members[i..].iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let results: Vec<AmalgamSearch> = pairs
        .par_iter()
        .map(|(x, y)| check_ap_instance(k, &AmalgInstance::joint(x.clone(), y.clone()), host, false))
        .collect::<Result<_>>()?;
    Ok(first_failure(pairs, results, |(x, y)| format!("no joint host within {host} points for {x} and {y}")))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::classes::{all_structures, Builtin};
    use crate::kernel::{enumerate_embeddings, Signature};

    fn planar_instance() -> AmalgInstance {
        let a = Structure::graph(4, &[]);
        let b0 = Structure::graph(6, &[(0, 4), (0, 5), (1, 4), (1, 5), (2, 4), (2, 5)]);
        let b1 = Structure::graph(5, &[(0, 4), (1, 4), (2, 4), (3, 4)]);
        AmalgInstance::new(a, b0, b1, vec![0, 1, 2, 3], vec![0, 1, 2, 3]).unwrap()
    }

    #[test]
    fn planar_graphs_fail_ap_on_k33() {
        let k = ClassSpec::builtin(Builtin::PlanarGraphs);
        let res = check_ap_instance(&k, &planar_instance(), 11, false).unwrap();
        assert_eq!(res, AmalgamSearch::NoneUpToBound { exhaustive: true });
        // Without the planarity constraint the pushout works.
        let g = check_ap_instance(&ClassSpec::graphs(), &planar_instance(), 11, false).unwrap();
        assert!(g.amalgam().is_some());
    }

    #[test]
    fn forests_fail_ap_on_five_cycle() {
        let k = ClassSpec::builtin(Builtin::Forests);
        let a = Structure::graph(2, &[]);
        let b0 = Structure::graph(3, &[(0, 2), (2, 1)]);
        let b1 = Structure::graph(4, &[(0, 2), (2, 3), (3, 1)]);
        let inst = AmalgInstance::new(a, b0, b1, vec![0, 1], vec![0, 1]).unwrap();
        assert_eq!(check_ap_instance(&k, &inst, 7, false).unwrap(), AmalgamSearch::NoneUpToBound { exhaustive: true });
    }

    #[test]
    fn graph_amalgams_are_strong_at_pushout_size() {
        let k = ClassSpec::graphs();
        for inst in ap_instances(&k, 3).unwrap() {
            let res = check_ap_instance(&k, &inst, 6, false).unwrap();
            let am = res.amalgam().expect("graphs amalgamate");
            assert!(verify_amalgam(&k, &inst, am, false).unwrap());
            let strong = check_ap_instance(&k, &inst, 6, true).unwrap();
            let am = strong.amalgam().expect("graphs amalgamate strongly");
            assert_eq!(am.c.size(), inst.b0.size() + inst.b1.size() - inst.a.size());
            assert!(verify_amalgam(&k, &inst, am, true).unwrap());
        }
    }

    /// Brute force: some structure on at most `host` points, and embeddings
    /// forming a commuting square.
    fn oracle_has_amalgam(k: &ClassSpec, inst: &AmalgInstance, host: usize, strong: bool) -> bool {
        (0..=host).any(|n| {
            all_structures(k.sig(), n).filter(|c| member(k, c).unwrap()).any(|c| {
                let e0 = enumerate_embeddings(&inst.b0, &c).unwrap();
                let e1 = enumerate_embeddings(&inst.b1, &c).unwrap();
                e0.iter().any(|g0| {
                    e1.iter().any(|g1| {
                        verify_amalgam(k, inst, &Amalgam { c: c.clone(), g0: g0.clone(), g1: g1.clone() }, strong).unwrap()
                    })
                })
            })
        })
    }

    #[test]
    fn search_agrees_with_oracle_on_small_instances() {
        for (k, host) in [
            (ClassSpec::graphs(), 4),
            (ClassSpec::builtin(Builtin::LinearOrders), 4),
            (ClassSpec::builtin(Builtin::UnaryAtMostOne), 4),
            (ClassSpec::full(ClassSpec::sets(), ClassSpec::sets()), 3),
        ] {
            for inst in ap_instances(&k, 2).unwrap() {
                for strong in [false, true] {
                    let found = check_ap_instance(&k, &inst, host, strong).unwrap().amalgam().is_some();
                    assert_eq!(found, oracle_has_amalgam(&k, &inst, host, strong), "{k} {inst:?} strong={strong}");
                }
            }
        }
    }

    #[test]
    fn jep_verdicts() {
        assert!(check_jep(&ClassSpec::graphs(), 3, 6).unwrap().is_pass());
        let u = ClassSpec::builtin(Builtin::UnaryAtMostOne);
        let fail = check_jep(&ClassSpec::superpose(u.clone(), u), 1, 4).unwrap();
        let (x, y) = fail.failure().expect("fails").clone();
        assert_eq!((x.size(), y.size()), (1, 1));
        let two = check_jep(&ClassSpec::two_graph_union(), 2, 6).unwrap();
        let (x, y) = two.failure().expect("fails").clone();
        let mut kinds = [(x.tuple_count(0), x.tuple_count(1)), (y.tuple_count(0), y.tuple_count(1))];
        kinds.sort();
        assert_eq!(kinds, [(0, 2), (2, 0)]);
    }

    #[test]
    fn full_sets_sets_has_no_strong_amalgam_for_the_antidiagonal() {
        let k = ClassSpec::full(ClassSpec::sets(), ClassSpec::sets());
        let inst = antidiagonal_instance();
        assert_eq!(check_ap_instance(&k, &inst, 8, true).unwrap(), AmalgamSearch::NoneUpToBound { exhaustive: true });
        assert!(check_ap_instance(&k, &inst, 8, false).unwrap().amalgam().is_some());
    }

    pub(crate) fn antidiagonal_instance() -> AmalgInstance {
        use crate::products::{full_structure, FullAssembly};
        let grid = full_structure(&FullAssembly { left: Structure::plain(2), right: Structure::plain(2) });
        // Elements (0,0), (1,1) and (0,1) are numbered 0, 3 and 1.
        let a = grid.pullback(&[0, 3]);
        let b = grid.pullback(&[0, 3, 1]);
        AmalgInstance::new(a, b.clone(), b, vec![0, 1], vec![0, 1]).unwrap()
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let a = Structure::graph(2, &[(0, 1)]);
        let b = Structure::graph(2, &[]);
        assert!(AmalgInstance::new(a.clone(), b.clone(), b, vec![0, 1], vec![0, 1]).is_err());
        let other = Structure::new(std::sync::Arc::new(Signature::binary("R")), 2);
        assert!(AmalgInstance::new(a.clone(), other.clone(), other, vec![0, 1], vec![0, 1]).is_err());
    }
}
