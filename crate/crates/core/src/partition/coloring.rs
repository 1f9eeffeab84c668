use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::classes::{enumerate_members, member, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{check_same_sig, for_each_embedding, Structure};

/// A colouring of the universe of `domain` with `k` colours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub domain: Structure,
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl Coloring {
    pub fn new(domain: Structure, k: usize, assignment: Vec<usize>) -> Result<Coloring> {
        if k == 0 || assignment.len() != domain.size() || assignment.iter().any(|&c| c >= k) {
            return Err(Error::Invalid(format!(
                "{} colours over {} elements do not form a {k}-colouring of a structure of size {}",
                assignment.len(),
                assignment.len(),
                domain.size()
            )));
        }
        Ok(Coloring { domain, k, assignment })
    }

    /// True if some edge is monochromatic.
    pub fn has_monochromatic(&self, edges: &[Vec<usize>]) -> bool {
        edges.iter().any(|e| !e.is_empty() && e.iter().all(|&v| self.assignment[v] == self.assignment[e[0]]))
    }
}

/// Vertex sets of the embedded copies of `a` in `b`, sorted and deduplicated.
pub fn copy_sets(a: &Structure, b: &Structure) -> Result<Vec<Vec<usize>>> {
    let mut sets = BTreeSet::new();
    for_each_embedding(a, b, None, |f| {
        let mut s = f.to_vec();
        s.sort_unstable();
        sets.insert(s);
        ControlFlow::Continue(())
    })?;
    Ok(sets.into_iter().collect())
}

/// A `k`-colouring of `b` under which no copy of `a` is monochromatic, or
/// `None` when every `k`-colouring has one (so `b` witnesses `(a, k)`).
/// An empty copy never counts as monochromatic.
pub fn find_bad_coloring(a: &Structure, b: &Structure, k: usize) -> Result<Option<Coloring>> {
    check_same_sig(a, b)?;
    if k == 0 {
        return Err(Error::Invalid("at least one colour is needed".into()));
    }
    if a.sig().is_empty() {
        return Ok(structureless(a.size(), b, k));
    }
    let edges = copy_sets(a, b)?;
    Ok(search_coloring(b.size(), &edges, k).map(|assignment| Coloring { domain: b.clone(), k, assignment }))
}

/// Every `m`-subset is a copy: pigeonhole decides.
fn structureless(m: usize, b: &Structure, k: usize) -> Option<Coloring> {
    let n = b.size();
    let bad = match m {
        0 => true,
        1 => n == 0,
        _ => n <= k * (m - 1),
    };
    bad.then(|| {
        let assignment = (0..n).map(|v| if m >= 2 { v / (m - 1) } else { 0 }).collect();
        Coloring { domain: b.clone(), k, assignment }
    })
}

/// Backtracking over vertices, most constrained first, with the first
/// colour of the first vertex fixed. An edge whose colored vertices share
/// one colour forbids that colour on its last vertex.
pub(crate) fn search_coloring(n: usize, edges: &[Vec<usize>], k: usize) -> Option<Vec<usize>> {
    let edges: Vec<&Vec<usize>> = edges.iter().filter(|e| !e.is_empty()).collect();
    if edges.iter().any(|e| e.len() == 1) {
        return None;
    }
    let mut incident = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        for &v in e.iter() {
            incident[v].push(i);
        }
    }
    let mut colors = vec![usize::MAX; n];
    let mut used = 0;
    dfs(&edges, &incident, k, &mut colors, &mut used).then_some(colors).map(|mut c| {
        for x in c.iter_mut().filter(|x| **x == usize::MAX) {
            *x = 0;
        }
        c
    })
}

fn forbidden(edges: &[&Vec<usize>], incident: &[Vec<usize>], colors: &[usize], v: usize) -> u64 {
    let mut out = 0u64;
    for &i in &incident[v] {
        let mut shared = None;
        let mut ok = true;
        for &u in edges[i].iter().filter(|&&u| u != v) {
            let c = colors[u];
            if c == usize::MAX || shared.is_some_and(|s| s != c) {
                ok = false;
                break;
            }
            shared = Some(c);
        }
        if let (true, Some(c)) = (ok, shared) {
            out |= 1 << c;
        }
    }
    out
}

fn dfs(edges: &[&Vec<usize>], incident: &[Vec<usize>], k: usize, colors: &mut [usize], used: &mut usize) -> bool {
    let mut best: Option<(usize, u32, u64)> = None;
    for v in (0..colors.len()).filter(|&v| colors[v] == usize::MAX) {
        let f = forbidden(edges, incident, colors, v);
        let free = k as u32 - (f & ((1u64 << k) - 1)).count_ones();
        if free == 0 {
            return false;
        }
        if best.map_or(true, |(_, bf, _)| free < bf) {
            best = Some((v, free, f));
        }
    }
    let Some((v, _, f)) = best else { return true };
    // Colours beyond the first unused one are interchangeable.
    let limit = (*used + 1).min(k);
    for c in (0..limit).filter(|c| f >> c & 1 == 0) {
        colors[v] = c;
        let prev = *used;
        *used = (*used).max(c + 1);
        if dfs(edges, incident, k, colors, used) {
            return true;
        }
        *used = prev;
        colors[v] = usize::MAX;
    }
    false
}

/// Whether `b` witnesses `(a, colors)`: every colouring of `b` has a
/// monochromatic copy of `a`.
pub fn verify_indivisibility_witness(k: &ClassSpec, a: &Structure, colors: usize, b: &Structure) -> Result<bool> {
    for (name, s) in [("pattern", a), ("witness", b)] {
        if s.sig() != k.sig() || !member(k, s)? {
            return Err(Error::Invalid(format!("{name} {s} is not a member of {k}")));
        }
    }
    Ok(find_bad_coloring(a, b, colors)?.is_none())
}

/// First member of `k` of size at most `max_size`, in enumeration order,
/// that witnesses `(a, colors)`.
pub fn find_indivisibility_witness(
    k: &ClassSpec,
    a: &Structure,
    colors: usize,
    max_size: usize,
) -> Result<Option<Structure>> {
    if a.sig() != k.sig() || !member(k, a)? {
        return Err(Error::Invalid(format!("pattern {a} is not a member of {k}")));
    }
    for n in a.size()..=max_size {
        if k.sig().is_empty() {
            let b = Structure::new(k.sig_arc().clone(), n);
            if member(k, &b)? && find_bad_coloring(a, &b, colors)?.is_none() {
                return Ok(Some(b));
            }
            continue;
        }
        let members = enumerate_members(k, n)?;
        let hit = members
            .par_iter()
            .map(|b| find_bad_coloring(a, b, colors).map(|bad| bad.is_none()))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .position(|ok| ok);
        if let Some(i) = hit {
            return Ok(Some(members[i].clone()));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::Builtin;
    use itertools::Itertools;

    fn brute_bad(a: &Structure, b: &Structure, k: usize) -> bool {
        if b.size() == 0 {
            return true;
        }
        let edges = copy_sets(a, b).unwrap();
        (0..b.size()).map(|_| 0..k).multi_cartesian_product().any(|assignment| {
            let c = Coloring { domain: b.clone(), k, assignment };
            !c.has_monochromatic(&edges)
        })
    }

    fn k2() -> Structure {
        Structure::graph(2, &[(0, 1)])
    }

    #[test]
    fn small_colorings() {
        assert!(find_bad_coloring(&k2(), &Structure::graph(3, &[(0, 1), (1, 2), (0, 2)]), 2).unwrap().is_none());
        let bad = find_bad_coloring(&k2(), &k2(), 2).unwrap().unwrap();
        assert_eq!(bad.assignment, vec![0, 1]);
        let point = Structure::graph(1, &[]);
        assert!(find_bad_coloring(&point, &Structure::graph(4, &[(0, 1)]), 3).unwrap().is_none());
    }

    #[test]
    fn witnesses() {
        let g = ClassSpec::graphs();
        let k3 = Structure::graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(verify_indivisibility_witness(&g, &k2(), 2, &k3).unwrap());
        assert_eq!(find_indivisibility_witness(&g, &k2(), 2, 5).unwrap(), Some(k3));
        let sets = ClassSpec::sets();
        for (m, k) in [(2, 2), (3, 2), (2, 4)] {
            let w = find_indivisibility_witness(&sets, &Structure::plain(m), k, 20).unwrap().unwrap();
            assert_eq!(w.size(), k * (m - 1) + 1);
        }
        let forests = ClassSpec::builtin(Builtin::Forests);
        for n in 2..=7 {
            let path = Structure::graph(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
            assert!(!verify_indivisibility_witness(&forests, &k2(), 2, &path).unwrap());
        }
        assert!(verify_indivisibility_witness(&g, &Structure::plain(1), 2, &k2()).is_err());
    }

    #[test]
    fn planar_k4_has_no_small_witness() {
        let pg = ClassSpec::builtin(Builtin::PlanarGraphs);
        let k4 = Structure::graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(find_indivisibility_witness(&pg, &k4, 4, 6).unwrap(), None);
    }

    #[test]
    fn backtracking_agrees_with_brute_force() {
        let graphs = ClassSpec::graphs();
        for na in 0..=2 {
            for a in enumerate_members(&graphs, na).unwrap().iter() {
                for nb in 0..=4 {
                    for b in enumerate_members(&graphs, nb).unwrap().iter() {
                        for k in 1..=2 {
                            let found = find_bad_coloring(a, b, k).unwrap();
                            assert_eq!(found.is_some(), brute_bad(a, b, k), "{a} {b} {k}");
                            if let Some(c) = found {
                                assert!(!c.has_monochromatic(&copy_sets(a, b).unwrap()));
                            }
                        }
                    }
                }
            }
        }
    }
}
