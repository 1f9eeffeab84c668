use super::planar::{is_planar, PLANARITY_SOFT_LIMIT};
use super::Builtin;
use crate::error::{Error, Result};
use crate::kernel::Structure;

pub(super) fn member(b: Builtin, s: &Structure) -> Result<bool> {
    let n = s.size();
    let e = |x: usize, y: usize| s.holds(0, &[x, y]);
    let irreflexive = || (0..n).all(|x| !e(x, x));
    let symmetric = || (0..n).all(|x| (0..x).all(|y| e(x, y) == e(y, x)));
    let transitive = || {
        (0..n).all(|x| (0..n).all(|y| !e(x, y) || (0..n).all(|z| !e(y, z) || e(x, z))))
    };
    Ok(match b {
        Builtin::Sets | Builtin::UnaryAll => true,
        Builtin::UnaryAtMostOne => s.tuple_count(0) <= 1,
        Builtin::Graphs => irreflexive() && symmetric(),
        Builtin::Digraphs => irreflexive(),
        Builtin::Tournaments => irreflexive() && (0..n).all(|x| (0..x).all(|y| e(x, y) != e(y, x))),
        Builtin::PartialOrders => irreflexive() && transitive(),
        Builtin::LinearOrders => {
            irreflexive() && transitive() && (0..n).all(|x| (0..x).all(|y| e(x, y) || e(y, x)))
        }
        Builtin::EquivalenceRelations => (0..n).all(|x| e(x, x)) && symmetric() && transitive(),
        Builtin::Forests => irreflexive() && symmetric() && acyclic(s),
        Builtin::PlanarGraphs => {
            if n > PLANARITY_SOFT_LIMIT {
                return Err(Error::Limit(format!(
                    "planarity requested for {n} vertices (soft limit {PLANARITY_SOFT_LIMIT})"
                )));
            }
            irreflexive() && symmetric() && is_planar(n, &edges(s))
        }
        Builtin::Hypergraphs(k) => hypergraph(s, k),
    })
}

pub(super) fn edges(s: &Structure) -> Vec<(usize, usize)> {
    s.tuples(0).into_iter().filter(|t| t[0] < t[1]).map(|t| (t[0], t[1])).collect()
}

fn acyclic(s: &Structure) -> bool {
    let mut parent: Vec<usize> = (0..s.size()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges(s) {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

/// Every tuple has distinct entries, and the relation is closed under
/// permuting entries.
fn hypergraph(s: &Structure, k: usize) -> bool {
    s.tuples(0).iter().all(|t| {
        let mut sorted = t.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        // Closure under adjacent transpositions generates all permutations.
        (0..k - 1).all(|i| {
            let mut u = t.clone();
            u.swap(i, i + 1);
            s.holds(0, &u)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Signature;

    fn cycle(n: usize) -> Structure {
        Structure::graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    #[test]
    fn forest_rejects_five_cycle() {
        assert!(!member(Builtin::Forests, &cycle(5)).unwrap());
        assert!(member(Builtin::Forests, &Structure::graph(5, &[(0, 1), (1, 2), (3, 4)])).unwrap());
    }

    #[test]
    fn tournament_rejects_two_cycle() {
        assert!(!member(Builtin::Tournaments, &Structure::digraph(2, &[(0, 1), (1, 0)])).unwrap());
        assert!(member(Builtin::Tournaments, &Structure::digraph(3, &[(0, 1), (1, 2), (2, 0)])).unwrap());
    }

    #[test]
    fn orders_and_equivalences() {
        let lo = Structure::digraph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(member(Builtin::LinearOrders, &lo).unwrap());
        assert!(member(Builtin::PartialOrders, &lo).unwrap());
        let po = Structure::digraph(3, &[(0, 1), (0, 2)]);
        assert!(!member(Builtin::LinearOrders, &po).unwrap());
        assert!(member(Builtin::PartialOrders, &po).unwrap());
        assert!(!member(Builtin::PartialOrders, &Structure::digraph(3, &[(0, 1), (1, 2)])).unwrap());
        let eq = Structure::digraph(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)]);
        assert!(member(Builtin::EquivalenceRelations, &eq).unwrap());
        assert!(!member(Builtin::EquivalenceRelations, &Structure::digraph(1, &[])).unwrap());
    }

    #[test]
    fn hypergraph_membership() {
        let sig = Signature::new([("E", 3)]).unwrap();
        let perms: [&[usize]; 6] = [&[0, 1, 2], &[0, 2, 1], &[1, 0, 2], &[1, 2, 0], &[2, 0, 1], &[2, 1, 0]];
        let edge = Structure::from_tuples(&sig, 3, &[("E", &perms)]).unwrap();
        assert!(member(Builtin::Hypergraphs(3), &edge).unwrap());
        let partial = Structure::from_tuples(&sig, 3, &[("E", &perms[..5])]).unwrap();
        assert!(!member(Builtin::Hypergraphs(3), &partial).unwrap());
        let degenerate = Structure::from_tuples(&sig, 2, &[("E", &[&[0, 0, 1]])]).unwrap();
        assert!(!member(Builtin::Hypergraphs(3), &degenerate).unwrap());
    }

    #[test]
    fn unary_at_most_one() {
        let sig = Signature::new([("P", 1)]).unwrap();
        let two = Structure::from_tuples(&sig, 2, &[("P", &[&[0], &[1]])]).unwrap();
        assert!(!member(Builtin::UnaryAtMostOne, &two).unwrap());
        assert!(member(Builtin::UnaryAll, &two).unwrap());
    }
}
