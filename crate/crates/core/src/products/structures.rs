use std::sync::Arc;

use itertools::Itertools;

use super::layout::{FullLayout, LexLayout, SuperLayout};
use crate::error::{Error, Result};
use crate::kernel::{Signature, Structure};

/// Fibres `A_b` over a base `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexAssembly {
    pub l0: Arc<Signature>,
    pub base: Structure,
    pub fibers: Vec<Structure>,
}

impl LexAssembly {
    /// Every fibre equal to `fiber`.
    pub fn uniform(fiber: &Structure, base: &Structure) -> LexAssembly {
        LexAssembly { l0: fiber.sig_arc().clone(), base: base.clone(), fibers: vec![fiber.clone(); base.size()] }
    }

    pub fn layout(&self) -> LexLayout {
        LexLayout::new(&self.l0, self.base.sig())
    }

    /// `(b, a)` for each element of the product, in element order.
    pub fn coordinates(&self) -> Vec<(usize, usize)> {
        self.fibers.iter().enumerate().flat_map(|(b, f)| (0..f.size()).map(move |a| (b, a))).collect()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.fibers.len());
        let mut acc = 0;
        for f in &self.fibers {
            out.push(acc);
            acc += f.size();
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.fibers.len() != self.base.size() {
            return Err(Error::Invalid(format!(
                "{} fibres over a base of size {}",
                self.fibers.len(),
                self.base.size()
            )));
        }
        if let Some(f) = self.fibers.iter().find(|f| f.sig() != &*self.l0) {
            return Err(Error::SignatureMismatch(format!("fibre over {} in an assembly over {}", f.sig(), self.l0)));
        }
        Ok(())
    }
}

/// The lexicographic product `⊔_b A_b`, elements sorted by `(b, a)`.
pub fn lex_structure(asm: &LexAssembly) -> Result<Structure> {
    asm.validate()?;
    let layout = asm.layout();
    let offsets = asm.offsets();
    let n: usize = asm.fibers.iter().map(|f| f.size()).sum();
    let mut s = Structure::new(layout.sig.clone(), n);
    let fiber_elems: Vec<Vec<usize>> =
        asm.fibers.iter().zip(&offsets).map(|(f, &o)| (o..o + f.size()).collect()).collect();
    for (b, f) in asm.fibers.iter().enumerate() {
        for r in 0..f.sig().len() {
            for t in f.tuples(r) {
                let image: Vec<usize> = t.iter().map(|&a| offsets[b] + a).collect();
                s.set(r, &image, true);
            }
        }
        for x in &fiber_elems[b] {
            for y in &fiber_elems[b] {
                s.set(layout.e(), &[*x, *y], true);
            }
        }
    }
    let l1 = layout.l1_symbols();
    for (r, &target) in l1.iter().enumerate() {
        for t in asm.base.tuples(r) {
            for image in t.iter().map(|&b| fiber_elems[b].iter().copied()).multi_cartesian_product() {
                s.set(target, &image, true);
            }
        }
    }
    Ok(s)
}

/// Pair of structures whose full product is formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullAssembly {
    pub left: Structure,
    pub right: Structure,
}

impl FullAssembly {
    pub fn layout(&self) -> FullLayout {
        FullLayout::new(self.left.sig(), self.right.sig())
    }

    pub fn element(&self, a: usize, b: usize) -> usize {
        a * self.right.size() + b
    }
}

/// `A ⊠ B` on `A × B`, element `(a, b)` numbered `a·|B| + b`.
pub fn full_structure(asm: &FullAssembly) -> Structure {
    let layout = asm.layout();
    let (na, nb) = (asm.left.size(), asm.right.size());
    let mut s = Structure::new(layout.sig.clone(), na * nb);
    for r in 0..asm.left.sig().len() {
        for t in asm.left.tuples(r) {
            for bs in (0..t.len()).map(|_| 0..nb).multi_cartesian_product() {
                let image: Vec<usize> = t.iter().zip(&bs).map(|(&a, &b)| asm.element(a, b)).collect();
                s.set(r, &image, true);
            }
        }
    }
    let off = asm.left.sig().len();
    for r in 0..asm.right.sig().len() {
        for t in asm.right.tuples(r) {
            for as_ in (0..t.len()).map(|_| 0..na).multi_cartesian_product() {
                let image: Vec<usize> = as_.iter().zip(&t).map(|(&a, &b)| asm.element(a, b)).collect();
                s.set(off + r, &image, true);
            }
        }
    }
    for a in 0..na {
        for b in 0..nb {
            for a2 in 0..na {
                s.set(layout.e1(), &[asm.element(a, b), asm.element(a2, b)], true);
            }
            for b2 in 0..nb {
                s.set(layout.e0(), &[asm.element(a, b), asm.element(a, b2)], true);
            }
        }
    }
    s
}

/// Two structures and a bijection `aligner: left → right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Superposition {
    pub left: Structure,
    pub right: Structure,
    pub aligner: Vec<usize>,
}

/// Structure on the universe of `left` carrying `left`'s relations and the
/// relations of `right` pulled back along the aligner.
pub fn superpose_structures(sup: &Superposition) -> Result<Structure> {
    let n = sup.left.size();
    if sup.right.size() != n || sup.aligner.len() != n {
        return Err(Error::Invalid(format!(
            "superposition of sizes {} and {} with an aligner of length {}",
            n,
            sup.right.size(),
            sup.aligner.len()
        )));
    }
    let mut seen = vec![false; n];
    for &y in &sup.aligner {
        if y >= n || std::mem::replace(&mut seen[y], true) {
            return Err(Error::Invalid("aligner is not a bijection".into()));
        }
    }
    let layout = SuperLayout::new(sup.left.sig(), sup.right.sig());
    let pulled = sup.right.pullback(&sup.aligner);
    let mut s = Structure::new(layout.sig.clone(), n);
    for r in 0..sup.left.sig().len() {
        for t in sup.left.tuples(r) {
            s.set(r, &t, true);
        }
    }
    let off = sup.left.sig().len();
    for r in 0..pulled.sig().len() {
        for t in pulled.tuples(r) {
            s.set(off + r, &t, true);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::is_isomorphic;

    #[test]
    fn lex_of_points_is_equality() {
        let asm = LexAssembly::uniform(&Structure::plain(1), &Structure::plain(3));
        let s = lex_structure(&asm).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.tuples(0), vec![vec![0, 0], vec![1, 1], vec![2, 2]]);
    }

    #[test]
    fn sets_lex_sets_is_two_classes() {
        let s = lex_structure(&LexAssembly::uniform(&Structure::plain(2), &Structure::plain(2))).unwrap();
        let expected: Vec<Vec<usize>> =
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 2], vec![2, 3], vec![3, 2], vec![3, 3]];
        assert_eq!(s.tuples(0), expected);
    }

    #[test]
    fn lex_size_is_sum_of_fibres() {
        let asm = LexAssembly {
            l0: Arc::new(Signature::binary("E")),
            base: Structure::digraph(3, &[(0, 1)]),
            fibers: vec![Structure::graph(2, &[(0, 1)]), Structure::graph(0, &[]), Structure::graph(3, &[])],
        };
        let s = lex_structure(&asm).unwrap();
        assert_eq!(s.size(), 5);
        assert_eq!(s.sig().to_string(), "{E_0/2, E_1/2, E/2}");
        // Base arc 0→1 with an empty fibre over 1 contributes nothing.
        assert_eq!(s.tuple_count(1), 0);
        assert_eq!(asm.coordinates(), vec![(0, 0), (0, 1), (2, 0), (2, 1), (2, 2)]);
    }

    #[test]
    fn full_of_two_points() {
        let asm = FullAssembly { left: Structure::plain(2), right: Structure::plain(2) };
        let s = full_structure(&asm);
        assert_eq!(s.size(), 4);
        // E0: same first coordinate; E1: same second coordinate.
        assert!(s.holds(0, &[0, 1]) && !s.holds(0, &[0, 2]));
        assert!(s.holds(1, &[0, 2]) && !s.holds(1, &[0, 1]));
        assert_eq!(full_structure(&FullAssembly { left: Structure::plain(2), right: Structure::plain(0) }).size(), 0);
    }

    #[test]
    fn full_reads_left_relations_off_first_coordinates() {
        let asm = FullAssembly { left: Structure::graph(2, &[(0, 1)]), right: Structure::plain(2) };
        let s = full_structure(&asm);
        for (x, y) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert!(s.holds(0, &[x, y]));
        }
        assert!(!s.holds(0, &[0, 1]));
    }

    #[test]
    fn superposition_reducts() {
        let lo = Structure::digraph(2, &[(0, 1)]).retag(Arc::new(Signature::binary("L"))).unwrap();
        let sup = Superposition { left: Structure::graph(2, &[(0, 1)]), right: lo.clone(), aligner: vec![1, 0] };
        let s = superpose_structures(&sup).unwrap();
        assert_eq!(s.tuple_count(0), 2);
        assert_eq!(s.tuples(1), vec![vec![1, 0]]);
        let layout = SuperLayout::new(sup.left.sig(), sup.right.sig());
        let (a, b) = layout.split(&s).unwrap();
        assert_eq!(a, sup.left);
        assert!(is_isomorphic(&b, &lo).unwrap());
        assert!(superpose_structures(&Superposition { aligner: vec![0, 0], ..sup }).is_err());
    }
}
