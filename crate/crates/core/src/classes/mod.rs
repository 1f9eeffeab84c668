//! Decidable, isomorphism-closed classes of finite structures.

mod builtin;
mod enumerate;
mod extend;
mod planar;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{canonical_form, embeds, Signature, Structure};
use crate::products::{decompose_full_membership, is_lex_member, FullLayout, LexLayout, SuperLayout};

pub use enumerate::{
    all_structures, check_hereditary, enumerate_members, enumerate_members_with_limit, enumeration_limit, singleton_census,
    HereditaryVerdict,
};
pub use extend::{for_each_extension, one_point_extensions, Known};
pub use planar::{is_planar, PLANARITY_SOFT_LIMIT};

/// The named classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Sets,
    Graphs,
    Hypergraphs(usize),
    LinearOrders,
    EquivalenceRelations,
    PartialOrders,
    Tournaments,
    Digraphs,
    Forests,
    PlanarGraphs,
    UnaryAll,
    UnaryAtMostOne,
}

impl Builtin {
    pub const ALL_NAMES: [&'static str; 12] = [
        "sets",
        "graphs",
        "hypergraphs",
        "linear_orders",
        "equivalence_relations",
        "partial_orders",
        "tournaments",
        "digraphs",
        "forests",
        "planar_graphs",
        "unary_all",
        "unary_at_most_one",
    ];

    /// Parses a builtin name; `hypergraphs` takes a uniformity `param ≥ 2`.
    pub fn parse(name: &str, param: Option<usize>) -> Result<Builtin> {
        let b = match (name, param) {
            ("sets", None) => Builtin::Sets,
            ("graphs", None) => Builtin::Graphs,
            ("hypergraphs", Some(k)) if k >= 2 => Builtin::Hypergraphs(k),
            ("hypergraphs", _) => {
                return Err(Error::Invalid("hypergraphs needs a uniformity k >= 2, as in hypergraphs(3)".into()))
            }
            ("linear_orders", None) => Builtin::LinearOrders,
            ("equivalence_relations", None) => Builtin::EquivalenceRelations,
            ("partial_orders", None) => Builtin::PartialOrders,
            ("tournaments", None) => Builtin::Tournaments,
            ("digraphs", None) => Builtin::Digraphs,
            ("forests", None) => Builtin::Forests,
            ("planar_graphs", None) => Builtin::PlanarGraphs,
            ("unary_all", None) => Builtin::UnaryAll,
            ("unary_at_most_one", None) => Builtin::UnaryAtMostOne,
            (n, Some(_)) if Builtin::ALL_NAMES.contains(&n) => {
                return Err(Error::Invalid(format!("builtin {n} takes no parameter")))
            }
            (n, _) => return Err(Error::Invalid(format!("unknown builtin class {n}"))),
        };
        Ok(b)
    }

    pub fn name(&self) -> String {
        match self {
            Builtin::Sets => "sets".into(),
            Builtin::Graphs => "graphs".into(),
            Builtin::Hypergraphs(k) => format!("hypergraphs({k})"),
            Builtin::LinearOrders => "linear_orders".into(),
            Builtin::EquivalenceRelations => "equivalence_relations".into(),
            Builtin::PartialOrders => "partial_orders".into(),
            Builtin::Tournaments => "tournaments".into(),
            Builtin::Digraphs => "digraphs".into(),
            Builtin::Forests => "forests".into(),
            Builtin::PlanarGraphs => "planar_graphs".into(),
            Builtin::UnaryAll => "unary_all".into(),
            Builtin::UnaryAtMostOne => "unary_at_most_one".into(),
        }
    }

    pub fn signature(&self) -> Signature {
        match self {
            Builtin::Sets => Signature::empty(),
            Builtin::Hypergraphs(k) => Signature::new([("E", *k)]).expect("valid"),
            Builtin::UnaryAll | Builtin::UnaryAtMostOne => Signature::new([("P", 1)]).expect("valid"),
            _ => Signature::binary("E"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Builtin(Builtin),
    /// Structures with no induced substructure isomorphic to a pattern.
    /// Patterns are stored as canonical forms, sorted and deduplicated.
    Forbidden(Vec<Structure>),
    Lex(Box<ClassSpec>, Box<ClassSpec>),
    Full(Box<ClassSpec>, Box<ClassSpec>),
    Super(Box<ClassSpec>, Box<ClassSpec>),
}

/// An isomorphism-closed class with decidable membership. Equality and
/// hashing ignore the label.
#[derive(Clone)]
pub struct ClassSpec {
    sig: Arc<Signature>,
    kind: ClassKind,
    label: String,
}

impl PartialEq for ClassSpec {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig && self.kind == other.kind
    }
}

impl Eq for ClassSpec {}

impl Hash for ClassSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sig.hash(state);
        self.kind.hash(state);
    }
}

impl fmt::Debug for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassSpec({})", self.label)
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl ClassSpec {
    pub fn builtin(b: Builtin) -> ClassSpec {
        ClassSpec { sig: Arc::new(b.signature()), kind: ClassKind::Builtin(b), label: b.name() }
    }

    pub fn sets() -> ClassSpec {
        ClassSpec::builtin(Builtin::Sets)
    }

    pub fn graphs() -> ClassSpec {
        ClassSpec::builtin(Builtin::Graphs)
    }

    pub fn forbidden(sig: &Signature, patterns: &[Structure]) -> Result<ClassSpec> {
        let mut forms = Vec::with_capacity(patterns.len());
        for p in patterns {
            if p.sig() != sig {
                return Err(Error::SignatureMismatch(format!("pattern over {} in a class over {}", p.sig(), sig)));
            }
            forms.push(canonical_form(p).into_structure());
        }
        forms.sort();
        forms.dedup();
        let label = format!("forbidden[{}] over {}", forms.len(), sig);
        Ok(ClassSpec { sig: Arc::new(sig.clone()), kind: ClassKind::Forbidden(forms), label })
    }

    pub fn lex(k0: ClassSpec, k1: ClassSpec) -> ClassSpec {
        let layout = LexLayout::new(&k0.sig, &k1.sig);
        let label = format!("lex({}, {})", k0.label, k1.label);
        ClassSpec { sig: layout.sig, kind: ClassKind::Lex(Box::new(k0), Box::new(k1)), label }
    }

    pub fn full(k0: ClassSpec, k1: ClassSpec) -> ClassSpec {
        let layout = FullLayout::new(&k0.sig, &k1.sig);
        let label = format!("full({}, {})", k0.label, k1.label);
        ClassSpec { sig: layout.sig, kind: ClassKind::Full(Box::new(k0), Box::new(k1)), label }
    }

    pub fn superpose(k0: ClassSpec, k1: ClassSpec) -> ClassSpec {
        let layout = SuperLayout::new(&k0.sig, &k1.sig);
        let label = format!("super({}, {})", k0.label, k1.label);
        ClassSpec { sig: layout.sig, kind: ClassKind::Super(Box::new(k0), Box::new(k1)), label }
    }

    /// Union of the class of `R0`-graphs and the class of `R1`-graphs over
    /// `{R0/2, R1/2}`: both relations symmetric and irreflexive, and never
    /// both nonempty. It lacks the joint embedding property.
    pub fn two_graph_union() -> ClassSpec {
        let sig = Signature::new([("R0", 2), ("R1", 2)]).expect("valid");
        let graphlike = |s: &Structure| {
            (0..2).all(|r| (0..s.size()).all(|x| !s.holds(r, &[x, x])))
                && (0..2).all(|r| s.tuples(r).iter().all(|t| s.holds(r, &[t[1], t[0]])))
        };
        let both = |s: &Structure| s.tuple_count(0) > 0 && s.tuple_count(1) > 0;
        let mut patterns = Vec::new();
        for s in all_structures(&sig, 1) {
            if !graphlike(&s) {
                patterns.push(s);
            }
        }
        for s in all_structures(&sig, 2) {
            let loopless = (0..2).all(|r| !s.holds(r, &[0, 0]) && !s.holds(r, &[1, 1]));
            if loopless && !graphlike(&s) {
                patterns.push(s);
            }
        }
        // Symmetric loopless structures: each pair carries a subset of {R0, R1}.
        for n in 2..=4 {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|y| (0..y).map(move |x| (x, y))).collect();
            for code in 0..1usize << (2 * pairs.len()) {
                let mut s = Structure::new(Arc::new(sig.clone()), n);
                for (i, &(x, y)) in pairs.iter().enumerate() {
                    for r in 0..2 {
                        if code >> (2 * i + r) & 1 == 1 {
                            s.set(r, &[x, y], true);
                            s.set(r, &[y, x], true);
                        }
                    }
                }
                if !both(&s) {
                    continue;
                }
                let minimal = (0..n).all(|drop| {
                    let rest: Vec<usize> = (0..n).filter(|&x| x != drop).collect();
                    !both(&s.pullback(&rest))
                });
                if minimal {
                    patterns.push(s);
                }
            }
        }
        ClassSpec::forbidden(&sig, &patterns).expect("patterns over the class signature").with_label("r0_or_r1_graphs")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> ClassSpec {
        self.label = label.into();
        self
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn sig_arc(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Every class buildable here has the hereditary property.
    pub fn is_hereditary(&self) -> bool {
        true
    }

    /// `Some(d)` when membership is decided by the induced substructures
    /// of size at most `d`.
    pub(crate) fn locality(&self) -> Option<usize> {
        match &self.kind {
            ClassKind::Builtin(b) => match b {
                Builtin::Sets | Builtin::UnaryAll => Some(1),
                Builtin::Graphs | Builtin::Tournaments | Builtin::Digraphs | Builtin::UnaryAtMostOne => Some(2),
                Builtin::LinearOrders | Builtin::EquivalenceRelations | Builtin::PartialOrders => Some(3),
                Builtin::Hypergraphs(k) => Some(*k),
                Builtin::Forests | Builtin::PlanarGraphs => None,
            },
            ClassKind::Forbidden(ps) => Some(ps.iter().map(|p| p.size()).max().unwrap_or(0)),
            ClassKind::Super(a, b) => Some(a.locality()?.max(b.locality()?)),
            ClassKind::Lex(..) | ClassKind::Full(..) => None,
        }
    }
}

/// Membership test.
pub fn contains(k: &ClassSpec, s: &Structure) -> Result<bool> {
    if s.sig() != k.sig() {
        return Err(Error::SignatureMismatch(format!("structure over {} tested against a class over {}", s.sig(), k.sig())));
    }
    member(k, s)
}

pub(crate) fn member(k: &ClassSpec, s: &Structure) -> Result<bool> {
    match &k.kind {
        ClassKind::Builtin(b) => builtin::member(*b, s),
        ClassKind::Forbidden(patterns) => {
            for p in patterns {
                if embeds(p, s)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ClassKind::Lex(k0, k1) => is_lex_member(s, k0, k1),
        ClassKind::Full(k0, k1) => decompose_full_membership(s, k0, k1),
        ClassKind::Super(k0, k1) => {
            let layout = SuperLayout::new(&k0.sig, &k1.sig);
            let (a, b) = layout.split(s)?;
            Ok(member(k0, &a)? && member(k1, &b)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_round_trip() {
        for name in Builtin::ALL_NAMES {
            let param = (name == "hypergraphs").then_some(3);
            let b = Builtin::parse(name, param).unwrap();
            assert!(b.name().starts_with(name));
        }
        assert!(Builtin::parse("hypergraphs", None).is_err());
        assert!(Builtin::parse("graphs", Some(2)).is_err());
        assert!(Builtin::parse("nope", None).is_err());
    }

    #[test]
    fn lex_signature_renames_clashing_edge_symbols() {
        let k = ClassSpec::lex(ClassSpec::builtin(Builtin::LinearOrders), ClassSpec::builtin(Builtin::LinearOrders));
        assert_eq!(k.sig().to_string(), "{E_0/2, E_1/2, E/2}");
        let f = ClassSpec::full(ClassSpec::sets(), ClassSpec::sets());
        assert_eq!(f.sig().to_string(), "{E0/2, E1/2}");
    }

    #[test]
    fn two_graph_union_membership() {
        let k = ClassSpec::two_graph_union();
        let sig = k.sig().clone();
        let r0 = Structure::from_tuples(&sig, 2, &[("R0", &[&[0, 1], &[1, 0]])]).unwrap();
        let r1 = Structure::from_tuples(&sig, 2, &[("R1", &[&[0, 1], &[1, 0]])]).unwrap();
        let both = Structure::from_tuples(&sig, 4, &[("R0", &[&[0, 1], &[1, 0]]), ("R1", &[&[2, 3], &[3, 2]])]).unwrap();
        let asym = Structure::from_tuples(&sig, 2, &[("R0", &[&[0, 1]])]).unwrap();
        assert!(contains(&k, &r0).unwrap());
        assert!(contains(&k, &r1).unwrap());
        assert!(!contains(&k, &both).unwrap());
        assert!(!contains(&k, &asym).unwrap());
        // Brute-force agreement with the defining condition on size 3.
        for s in all_structures(&sig, 3) {
            let sym_irr = (0..2).all(|r| {
                (0..3).all(|x| !s.holds(r, &[x, x])) && s.tuples(r).iter().all(|t| s.holds(r, &[t[1], t[0]]))
            });
            let expected = sym_irr && (s.tuple_count(0) == 0 || s.tuple_count(1) == 0);
            assert_eq!(contains(&k, &s).unwrap(), expected, "{s}");
        }
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        assert!(contains(&ClassSpec::graphs(), &Structure::plain(2)).is_err());
    }
}
