use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use super::formula::{QfFormula, Var};
use super::witness::{verify_configuration, ConfigEntry, ConfigWitness, Interpretation};
use crate::classes::{enumerate_members, member, Builtin, ClassSpec};
use crate::error::{Error, Result};
use crate::kernel::{canonical_form, Structure};
use crate::verdict::Verdict;

/// The doubling constructions: each index `A` goes to a structure on
/// `A × 2` (element `(a, t)` numbered `2a + t`) with `f_A(a) = ((a,0), (a,1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinConfig {
    /// Digraphs into graphs.
    DgToG,
    /// Graphs into partial orders.
    GToPo,
    /// Graphs into tournaments.
    GToT,
}

impl BuiltinConfig {
    pub const ALL: [BuiltinConfig; 3] = [BuiltinConfig::DgToG, BuiltinConfig::GToPo, BuiltinConfig::GToT];

    pub fn source(self) -> ClassSpec {
        match self {
            BuiltinConfig::DgToG => ClassSpec::builtin(Builtin::Digraphs),
            BuiltinConfig::GToPo | BuiltinConfig::GToT => ClassSpec::graphs(),
        }
    }

    pub fn target(self) -> ClassSpec {
        match self {
            BuiltinConfig::DgToG => ClassSpec::graphs(),
            BuiltinConfig::GToPo => ClassSpec::builtin(Builtin::PartialOrders),
            BuiltinConfig::GToT => ClassSpec::builtin(Builtin::Tournaments),
        }
    }

    fn formula(self) -> QfFormula {
        let e = |a: Var, b: Var| QfFormula::atom(0, &[a, b]);
        let x = |i, j| Var::new(i, j);
        match self {
            BuiltinConfig::DgToG | BuiltinConfig::GToT => e(x(0, 0), x(1, 1)),
            BuiltinConfig::GToPo => QfFormula::And(vec![e(x(0, 0), x(1, 1)), e(x(1, 0), x(0, 1))]),
        }
    }

    /// The relation on `A × 2` between `(a, t)` and `(b, s)`.
    fn doubled(self, s: &Structure, (a, t): (usize, usize), (b, u): (usize, usize)) -> bool {
        let e = s.holds(0, &[a, b]);
        match self {
            BuiltinConfig::DgToG => (t == 0 && u == 1 && e) || (t == 1 && u == 0 && s.holds(0, &[b, a])),
            BuiltinConfig::GToPo => t < u && e,
            // Across levels the upward arc records the edge and the
            // downward arc its absence; within a level the smaller wins.
            BuiltinConfig::GToT => (t < u && e) || (u < t && !s.holds(0, &[b, a])) || (t == u && a < b),
        }
    }

    pub fn double(self, s: &Structure) -> Structure {
        let n = s.size();
        let mut m = Structure::new(self.target().sig_arc().clone(), 2 * n);
        for a in 0..n {
            for t in 0..2 {
                for b in 0..n {
                    for u in 0..2 {
                        if self.doubled(s, (a, t), (b, u)) {
                            m.set(0, &[2 * a + t, 2 * b + u], true);
                        }
                    }
                }
            }
        }
        m
    }
}

impl fmt::Display for BuiltinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuiltinConfig::DgToG => "dg-to-g",
            BuiltinConfig::GToPo => "g-to-po",
            BuiltinConfig::GToT => "g-to-t",
        })
    }
}

impl FromStr for BuiltinConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinConfig::ALL
            .into_iter()
            .find(|c| c.to_string() == s.replace('_', "-"))
            .ok_or_else(|| Error::Invalid(format!("unknown configuration {s}; expected dg-to-g, g-to-po or g-to-t")))
    }
}

/// The construction over every source member of size at most `max_size`,
/// with target membership and the configuration condition checked.
pub fn builtin_configuration(which: BuiltinConfig, max_size: usize) -> Result<ConfigWitness> {
    let source = which.source();
    let mut members = Vec::new();
    for n in 0..=max_size {
        members.extend(enumerate_members(&source, n)?.iter().cloned());
    }
    builtin_configuration_on(which, &members)
}

/// The construction on the given source members.
pub fn builtin_configuration_on(which: BuiltinConfig, structures: &[Structure]) -> Result<ConfigWitness> {
    let source = which.source();
    let target = which.target();
    let interp = Interpretation::new(source.sig_arc().clone(), target.sig_arc().clone(), 2, vec![which.formula()])?;
    let mut entries = Vec::new();
    for s in structures {
        if s.sig() != source.sig() || !member(&source, s)? {
            return Err(Error::Invalid(format!("{which}: {s} is not in {source}")));
        }
        let m = which.double(s);
        if !member(&target, &m)? {
            return Err(Error::Invalid(format!("{which}: doubled structure {m} is not in {target}")));
        }
        entries.push(ConfigEntry { index: s.clone(), target: m, map: (0..s.size()).map(|a| vec![2 * a, 2 * a + 1]).collect() });
    }
    let w = ConfigWitness { interp, entries };
    if let Verdict::Fail(v) = verify_configuration(&w)? {
        return Err(Error::Invalid(format!("{which}: {v}")));
    }
    Ok(w)
}

/// Whether every member of `k0` up to `size` is, up to isomorphism, the
/// reduct of a member of `k1` of the same size. Symbols of `k0` are found
/// in `k1` by name, after `renaming` (pairs `k0 name → k1 name`).
pub fn check_reductive_subclass(
    k0: &ClassSpec,
    k1: &ClassSpec,
    size: usize,
    renaming: &[(String, String)],
) -> Result<Verdict<Structure>> {
    let mut symbols = Vec::with_capacity(k0.sig().len());
    for r in 0..k0.sig().len() {
        let name = k0.sig().name(r);
        let target = renaming.iter().find(|(from, _)| from == name).map_or(name, |(_, to)| to.as_str());
        let j = k1
            .sig()
            .index_of(target)
            .ok_or_else(|| Error::SignatureMismatch(format!("{target} is not a symbol of {}", k1.sig())))?;
        if k1.sig().arity(j) != k0.sig().arity(r) {
            return Err(Error::SignatureMismatch(format!("{name} and {target} differ in arity")));
        }
        symbols.push(j);
    }
    for n in 0..=size {
        let reducts: HashSet<_> = enumerate_members(k1, n)?
            .iter()
            .map(|b| b.reduct(&symbols).retag(k0.sig_arc().clone()).map(|r| canonical_form(&r)))
            .collect::<Result<_>>()?;
        if let Some(a) = enumerate_members(k0, n)?.iter().find(|a| !reducts.contains(&canonical_form(a))) {
            return Ok(Verdict::Fail(a.clone()));
        }
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::compose_configurations;

    #[test]
    fn doubling_constructions_verify() {
        for which in BuiltinConfig::ALL {
            let w = builtin_configuration(which, 3).unwrap();
            let expected: usize = (0..=3).map(|n| enumerate_members(&which.source(), n).unwrap().len()).sum();
            assert_eq!(w.entries.len(), expected);
            assert!(w.is_injective());
            assert_eq!(which.to_string().parse::<BuiltinConfig>().unwrap(), which);
        }
    }

    #[test]
    fn two_cycle_doubles_to_two_edges() {
        let m = BuiltinConfig::DgToG.double(&Structure::digraph(2, &[(0, 1), (1, 0)]));
        assert_eq!(m.size(), 4);
        assert_eq!(m.tuple_count(0), 4);
        assert_eq!(m.tuples(0), vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
    }

    #[test]
    fn flipped_edge_is_pinpointed() {
        let mut w = builtin_configuration(BuiltinConfig::DgToG, 2).unwrap();
        let i = w.entries.iter().position(|e| e.index.tuple_count(0) == 1).unwrap();
        let e = &mut w.entries[i];
        let [x, y] = [0, 1].map(|k| e.map[e.index.tuples(0)[0][k]][k]);
        e.target.set(0, &[x, y], false);
        e.target.set(0, &[y, x], false);
        let v = verify_configuration(&w).unwrap().failure().cloned().unwrap();
        assert_eq!(v.entry, i);
        assert_eq!(v.tuple, w.entries[i].index.tuples(0)[0]);
        assert!(v.expected);
    }

    #[test]
    fn composition() {
        let outer = builtin_configuration(BuiltinConfig::DgToG, 3).unwrap();
        let targets: Vec<Structure> = outer.entries.iter().map(|e| e.target.clone()).collect();
        let inner = builtin_configuration_on(BuiltinConfig::GToPo, &targets).unwrap();
        let w = compose_configurations(&outer, &inner).unwrap();
        assert_eq!(w.interp.width, 4);
        assert_eq!(w.interp.target.to_string(), inner.interp.target.to_string());
        assert!(verify_configuration(&w).unwrap().is_pass());

        let id = ConfigWitness {
            interp: Interpretation::identity(outer.interp.target.clone()),
            entries: targets
                .iter()
                .map(|t| ConfigEntry { index: t.clone(), target: t.clone(), map: (0..t.size()).map(|a| vec![a]).collect() })
                .collect(),
        };
        let same = compose_configurations(&outer, &id).unwrap();
        assert_eq!(same.entries, outer.entries);
        assert!(verify_configuration(&same).unwrap().is_pass());

        let mut collapsed = id.clone();
        for e in &mut collapsed.entries {
            e.map = vec![vec![0]; e.index.size()];
        }
        assert!(compose_configurations(&outer, &collapsed).is_err());
        let partial = ConfigWitness { entries: id.entries[..1].to_vec(), ..id };
        assert!(compose_configurations(&outer, &partial).is_err());
    }

    #[test]
    fn reductive_subclasses() {
        let dg = ClassSpec::builtin(Builtin::Digraphs);
        let po = ClassSpec::builtin(Builtin::PartialOrders);
        let t = ClassSpec::builtin(Builtin::Tournaments);
        let g = ClassSpec::graphs();
        assert!(check_reductive_subclass(&po, &dg, 3, &[]).unwrap().is_pass());
        assert!(check_reductive_subclass(&g, &dg, 3, &[]).unwrap().is_pass());
        assert!(check_reductive_subclass(&t, &dg, 3, &[]).unwrap().is_pass());
        let bad = check_reductive_subclass(&g, &t, 3, &[]).unwrap();
        let a = bad.failure().unwrap();
        assert_eq!((a.size(), a.tuple_count(0)), (2, 0));
        let renamed = vec![("E".to_string(), "F".to_string())];
        assert!(check_reductive_subclass(&g, &dg, 2, &renamed).is_err());
    }
}
