use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::formula::{eval_qf, QfFormula, Var};
use crate::error::{Error, Result};
use crate::kernel::{find_isomorphism, tuples_over, Signature, Structure};
use crate::verdict::Verdict;

/// Source symbols interpreted by formulas over blocks of `width` target
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub source: Arc<Signature>,
    pub target: Arc<Signature>,
    pub width: usize,
    pub formulas: Vec<QfFormula>,
}

impl Interpretation {
    pub fn new(source: Arc<Signature>, target: Arc<Signature>, width: usize, formulas: Vec<QfFormula>) -> Result<Self> {
        let interp = Interpretation { source, target, width, formulas };
        interp.validate()?;
        Ok(interp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::Invalid("interpretation width must be at least 1".into()));
        }
        if self.formulas.len() != self.source.len() {
            return Err(Error::Invalid(format!(
                "{} formulas for the {} symbols of {}",
                self.formulas.len(),
                self.source.len(),
                self.source
            )));
        }
        for (r, phi) in self.formulas.iter().enumerate() {
            phi.validate(&self.target, self.source.arity(r), self.width)?;
        }
        Ok(())
    }

    /// Width 1, each symbol read as itself.
    pub fn identity(sig: Arc<Signature>) -> Interpretation {
        let formulas = (0..sig.len())
            .map(|r| QfFormula::atom(r, &(0..sig.arity(r)).map(|i| Var::new(i, 0)).collect::<Vec<_>>()))
            .collect();
        Interpretation { source: sig.clone(), target: sig, width: 1, formulas }
    }
}

/// An index structure `A`, a target `M` and `f_A: A → M^width`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub index: Structure,
    pub target: Structure,
    pub map: Vec<Vec<usize>>,
}

impl ConfigEntry {
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.map.iter().all(|b| seen.insert(b))
    }

    /// The map transported to a structure isomorphic to the index.
    pub fn map_for(&self, s: &Structure) -> Result<Vec<Vec<usize>>> {
        if s == &self.index {
            return Ok(self.map.clone());
        }
        let iso = find_isomorphism(s, &self.index)?
            .ok_or_else(|| Error::Invalid(format!("{s} is not isomorphic to the entry index {}", self.index)))?;
        Ok(iso.iter().map(|&x| self.map[x].clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigWitness {
    pub interp: Interpretation,
    pub entries: Vec<ConfigEntry>,
}

/// A tuple on which an entry and its interpretation disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigViolation {
    pub entry: usize,
    pub symbol: String,
    pub tuple: Vec<usize>,
    /// Truth in the index structure.
    pub expected: bool,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entry {}: {}{:?} is {} in the index but its image says {}",
            self.entry, self.symbol, self.tuple, self.expected, !self.expected
        )
    }
}

impl ConfigWitness {
    pub fn is_injective(&self) -> bool {
        self.entries.iter().all(ConfigEntry::is_injective)
    }

    /// Shape checks: signatures, map lengths and ranges.
    pub fn validate(&self) -> Result<()> {
        self.interp.validate()?;
        for (i, e) in self.entries.iter().enumerate() {
            if e.index.sig() != &*self.interp.source || e.target.sig() != &*self.interp.target {
                return Err(Error::SignatureMismatch(format!("entry {i} does not match the interpretation signatures")));
            }
            if e.map.len() != e.index.size() {
                return Err(Error::Invalid(format!("entry {i} maps {} of {} elements", e.map.len(), e.index.size())));
            }
            for block in &e.map {
                if block.len() != self.interp.width {
                    return Err(Error::Invalid(format!("entry {i} has a block of length {}", block.len())));
                }
                if let Some(&x) = block.iter().find(|&&x| x >= e.target.size()) {
                    return Err(Error::OutOfRange { element: x, size: e.target.size() });
                }
            }
        }
        Ok(())
    }

    /// Entry whose index is isomorphic to `s`, with the transported map.
    pub fn lookup(&self, s: &Structure) -> Result<(&ConfigEntry, Vec<Vec<usize>>)> {
        if let Some(e) = self.entries.iter().find(|e| &e.index == s) {
            return Ok((e, e.map.clone()));
        }
        for e in self.entries.iter().filter(|e| e.index.size() == s.size()) {
            if let Ok(map) = e.map_for(s) {
                return Ok((e, map));
            }
        }
        Err(Error::Invalid(format!("no entry for {s}")))
    }
}

/// `A ⊨ R(ā) ⇔ M ⊨ I(R)(f_A(ā))` for every entry, symbol and tuple,
/// repeated arguments included. The first violation in entry order wins.
pub fn verify_configuration(w: &ConfigWitness) -> Result<Verdict<ConfigViolation>> {
    w.validate()?;
    let found: Vec<Option<ConfigViolation>> = w
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| check_entry(&w.interp, i, e))
        .collect::<Result<_>>()?;
    Ok(match found.into_iter().flatten().next() {
        Some(v) => Verdict::Fail(v),
        None => Verdict::Pass,
    })
}

fn check_entry(interp: &Interpretation, i: usize, e: &ConfigEntry) -> Result<Option<ConfigViolation>> {
    for (r, phi) in interp.formulas.iter().enumerate() {
        for t in tuples_over(e.index.size(), interp.source.arity(r)) {
            let blocks: Vec<Vec<usize>> = t.iter().map(|&a| e.map[a].clone()).collect();
            let expected = e.index.holds(r, &t);
            if eval_qf(phi, &e.target, &blocks)? != expected {
                return Ok(Some(ConfigViolation { entry: i, symbol: interp.source.name(r).to_string(), tuple: t, expected }));
            }
        }
    }
    Ok(None)
}

fn ensure_verified(w: ConfigWitness, what: &str) -> Result<ConfigWitness> {
    match verify_configuration(&w)? {
        Verdict::Fail(v) => Err(Error::Invalid(format!("{what} produced an invalid configuration: {v}"))),
        _ => Ok(w),
    }
}

/// Appends a tag coordinate that is injective on each entry; formulas
/// ignore it. Each target needs at least as many elements as its index.
pub fn make_injective(w: &ConfigWitness) -> Result<ConfigWitness> {
    w.validate()?;
    let mut entries = Vec::with_capacity(w.entries.len());
    for (i, e) in w.entries.iter().enumerate() {
        if e.index.size() > e.target.size() {
            return Err(Error::Invalid(format!(
                "entry {i}: a target of {} elements cannot tag {} elements injectively",
                e.target.size(),
                e.index.size()
            )));
        }
        let map = e.map.iter().enumerate().map(|(a, b)| b.iter().copied().chain([a]).collect()).collect();
        entries.push(ConfigEntry { index: e.index.clone(), target: e.target.clone(), map });
    }
    let interp = Interpretation { width: w.interp.width + 1, ..w.interp.clone() };
    ensure_verified(ConfigWitness { interp, entries }, "make_injective")
}

/// `outer` reads `K₀` into members of `K₁`; `inner`, injective, reads `K₁`
/// into targets. Atoms of the outer formulas are replaced by the inner
/// formulas and maps are composed blockwise, so widths multiply.
pub fn compose_configurations(outer: &ConfigWitness, inner: &ConfigWitness) -> Result<ConfigWitness> {
    outer.validate()?;
    inner.validate()?;
    if outer.interp.target != inner.interp.source {
        return Err(Error::SignatureMismatch(format!(
            "outer targets {} but inner reads {}",
            outer.interp.target, inner.interp.source
        )));
    }
    if !inner.is_injective() {
        return Err(Error::Invalid("the inner configuration must be injective; apply make_injective first".into()));
    }
    let (n, k) = (outer.interp.width, inner.interp.width);
    let lift = |v: Var, q: usize| Var::new(v.arg, v.pos * k + q);
    let formulas = outer
        .interp
        .formulas
        .iter()
        .map(|phi| compose_formula(phi, &inner.interp, k, &lift))
        .collect();
    let interp = Interpretation { source: outer.interp.source.clone(), target: inner.interp.target.clone(), width: n * k, formulas };
    let mut entries = Vec::with_capacity(outer.entries.len());
    for e in &outer.entries {
        let (ie, g) = inner.lookup(&e.target)?;
        let map = e.map.iter().map(|block| block.iter().flat_map(|&b| g[b].iter().copied()).collect()).collect();
        entries.push(ConfigEntry { index: e.index.clone(), target: ie.target.clone(), map });
    }
    ensure_verified(ConfigWitness { interp, entries }, "composition")
}

fn compose_formula(phi: &QfFormula, inner: &Interpretation, k: usize, lift: &dyn Fn(Var, usize) -> Var) -> QfFormula {
    match phi {
        QfFormula::Atom { symbol, args } => inner.formulas[*symbol].map_vars(&|v| lift(args[v.arg], v.pos)),
        // Sound because the inner map is injective.
        QfFormula::Eq(v, w) => QfFormula::And((0..k).map(|q| QfFormula::Eq(lift(*v, q), lift(*w, q))).collect()),
        QfFormula::BlockEq { left, right, start, len } => {
            QfFormula::BlockEq { left: *left, right: *right, start: start * k, len: len * k }
        }
        QfFormula::Not(x) => QfFormula::not(compose_formula(x, inner, k, lift)),
        QfFormula::And(xs) => QfFormula::And(xs.iter().map(|x| compose_formula(x, inner, k, lift)).collect()),
        QfFormula::Or(xs) => QfFormula::Or(xs.iter().map(|x| compose_formula(x, inner, k, lift)).collect()),
        QfFormula::True | QfFormula::False => phi.clone(),
    }
}

/// Rewrites witnesses over one target: the disjoint union of every entry
/// target. Quantifier-free truth is unchanged on each component.
pub fn share_targets(ws: &[ConfigWitness]) -> Result<Vec<ConfigWitness>> {
    let Some(first) = ws.first() else { return Ok(Vec::new()) };
    let sig = first.interp.target.clone();
    for w in ws {
        w.validate()?;
        if w.interp.target != sig {
            return Err(Error::SignatureMismatch(format!("targets over {} and {}", sig, w.interp.target)));
        }
    }
    let mut parts: Vec<Structure> = Vec::new();
    let mut offsets: Vec<Vec<usize>> = Vec::new();
    let mut total = 0;
    for w in ws {
        let mut offs = Vec::new();
        for e in &w.entries {
            match parts.iter().position(|p| p == &e.target) {
                Some(j) => offs.push(j),
                None => {
                    parts.push(e.target.clone());
                    offs.push(parts.len() - 1);
                }
            }
        }
        offsets.push(offs);
    }
    let mut starts = Vec::with_capacity(parts.len());
    for p in &parts {
        starts.push(total);
        total += p.size();
    }
    let mut m = Structure::new(sig.clone(), total);
    for (p, &o) in parts.iter().zip(&starts) {
        for r in 0..sig.len() {
            for t in p.tuples(r) {
                m.set(r, &t.iter().map(|&x| x + o).collect::<Vec<_>>(), true);
            }
        }
    }
    Ok(ws
        .iter()
        .zip(&offsets)
        .map(|(w, offs)| ConfigWitness {
            interp: w.interp.clone(),
            entries: w
                .entries
                .iter()
                .zip(offs)
                .map(|(e, &j)| ConfigEntry {
                    index: e.index.clone(),
                    target: m.clone(),
                    map: e.map.iter().map(|b| b.iter().map(|&x| x + starts[j]).collect()).collect(),
                })
                .collect(),
        })
        .collect())
}
