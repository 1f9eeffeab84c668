use std::fmt;

use crate::error::{Error, Result};

/// A relation symbol: a name and an arity of at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with pairwise distinct names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

/// A symbol renamed while forming a disjoint union of signatures.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rename {
    /// 0 for the left operand, 1 for the right.
    pub side: usize,
    pub from: String,
    pub to: String,
}

pub(crate) fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(n, arity)| Symbol { name: n.into(), arity })
            .collect();
        for (i, s) in symbols.iter().enumerate() {
            if s.arity == 0 {
                return Err(Error::Signature(format!("symbol {} has arity 0", s.name)));
            }
            if !valid_identifier(&s.name) {
                return Err(Error::Signature(format!("invalid symbol name {:?}", s.name)));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::Signature(format!("duplicate symbol {}", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    /// Single binary symbol `E`.
    pub fn binary(name: &str) -> Self {
        Signature::new([(name, 2)]).expect("valid binary signature")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn arity(&self, r: usize) -> usize {
        self.symbols[r].arity
    }

    pub fn name(&self, r: usize) -> &str {
        &self.symbols[r].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Same arities in the same order (names may differ).
    pub fn same_shape(&self, other: &Signature) -> bool {
        self.len() == other.len()
            && self.symbols.iter().zip(&other.symbols).all(|(a, b)| a.arity == b.arity)
    }

    /// Concatenates `parts` followed by `fresh` symbols. Names of the parts
    /// that collide with any other name are suffixed with `_<side>` until
    /// unique; fresh symbols keep their names. Returns the union together
    /// with the start offset of every part and the rename record.
    pub fn disjoint_union(parts: &[&Signature], fresh: &[(&str, usize)]) -> (Signature, Vec<usize>, Vec<Rename>) {
        let taken: Vec<String> = fresh.iter().map(|(n, _)| n.to_string()).collect();
        let mut symbols = Vec::new();
        let mut offsets = Vec::new();
        let mut renames = Vec::new();
        for (side, part) in parts.iter().enumerate() {
            offsets.push(symbols.len());
            for s in part.symbols() {
                let collides = |name: &str, taken: &[String], symbols: &[Symbol]| {
                    taken.iter().any(|t| t == name)
                        || symbols.iter().any(|t: &Symbol| t.name == name)
                        || parts
                            .iter()
                            .enumerate()
                            .any(|(j, p)| j != side && p.index_of(name).is_some())
                };
                let mut name = s.name.clone();
                if collides(&name, &taken, &symbols) {
                    name = format!("{}_{}", s.name, side);
                    while collides(&name, &taken, &symbols) {
                        name.push_str(&format!("_{side}"));
                    }
                    renames.push(Rename { side, from: s.name.clone(), to: name.clone() });
                }
                symbols.push(Symbol { name, arity: s.arity });
            }
        }
        for (n, a) in fresh {
            symbols.push(Symbol { name: n.to_string(), arity: *a });
        }
        (Signature { symbols }, offsets, renames)
    }

    /// The sub-signature made of the listed symbol indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Signature {
        Signature { symbols: indices.iter().map(|&i| self.symbols[i].clone()).collect() }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_arity() {
        assert!(Signature::new([("E", 2), ("E", 1)]).is_err());
        assert!(Signature::new([("E", 0)]).is_err());
        assert!(Signature::new([("1x", 1)]).is_err());
    }

    #[test]
    fn union_renames_collisions_on_both_sides() {
        let e = Signature::binary("E");
        let (u, offsets, renames) = Signature::disjoint_union(&[&e, &e], &[("E", 2)]);
        let names: Vec<_> = u.symbols().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["E_0", "E_1", "E"]);
        assert_eq!(offsets, [0, 1]);
        assert_eq!(renames.len(), 2);
    }

    #[test]
    fn union_keeps_distinct_names() {
        let p = Signature::new([("P", 1)]).unwrap();
        let e = Signature::binary("R");
        let (u, _, renames) = Signature::disjoint_union(&[&p, &e], &[("E0", 2), ("E1", 2)]);
        assert_eq!(u.to_string(), "{P/1, R/2, E0/2, E1/2}");
        assert!(renames.is_empty());
    }
}
