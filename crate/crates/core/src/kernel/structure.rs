use std::fmt;
use std::sync::Arc;

use super::signature::Signature;
use crate::error::{Error, Result};

/// A finite relational structure on the universe `0..size`.
///
/// Each relation is stored as a dense bitset over all `size^arity` tuples,
/// indexed in lexicographic tuple order, so iteration is always sorted and
/// equal structures are bitwise equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Structure {
    sig: Arc<Signature>,
    size: usize,
    rels: Vec<Vec<u64>>,
}

/// A tuple-list description of a structure, possibly invalid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawStructure {
    pub sig: Signature,
    pub size: usize,
    pub relations: Vec<(String, Vec<Vec<usize>>)>,
}

/// First problem found by [`RawStructure::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownSymbol(String),
    ArityMismatch { symbol: String, tuple: Vec<usize>, arity: usize },
    OutOfRange { symbol: String, tuple: Vec<usize>, size: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownSymbol(s) => write!(f, "unknown symbol {s}"),
            Violation::ArityMismatch { symbol, tuple, arity } => {
                write!(f, "arity mismatch: {symbol}{tuple:?} has length {}, expected {arity}", tuple.len())
            }
            Violation::OutOfRange { symbol, tuple, size } => {
                write!(f, "entry out of range: {symbol}{tuple:?} in a structure of size {size}")
            }
        }
    }
}

impl RawStructure {
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        for (name, tuples) in &self.relations {
            let Some(r) = self.sig.index_of(name) else {
                return Err(Violation::UnknownSymbol(name.clone()));
            };
            let arity = self.sig.arity(r);
            for t in tuples {
                if t.len() != arity {
                    return Err(Violation::ArityMismatch { symbol: name.clone(), tuple: t.clone(), arity });
                }
                if t.iter().any(|&x| x >= self.size) {
                    return Err(Violation::OutOfRange { symbol: name.clone(), tuple: t.clone(), size: self.size });
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Structure> {
        self.validate().map_err(|v| Error::Invalid(v.to_string()))?;
        let mut s = Structure::new(Arc::new(self.sig.clone()), self.size);
        for (name, tuples) in &self.relations {
            let r = self.sig.index_of(name).expect("validated");
            for t in tuples {
                s.set(r, t, true);
            }
        }
        Ok(s)
    }
}

impl From<&Structure> for RawStructure {
    fn from(s: &Structure) -> Self {
        RawStructure {
            sig: s.sig().clone(),
            size: s.size(),
            relations: (0..s.sig().len()).map(|r| (s.sig().name(r).to_string(), s.tuples(r))).collect(),
        }
    }
}

fn cells(size: usize, arity: usize) -> usize {
    size.checked_pow(arity as u32).expect("relation table too large")
}

impl Structure {
    /// Structure with every relation empty.
    pub fn new(sig: Arc<Signature>, size: usize) -> Self {
        let rels = sig.symbols().iter().map(|s| vec![0u64; cells(size, s.arity).div_ceil(64)]).collect();
        Structure { sig, size, rels }
    }

    pub fn with_sig(sig: &Signature, size: usize) -> Self {
        Structure::new(Arc::new(sig.clone()), size)
    }

    /// Builds from `(symbol, tuples)` pairs, validating every tuple.
    pub fn from_tuples(sig: &Signature, size: usize, relations: &[(&str, &[&[usize]])]) -> Result<Self> {
        RawStructure {
            sig: sig.clone(),
            size,
            relations: relations
                .iter()
                .map(|(n, ts)| (n.to_string(), ts.iter().map(|t| t.to_vec()).collect()))
                .collect(),
        }
        .build()
    }

    /// Simple graph over `{E/2}`: both orientations of every listed edge.
    pub fn graph(size: usize, edges: &[(usize, usize)]) -> Self {
        let mut s = Structure::with_sig(&Signature::binary("E"), size);
        for &(a, b) in edges {
            s.set(0, &[a, b], true);
            s.set(0, &[b, a], true);
        }
        s
    }

    /// Directed graph over `{E/2}` with exactly the listed arcs.
    pub fn digraph(size: usize, arcs: &[(usize, usize)]) -> Self {
        let mut s = Structure::with_sig(&Signature::binary("E"), size);
        for &(a, b) in arcs {
            s.set(0, &[a, b], true);
        }
        s
    }

    /// Structure over the empty signature.
    pub fn plain(size: usize) -> Self {
        Structure::with_sig(&Signature::empty(), size)
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn sig_arc(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * self.size + x)
    }

    pub fn decode(&self, mut idx: usize, arity: usize) -> Vec<usize> {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.size;
            idx /= self.size;
        }
        t
    }

    #[inline]
    pub fn holds_idx(&self, r: usize, idx: usize) -> bool {
        self.rels[r][idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    pub fn holds(&self, r: usize, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.sig.arity(r));
        self.holds_idx(r, self.index(tuple))
    }

    #[inline]
    pub fn set_idx(&mut self, r: usize, idx: usize, value: bool) {
        if value {
            self.rels[r][idx >> 6] |= 1 << (idx & 63);
        } else {
            self.rels[r][idx >> 6] &= !(1 << (idx & 63));
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, tuple: &[usize], value: bool) {
        let idx = self.index(tuple);
        self.set_idx(r, idx, value);
    }

    /// Number of cells (tuples) of relation `r`.
    pub fn cell_count(&self, r: usize) -> usize {
        cells(self.size, self.sig.arity(r))
    }

    pub fn tuple_count(&self, r: usize) -> usize {
        self.rels[r].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of true cells of relation `r`, ascending.
    pub fn true_cells(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.rels[r].iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// The tuples of relation `r` in lexicographic order.
    pub fn tuples(&self, r: usize) -> Vec<Vec<usize>> {
        let arity = self.sig.arity(r);
        self.true_cells(r).map(|i| self.decode(i, arity)).collect()
    }

    pub fn has_no_tuples(&self) -> bool {
        self.rels.iter().all(|r| r.iter().all(|&w| w == 0))
    }

    /// The structure on `0..map.len()` whose tuple `t` holds iff `map(t)`
    /// holds here. For an injective `map` this is the copy of the induced
    /// substructure on its image, renumbered along `map`.
    pub fn pullback(&self, map: &[usize]) -> Structure {
        let n = map.len();
        let mut out = Structure::new(self.sig.clone(), n);
        for r in 0..self.sig.len() {
            let arity = self.sig.arity(r);
            let total = cells(n, arity);
            let mut t = vec![0usize; arity];
            for idx in 0..total {
                let src = t.iter().fold(0, |acc, &x| acc * self.size + map[x]);
                if self.holds_idx(r, src) {
                    out.set_idx(r, idx, true);
                }
                for slot in t.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        out
    }

    /// Induced substructure on `subset`, renumbered in increasing order,
    /// with the inclusion map (new element ↦ old element).
    pub fn induced(&self, subset: &[usize]) -> Result<(Structure, Vec<usize>)> {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&x| x >= self.size) {
            return Err(Error::OutOfRange { element: bad, size: self.size });
        }
        Ok((self.pullback(&sorted), sorted))
    }

    /// Renumbers along a permutation: element `x` becomes `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> Structure {
        let mut inv = vec![0; perm.len()];
        for (x, &p) in perm.iter().enumerate() {
            inv[p] = x;
        }
        self.pullback(&inv)
    }

    /// Reduct to the listed symbols (in that order).
    pub fn reduct(&self, symbols: &[usize]) -> Structure {
        Structure {
            sig: Arc::new(self.sig.select(symbols)),
            size: self.size,
            rels: symbols.iter().map(|&r| self.rels[r].clone()).collect(),
        }
    }

    /// Same relations under a signature of the same shape.
    pub fn retag(&self, sig: Arc<Signature>) -> Result<Structure> {
        if !sig.same_shape(&self.sig) {
            return Err(Error::SignatureMismatch(format!("cannot retag {} as {}", self.sig, sig)));
        }
        Ok(Structure { sig, size: self.size, rels: self.rels.clone() })
    }

    /// Appends `extra` elements that occur in no tuple.
    pub fn with_extra_points(&self, extra: usize) -> Structure {
        let n = self.size + extra;
        let mut out = Structure::new(self.sig.clone(), n);
        let map: Vec<usize> = (0..self.size).collect();
        for r in 0..self.sig.len() {
            let arity = self.sig.arity(r);
            for idx in self.true_cells(r) {
                let t = self.decode(idx, arity);
                let j = t.iter().fold(0, |acc, &x| acc * n + map[x]);
                out.set_idx(r, j, true);
            }
        }
        out
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] over {} {{", self.size, self.sig)?;
        for r in 0..self.sig.len() {
            write!(f, " {}:", self.sig.name(r))?;
            for t in self.tuples(r) {
                let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, " ({})", parts.join(","))?;
            }
            write!(f, ";")?;
        }
        write!(f, " }}")
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
