use std::sync::Arc;

use crate::error::Result;
use crate::kernel::{Rename, Signature, Structure};

/// Signature of a lexicographic product: `L0` symbols, then `L1` symbols,
/// then the fibre equivalence `E`. Clashing names are suffixed and recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexLayout {
    pub sig: Arc<Signature>,
    pub l0: Arc<Signature>,
    pub l1: Arc<Signature>,
    pub renames: Vec<Rename>,
}

impl LexLayout {
    pub fn new(l0: &Signature, l1: &Signature) -> LexLayout {
        let (sig, _, renames) = Signature::disjoint_union(&[l0, l1], &[("E", 2)]);
        LexLayout { sig: Arc::new(sig), l0: Arc::new(l0.clone()), l1: Arc::new(l1.clone()), renames }
    }

    pub fn l0_symbols(&self) -> Vec<usize> {
        (0..self.l0.len()).collect()
    }

    pub fn l1_symbols(&self) -> Vec<usize> {
        (self.l0.len()..self.l0.len() + self.l1.len()).collect()
    }

    pub fn e(&self) -> usize {
        self.l0.len() + self.l1.len()
    }
}

/// Signature of a full product: `L0`, `L1`, then `E0` and `E1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullLayout {
    pub sig: Arc<Signature>,
    pub l0: Arc<Signature>,
    pub l1: Arc<Signature>,
    pub renames: Vec<Rename>,
}

impl FullLayout {
    pub fn new(l0: &Signature, l1: &Signature) -> FullLayout {
        let (sig, _, renames) = Signature::disjoint_union(&[l0, l1], &[("E0", 2), ("E1", 2)]);
        FullLayout { sig: Arc::new(sig), l0: Arc::new(l0.clone()), l1: Arc::new(l1.clone()), renames }
    }

    pub fn l0_symbols(&self) -> Vec<usize> {
        (0..self.l0.len()).collect()
    }

    pub fn l1_symbols(&self) -> Vec<usize> {
        (self.l0.len()..self.l0.len() + self.l1.len()).collect()
    }

    pub fn e0(&self) -> usize {
        self.l0.len() + self.l1.len()
    }

    pub fn e1(&self) -> usize {
        self.e0() + 1
    }
}

/// Signature of a free superposition: `L0` then `L1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperLayout {
    pub sig: Arc<Signature>,
    pub l0: Arc<Signature>,
    pub l1: Arc<Signature>,
    pub renames: Vec<Rename>,
}

impl SuperLayout {
    pub fn new(l0: &Signature, l1: &Signature) -> SuperLayout {
        let (sig, _, renames) = Signature::disjoint_union(&[l0, l1], &[]);
        SuperLayout { sig: Arc::new(sig), l0: Arc::new(l0.clone()), l1: Arc::new(l1.clone()), renames }
    }

    /// The two reducts, under the component signatures.
    pub fn split(&self, s: &Structure) -> Result<(Structure, Structure)> {
        let n0 = self.l0.len();
        let left = s.reduct(&(0..n0).collect::<Vec<_>>()).retag(self.l0.clone())?;
        let right = s.reduct(&(n0..n0 + self.l1.len()).collect::<Vec<_>>()).retag(self.l1.clone())?;
        Ok((left, right))
    }
}
