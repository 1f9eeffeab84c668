use std::cmp::Ordering;
use std::ops::ControlFlow;

use super::embed::{check_same_sig, for_each_embedding, tuples_over, Map};
use super::structure::Structure;
use crate::error::{Error, Result};

/// Largest size for which [`canonical_form_limited`] accepts input.
/// The search is exact at any size but its cost grows quickly beyond this.
pub const CANONICAL_SOFT_LIMIT: usize = 10;

/// Isomorphism-class representative: the relabeling of a structure whose
/// tuple encoding is lexicographically least among the orderings the
/// refinement search visits. Two structures over the same signature have
/// equal canonical forms iff they are isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Structure);

impl CanonicalForm {
    pub fn structure(&self) -> &Structure {
        &self.0
    }

    pub fn into_structure(self) -> Structure {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }
}

/// Stable colour refinement starting from `init`. Colours are ranks of
/// sorted invariant keys, so isomorphic inputs get identical colourings.
pub fn refine(s: &Structure, init: &[u32]) -> Vec<u32> {
    let n = s.size();
    let mut colors = rank(init.to_vec());
    let mut classes = count_distinct(&colors);
    loop {
        let mut keys: Vec<Vec<(u32, u32, Vec<u32>)>> = vec![Vec::new(); n];
        for r in 0..s.sig().len() {
            let arity = s.sig().arity(r);
            for idx in s.true_cells(r) {
                let t = s.decode(idx, arity);
                let entry: Vec<u32> = t.iter().map(|&x| colors[x]).collect();
                for (p, &v) in t.iter().enumerate() {
                    if t[..p].contains(&v) {
                        continue;
                    }
                    let mask = t.iter().enumerate().filter(|(_, &x)| x == v).fold(0u32, |m, (q, _)| m | 1 << q);
                    keys[v].push((r as u32, mask, entry.clone()));
                }
            }
        }
        for k in &mut keys {
            k.sort_unstable();
        }
        let next = rank(colors.iter().copied().zip(keys).collect());
        let next_classes = count_distinct(&next);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

fn rank<K: Ord + Clone>(keys: Vec<K>) -> Vec<u32> {
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("present") as u32).collect()
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Twin classes: `u ~ v` iff swapping `u` and `v` is an automorphism.
/// Returns the least member of each element's class.
fn twins(s: &Structure, colors: &[u32]) -> Vec<usize> {
    let n = s.size();
    let mut rep: Vec<usize> = (0..n).collect();
    for v in 0..n {
        if rep[v] != v {
            continue;
        }
        for u in v + 1..n {
            if rep[u] != u || colors[u] != colors[v] {
                continue;
            }
            let mut swap: Vec<usize> = (0..n).collect();
            swap.swap(u, v);
            if &s.pullback(&swap) == s {
                rep[u] = v;
            }
        }
    }
    rep
}

struct Search<'a> {
    s: &'a Structure,
    base: Vec<u32>,
    twin: Vec<usize>,
    chunks: Vec<Vec<(usize, Vec<usize>)>>,
    best: Option<Vec<bool>>,
    best_order: Vec<usize>,
    cur: Vec<bool>,
}

impl Search<'_> {
    fn dfs(&mut self, placed: &mut Vec<usize>, state: Ordering) {
        let n = self.s.size();
        if placed.len() == n {
            if self.best.is_none() || state == Ordering::Less {
                self.best = Some(self.cur.clone());
                self.best_order = placed.clone();
            }
            return;
        }
        let p = placed.len();
        let mut init = vec![0u32; n];
        let mut is_placed = vec![false; n];
        for (i, &v) in placed.iter().enumerate() {
            init[v] = i as u32;
            is_placed[v] = true;
        }
        for v in 0..n {
            if !is_placed[v] {
                init[v] = (n as u32) + self.base[v];
            }
        }
        let colors = refine(self.s, &init);
        let target = (0..n).filter(|&v| !is_placed[v]).map(|v| colors[v]).min().expect("unplaced vertex");
        let cell: Vec<usize> = (0..n).filter(|&v| !is_placed[v] && colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for v in cell {
            if tried.contains(&self.twin[v]) {
                continue;
            }
            tried.push(self.twin[v]);
            placed.push(v);
            let start = self.cur.len();
            let mut st = state;
            let mut pruned = false;
            for k in 0..self.chunks[p].len() {
                let (r, ref pos) = self.chunks[p][k];
                let tuple: Vec<usize> = pos.iter().map(|&i| placed[i]).collect();
                let bit = self.s.holds(r, &tuple);
                if st == Ordering::Equal {
                    if let Some(best) = &self.best {
                        st = bit.cmp(&best[start + k]);
                        if st == Ordering::Greater {
                            pruned = true;
                            break;
                        }
                    }
                }
                self.cur.push(bit);
            }
            if !pruned {
                self.dfs(placed, st);
            }
            self.cur.truncate(start);
            placed.pop();
        }
    }
}

/// Canonical form together with the labeling: `perm[x]` is the position
/// of `x` in the canonical structure.
pub fn canonical_labeling(s: &Structure) -> (CanonicalForm, Vec<usize>) {
    let n = s.size();
    if n == 0 {
        return (CanonicalForm(s.clone()), Vec::new());
    }
    let base = refine(s, &vec![0; n]);
    let twin = twins(s, &base);
    let chunks = (0..n)
        .map(|p| {
            let mut out = Vec::new();
            for r in 0..s.sig().len() {
                for t in tuples_over(p + 1, s.sig().arity(r)) {
                    if t.contains(&p) {
                        out.push((r, t));
                    }
                }
            }
            out
        })
        .collect();
    let mut search = Search { s, base, twin, chunks, best: None, best_order: Vec::new(), cur: Vec::new() };
    search.dfs(&mut Vec::with_capacity(n), Ordering::Equal);
    let order = search.best_order;
    let mut perm = vec![0; n];
    for (p, &v) in order.iter().enumerate() {
        perm[v] = p;
    }
    (CanonicalForm(s.pullback(&order)), perm)
}

pub fn canonical_form(s: &Structure) -> CanonicalForm {
    canonical_labeling(s).0
}

/// [`canonical_form`] refusing inputs above [`CANONICAL_SOFT_LIMIT`].
pub fn canonical_form_limited(s: &Structure) -> Result<CanonicalForm> {
    if s.size() > CANONICAL_SOFT_LIMIT {
        return Err(Error::Limit(format!(
            "canonical form requested for size {} (soft limit {CANONICAL_SOFT_LIMIT})",
            s.size()
        )));
    }
    Ok(canonical_form(s))
}

pub fn is_isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    check_same_sig(a, b)?;
    if a.size() != b.size() {
        return Ok(false);
    }
    for r in 0..a.sig().len() {
        if a.tuple_count(r) != b.tuple_count(r) {
            return Ok(false);
        }
    }
    Ok(canonical_form(a) == canonical_form(b))
}

/// An isomorphism `a → b` if one exists.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Result<Option<Map>> {
    check_same_sig(a, b)?;
    if a.size() != b.size() {
        return Ok(None);
    }
    let (ca, pa) = canonical_labeling(a);
    let (cb, pb) = canonical_labeling(b);
    if ca != cb {
        return Ok(None);
    }
    let mut inv_b = vec![0; b.size()];
    for (x, &p) in pb.iter().enumerate() {
        inv_b[p] = x;
    }
    Ok(Some(pa.iter().map(|&p| inv_b[p]).collect()))
}

/// Every automorphism, in lexicographic order.
pub fn enumerate_automorphisms(s: &Structure) -> Vec<Map> {
    let mut out = Vec::new();
    for_each_automorphism(s, |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    });
    out
}

pub fn aut_order(s: &Structure) -> u64 {
    let mut n = 0u64;
    for_each_automorphism(s, |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    n
}

fn for_each_automorphism(s: &Structure, visit: impl FnMut(&[usize]) -> ControlFlow<()>) {
    let colors = refine(s, &vec![0; s.size()]);
    let candidates: Vec<Vec<usize>> =
        (0..s.size()).map(|v| (0..s.size()).filter(|&u| colors[u] == colors[v]).collect()).collect();
    for_each_embedding(s, s, Some(&candidates), visit).expect("same signature");
}
