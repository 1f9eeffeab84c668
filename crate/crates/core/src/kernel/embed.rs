use std::ops::ControlFlow;

use super::structure::Structure;
use crate::error::{Error, Result};

/// An embedding given by its element map: `map[x]` is the image of `x`.
pub type Map = Vec<usize>;

pub(crate) fn check_same_sig(a: &Structure, b: &Structure) -> Result<()> {
    if a.sig() != b.sig() {
        return Err(Error::SignatureMismatch(format!("{} vs {}", a.sig(), b.sig())));
    }
    Ok(())
}

/// Injective, and every tuple of `a` holds iff its image holds in `b`.
pub fn is_embedding(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    if a.sig() != b.sig() || map.len() != a.size() || map.iter().any(|&x| x >= b.size()) {
        return false;
    }
    let mut seen = vec![false; b.size()];
    for &x in map {
        if std::mem::replace(&mut seen[x], true) {
            return false;
        }
    }
    &b.pullback(map) == a
}

/// `second ∘ first`.
pub fn compose(first: &[usize], second: &[usize]) -> Map {
    first.iter().map(|&x| second[x]).collect()
}

/// Inverse of a partial injective map, as a lookup over `0..target_size`.
pub fn inverse(map: &[usize], target_size: usize) -> Vec<Option<usize>> {
    let mut inv = vec![None; target_size];
    for (x, &y) in map.iter().enumerate() {
        inv[y] = Some(x);
    }
    inv
}

/// Per source element `i`, every tuple over `0..=i` that mentions `i`,
/// with its truth value in the source. Checking these as soon as `i` is
/// placed validates each tuple exactly once.
struct Plan {
    levels: Vec<Vec<(usize, Vec<usize>, bool)>>,
}

impl Plan {
    fn new(a: &Structure) -> Plan {
        let levels = (0..a.size())
            .map(|i| {
                let mut level = Vec::new();
                for r in 0..a.sig().len() {
                    for t in tuples_over(i + 1, a.sig().arity(r)) {
                        if t.contains(&i) {
                            let v = a.holds(r, &t);
                            level.push((r, t, v));
                        }
                    }
                }
                level
            })
            .collect();
        Plan { levels }
    }
}

/// All tuples over `0..n` of the given length, in lexicographic order.
pub fn tuples_over(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(arity as u32);
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        t
    })
}

/// Visits every embedding of `a` into `b` in lexicographic order of the
/// map. `candidates[i]`, when given, restricts the image of `i`.
pub fn for_each_embedding<F>(a: &Structure, b: &Structure, candidates: Option<&[Vec<usize>]>, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    check_same_sig(a, b)?;
    if a.size() > b.size() {
        return Ok(());
    }
    let plan = Plan::new(a);
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; b.size()];
    let all: Vec<usize> = (0..b.size()).collect();
    let mut scratch = Vec::new();
    let _ = search(a, b, &plan, candidates, &all, 0, &mut map, &mut used, &mut scratch, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn search<F>(
    a: &Structure,
    b: &Structure,
    plan: &Plan,
    candidates: Option<&[Vec<usize>]>,
    all: &[usize],
    i: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    scratch: &mut Vec<usize>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if i == a.size() {
        return visit(map);
    }
    let cands = candidates.map_or(all, |c| &c[i]);
    for &t in cands {
        if used[t] {
            continue;
        }
        map[i] = t;
        let ok = plan.levels[i].iter().all(|(r, tuple, value)| {
            scratch.clear();
            scratch.extend(tuple.iter().map(|&x| map[x]));
            b.holds(*r, scratch) == *value
        });
        if ok {
            used[t] = true;
            let flow = search(a, b, plan, candidates, all, i + 1, map, used, scratch, visit);
            used[t] = false;
            flow?;
        }
    }
    map[i] = usize::MAX;
    ControlFlow::Continue(())
}

/// All embeddings of `a` into `b`, ordered lexicographically by map.
pub fn enumerate_embeddings(a: &Structure, b: &Structure) -> Result<Vec<Map>> {
    let mut out = Vec::new();
    for_each_embedding(a, b, None, |m| {
        out.push(m.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn first_embedding(a: &Structure, b: &Structure) -> Result<Option<Map>> {
    let mut found = None;
    for_each_embedding(a, b, None, |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    })?;
    Ok(found)
}

pub fn embeds(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(first_embedding(a, b)?.is_some())
}

pub fn count_embeddings(a: &Structure, b: &Structure) -> Result<usize> {
    let mut n = 0;
    for_each_embedding(a, b, None, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}
