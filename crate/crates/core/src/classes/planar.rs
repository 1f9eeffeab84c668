//! Planarity by face embedding (Demoucron, Malgrange and Pertuiset),
//! applied to each biconnected block.

use std::collections::{BTreeSet, VecDeque};

/// Largest vertex count accepted by `planar_graphs` membership.
pub const PLANARITY_SOFT_LIMIT: usize = 12;

/// Whether the simple graph on `0..n` with the given undirected edges is
/// planar. Exact for every size.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let set: BTreeSet<(usize, usize)> =
        edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if n >= 3 && set.len() > 3 * n - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &set {
        adj[a].push(b);
        adj[b].push(a);
    }
    // Every non-planar graph has at least 9 edges (K3,3).
    blocks(&adj).iter().filter(|b| b.len() >= 9).all(|b| embed_block(n, b))
}

/// Biconnected blocks as edge lists.
fn blocks(adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        disc: Vec<usize>,
        low: Vec<usize>,
        time: usize,
        stack: Vec<(usize, usize)>,
        out: Vec<Vec<(usize, usize)>>,
    }
    fn dfs(st: &mut St, u: usize, parent: usize) {
        st.disc[u] = st.time;
        st.low[u] = st.time;
        st.time += 1;
        for i in 0..st.adj[u].len() {
            let v = st.adj[u][i];
            if st.disc[v] == usize::MAX {
                st.stack.push((u, v));
                dfs(st, v, u);
                st.low[u] = st.low[u].min(st.low[v]);
                if st.low[v] >= st.disc[u] {
                    let mut block = Vec::new();
                    while let Some(e) = st.stack.pop() {
                        block.push(e);
                        if e == (u, v) {
                            break;
                        }
                    }
                    st.out.push(block);
                }
            } else if v != parent && st.disc[v] < st.disc[u] {
                st.stack.push((u, v));
                st.low[u] = st.low[u].min(st.disc[v]);
            }
        }
    }
    let n = adj.len();
    let mut st = St { adj, disc: vec![usize::MAX; n], low: vec![0; n], time: 0, stack: Vec::new(), out: Vec::new() };
    for v in 0..n {
        if st.disc[v] == usize::MAX {
            dfs(&mut st, v, usize::MAX);
        }
    }
    st.out
}

struct Fragment {
    attach: Vec<usize>,
    /// Interior vertices; empty for a chord.
    inner: Vec<usize>,
}

fn embed_block(n: usize, block: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in block {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut in_h = vec![false; n];
    let mut h_edges: BTreeSet<(usize, usize)> = BTreeSet::new();

    // Initial cycle: an edge (u, w) closed by a path from w back to u.
    let (u, w) = block[0];
    let path = bfs_path(&adj, w, |x| x == u, |x, y| key(x, y) != key(u, w), |_| true).expect("blocks are biconnected");
    for pair in path.windows(2) {
        h_edges.insert(key(pair[0], pair[1]));
    }
    h_edges.insert(key(u, w));
    for &x in &path {
        in_h[x] = true;
    }
    let mut faces = vec![path.clone(), path.iter().rev().copied().collect::<Vec<_>>()];

    loop {
        let fragments = fragments(&adj, block, &in_h, &h_edges, &key);
        if fragments.is_empty() {
            return true;
        }
        let admissible: Vec<Vec<usize>> = fragments
            .iter()
            .map(|f| (0..faces.len()).filter(|&i| f.attach.iter().all(|a| faces[i].contains(a))).collect())
            .collect();
        if admissible.iter().any(|a| a.is_empty()) {
            return false;
        }
        let pick = admissible.iter().position(|a| a.len() == 1).unwrap_or(0);
        let face = admissible[pick][0];
        let frag = &fragments[pick];
        let start = frag.attach[0];
        let path = if frag.inner.is_empty() {
            vec![frag.attach[0], frag.attach[1]]
        } else {
            bfs_path(
                &adj,
                start,
                |x| x != start && in_h[x],
                |x, y| !(in_h[x] && in_h[y]),
                |x| frag.inner.contains(&x),
            )
            .expect("fragment has two attachments")
        };
        for pair in path.windows(2) {
            h_edges.insert(key(pair[0], pair[1]));
        }
        for &x in &path {
            in_h[x] = true;
        }
        let f = faces.swap_remove(face);
        let (a, b) = split_face(&f, &path);
        faces.push(a);
        faces.push(b);
    }
}

/// Shortest path from `from` to the first vertex satisfying `goal`, using
/// only edges allowed by `edge_ok` and interior vertices allowed by `through`.
fn bfs_path(
    adj: &[Vec<usize>],
    from: usize,
    goal: impl Fn(usize) -> bool,
    edge_ok: impl Fn(usize, usize) -> bool,
    through: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if prev[y] != usize::MAX || !edge_ok(x, y) {
                continue;
            }
            prev[y] = x;
            if goal(y) {
                let mut path = vec![y];
                let mut z = y;
                while z != from {
                    z = prev[z];
                    path.push(z);
                }
                path.reverse();
                return Some(path);
            }
            if through(y) {
                queue.push_back(y);
            }
        }
    }
    None
}

fn fragments(
    adj: &[Vec<usize>],
    block: &[(usize, usize)],
    in_h: &[bool],
    h_edges: &BTreeSet<(usize, usize)>,
    key: &impl Fn(usize, usize) -> (usize, usize),
) -> Vec<Fragment> {
    let mut out = Vec::new();
    for &(a, b) in block {
        if in_h[a] && in_h[b] && !h_edges.contains(&key(a, b)) {
            out.push(Fragment { attach: vec![a.min(b), a.max(b)], inner: Vec::new() });
        }
    }
    let mut seen = vec![false; adj.len()];
    let mut vertices: Vec<usize> = block.iter().flat_map(|&(a, b)| [a, b]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    for &v in &vertices {
        if in_h[v] || seen[v] {
            continue;
        }
        let mut inner = vec![v];
        let mut attach = BTreeSet::new();
        seen[v] = true;
        let mut i = 0;
        while i < inner.len() {
            let x = inner[i];
            i += 1;
            for &y in &adj[x] {
                if in_h[y] {
                    attach.insert(y);
                } else if !seen[y] {
                    seen[y] = true;
                    inner.push(y);
                }
            }
        }
        inner.sort_unstable();
        out.push(Fragment { attach: attach.into_iter().collect(), inner });
    }
    out
}

/// Splits a face cycle along a path whose ends lie on it.
fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let len = face.len();
    let i = face.iter().position(|&x| x == path[0]).expect("path starts on the face");
    let j = face.iter().position(|&x| x == *path.last().expect("nonempty")).expect("path ends on the face");
    let arc = |from: usize, to: usize| {
        let mut out = vec![face[from]];
        let mut k = from;
        while k != to {
            k = (k + 1) % len;
            out.push(face[k]);
        }
        out
    };
    let interior = &path[1..path.len() - 1];
    let mut first = arc(i, j);
    first.extend(interior.iter().rev());
    let mut second = arc(j, i);
    second.extend(interior.iter());
    (first, second)
}
