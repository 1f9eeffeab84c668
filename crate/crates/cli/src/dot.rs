//! Graphviz rendering of a structure.
//!
//! Binary symbols become edges. In [`DotStyle::Collapse`] a symmetric pair
//! is drawn once as an undirected edge; [`DotStyle::Directed`] keeps every
//! arc, since a digraph 2-cycle and a graph edge are the same relation.
//! Unary symbols become node labels. Higher arities get a small factor node
//! per tuple, wired to its entries in order.

use fraisse_core::Structure;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DotStyle {
    #[default]
    Collapse,
    Directed,
}

fn binary_edges(s: &Structure, r: usize, name: &str, style: DotStyle, out: &mut Vec<String>) {
    for t in s.tuples(r) {
        let (x, y) = (t[0], t[1]);
        if style == DotStyle::Collapse && x != y && s.holds(r, &[y, x]) {
            if x < y {
                out.push(format!("  n{x} -> n{y} [label=\"{name}\", dir=none];"));
            }
        } else {
            out.push(format!("  n{x} -> n{y} [label=\"{name}\"];"));
        }
    }
}

/// [`export_dot_with`] in the collapsing style.
pub fn export_dot(s: &Structure) -> String {
    export_dot_with(s, DotStyle::Collapse)
}

/// Deterministic DOT text: nodes, then symbols in signature order, tuples
/// sorted.
pub fn export_dot_with(s: &Structure, style: DotStyle) -> String {
    let sig = s.sig();
    let mut lines = vec!["digraph structure {".to_string()];
    for x in 0..s.size() {
        let unary: Vec<&str> =
            (0..sig.len()).filter(|&r| sig.arity(r) == 1 && s.holds(r, &[x])).map(|r| sig.name(r)).collect();
        let label = if unary.is_empty() { x.to_string() } else { format!("{x}: {}", unary.join(",")) };
        lines.push(format!("  n{x} [label=\"{label}\"];"));
    }
    for r in 0..sig.len() {
        let name = sig.name(r);
        match sig.arity(r) {
            1 => {}
            2 => binary_edges(s, r, name, style, &mut lines),
            _ => {
                for (i, t) in s.tuples(r).iter().enumerate() {
                    let f = format!("{name}_{i}");
                    lines.push(format!("  \"{f}\" [shape=point, xlabel=\"{name}\"];"));
                    for (pos, x) in t.iter().enumerate() {
                        lines.push(format!("  \"{f}\" -> n{x} [label=\"{pos}\", arrowhead=none];"));
                    }
                }
            }
        }
    }
    lines.push("}".to_string());
    lines.join("\n") + "\n"
}
