use std::sync::Arc;

use super::formula::{QfFormula, Var};
use super::witness::{verify_configuration, ConfigEntry, ConfigWitness, Interpretation};
use crate::error::{Error, Result};
use crate::kernel::Structure;
use crate::products::{full_structure, lex_structure, FullAssembly, FullLayout, LexAssembly, LexLayout, SuperLayout};
use crate::verdict::Verdict;

/// Formula of a component placed at coordinate offset `off`.
fn shifted(phi: &QfFormula, off: usize) -> QfFormula {
    phi.map_vars(&|v| Var::new(v.arg, v.pos + off))
}

fn same_target<'a>(targets: impl IntoIterator<Item = &'a Structure>) -> Result<Structure> {
    let mut it = targets.into_iter();
    let first = it.next().ok_or_else(|| Error::Invalid("nothing to transfer".into()))?;
    if it.any(|t| t != first) {
        return Err(Error::Invalid("component entries use different targets; call share_targets first".into()));
    }
    Ok(first.clone())
}

fn finish(interp: Interpretation, entries: Vec<ConfigEntry>, what: &str) -> Result<ConfigWitness> {
    let w = ConfigWitness { interp, entries };
    if let Verdict::Fail(v) = verify_configuration(&w)? {
        return Err(Error::Invalid(format!("{what} transfer produced an invalid configuration: {v}")));
    }
    Ok(w)
}

fn common_target_sig(w0: &ConfigWitness, w1: &ConfigWitness) -> Result<Arc<crate::kernel::Signature>> {
    w0.validate()?;
    w1.validate()?;
    if w0.interp.target != w1.interp.target {
        return Err(Error::SignatureMismatch(format!("targets {} and {}", w0.interp.target, w1.interp.target)));
    }
    Ok(w0.interp.target.clone())
}

/// Lexicographic products: blocks `(y, z)` with `y` read by `w0` and `z`
/// by `w1`. `L0` atoms also require all `z` blocks equal, and `E` is
/// `z₀ = z₁`, which needs `w1` injective.
pub fn lex_config_transfer(w0: &ConfigWitness, w1: &ConfigWitness, assemblies: &[LexAssembly]) -> Result<ConfigWitness> {
    let target = common_target_sig(w0, w1)?;
    if !w1.is_injective() {
        return Err(Error::Invalid("the base configuration must be injective; apply make_injective first".into()));
    }
    let (n0, n1) = (w0.interp.width, w1.interp.width);
    let layout = LexLayout::new(&w0.interp.source, &w1.interp.source);
    let mut formulas = Vec::with_capacity(layout.sig.len());
    for (r, phi) in w0.interp.formulas.iter().enumerate() {
        let m = w0.interp.source.arity(r);
        let mut parts = vec![phi.clone()];
        for i in 1..m {
            parts.push(QfFormula::BlockEq { left: 0, right: i, start: n0, len: n1 });
        }
        formulas.push(QfFormula::And(parts));
    }
    formulas.extend(w1.interp.formulas.iter().map(|phi| shifted(phi, n0)));
    formulas.push(QfFormula::BlockEq { left: 0, right: 1, start: n0, len: n1 });
    let interp = Interpretation::new(layout.sig.clone(), target, n0 + n1, formulas)?;

    let mut entries = Vec::with_capacity(assemblies.len());
    for asm in assemblies {
        let c = lex_structure(asm)?;
        let (base_entry, fb) = w1.lookup(&asm.base)?;
        let mut targets = vec![&base_entry.target];
        let mut map = Vec::with_capacity(c.size());
        let mut fibre_maps = Vec::new();
        for fibre in &asm.fibers {
            if fibre.size() == 0 {
                fibre_maps.push(Vec::new());
                continue;
            }
            let (e, fa) = w0.lookup(fibre)?;
            targets.push(&e.target);
            fibre_maps.push(fa);
        }
        let m = same_target(targets)?;
        for (b, a) in asm.coordinates() {
            map.push(fibre_maps[b][a].iter().chain(&fb[b]).copied().collect());
        }
        entries.push(ConfigEntry { index: c, target: m, map });
    }
    finish(interp, entries, "lexicographic")
}

/// Full products: block `(y₀, y₁)` for grid element `(a₀, a₁)`, `E_t`
/// comparing `y_t`. Both components must be injective.
pub fn full_config_transfer(w0: &ConfigWitness, w1: &ConfigWitness, grids: &[FullAssembly]) -> Result<ConfigWitness> {
    let target = common_target_sig(w0, w1)?;
    if !w0.is_injective() || !w1.is_injective() {
        return Err(Error::Invalid("both configurations must be injective; apply make_injective first".into()));
    }
    let (n0, n1) = (w0.interp.width, w1.interp.width);
    let layout = FullLayout::new(&w0.interp.source, &w1.interp.source);
    let mut formulas: Vec<QfFormula> = w0.interp.formulas.clone();
    formulas.extend(w1.interp.formulas.iter().map(|phi| shifted(phi, n0)));
    formulas.push(QfFormula::BlockEq { left: 0, right: 1, start: 0, len: n0 });
    formulas.push(QfFormula::BlockEq { left: 0, right: 1, start: n0, len: n1 });
    let interp = Interpretation::new(layout.sig.clone(), target, n0 + n1, formulas)?;

    let mut entries = Vec::with_capacity(grids.len());
    for g in grids {
        let s = full_structure(g);
        let (e0, f0) = w0.lookup(&g.left)?;
        let (e1, f1) = w1.lookup(&g.right)?;
        let m = same_target([&e0.target, &e1.target])?;
        let mut map = vec![Vec::new(); s.size()];
        for a in 0..g.left.size() {
            for b in 0..g.right.size() {
                map[g.element(a, b)] = f0[a].iter().chain(&f1[b]).copied().collect();
            }
        }
        entries.push(ConfigEntry { index: s, target: m, map });
    }
    finish(interp, entries, "full")
}

/// Free superpositions: each element gets its block for the `L0` reduct
/// followed by its block for the `L1` reduct. No injectivity is needed.
pub fn super_config_transfer(w0: &ConfigWitness, w1: &ConfigWitness, structures: &[Structure]) -> Result<ConfigWitness> {
    let target = common_target_sig(w0, w1)?;
    let (n0, n1) = (w0.interp.width, w1.interp.width);
    let layout = SuperLayout::new(&w0.interp.source, &w1.interp.source);
    let mut formulas: Vec<QfFormula> = w0.interp.formulas.clone();
    formulas.extend(w1.interp.formulas.iter().map(|phi| shifted(phi, n0)));
    let interp = Interpretation::new(layout.sig.clone(), target, n0 + n1, formulas)?;

    let mut entries = Vec::with_capacity(structures.len());
    for s in structures {
        if s.sig() != &*layout.sig {
            return Err(Error::SignatureMismatch(format!("{s} is not over {}", layout.sig)));
        }
        let (r0, r1) = layout.split(s)?;
        let (e0, f0) = w0.lookup(&r0)?;
        let (e1, f1) = w1.lookup(&r1)?;
        let m = same_target([&e0.target, &e1.target])?;
        let map = (0..s.size()).map(|a| f0[a].iter().chain(&f1[a]).copied().collect()).collect();
        entries.push(ConfigEntry { index: s.clone(), target: m, map });
    }
    finish(interp, entries, "superposition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{enumerate_members, Builtin, ClassSpec};
    use crate::configurations::witness::tests::sets_into;
    use crate::configurations::{builtin_configuration, make_injective, share_targets, BuiltinConfig};
    use crate::kernel::Signature;
    use itertools::Itertools;

    fn set_assemblies(max: usize) -> Vec<LexAssembly> {
        let mut out = Vec::new();
        for nb in 0..=max {
            for sizes in (0..nb).map(|_| 1..=max).multi_cartesian_product() {
                if sizes.iter().sum::<usize>() <= max {
                    out.push(LexAssembly {
                        l0: Arc::new(Signature::empty()),
                        base: Structure::plain(nb),
                        fibers: sizes.into_iter().map(Structure::plain).collect(),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn lex_of_sets() {
        let m = Structure::graph(4, &[]);
        let w = lex_config_transfer(&sets_into(&m, 4, false), &sets_into(&m, 4, true), &set_assemblies(4)).unwrap();
        assert_eq!(w.interp.width, 2);
        assert!(verify_configuration(&w).unwrap().is_pass());
        // One fibre: every pair of blocks agrees on z.
        let single = lex_config_transfer(
            &sets_into(&m, 3, false),
            &sets_into(&m, 1, true),
            &[LexAssembly::uniform(&Structure::plain(3), &Structure::plain(1))],
        )
        .unwrap();
        assert_eq!(single.entries[0].index.tuple_count(0), 9);
        assert!(lex_config_transfer(&sets_into(&m, 4, false), &sets_into(&m, 4, false), &set_assemblies(2)).is_err());
    }

    #[test]
    fn full_products() {
        let m = Structure::graph(3, &[]);
        let grids: Vec<FullAssembly> = (1..=3)
            .cartesian_product(1..=3)
            .map(|(a, b)| FullAssembly { left: Structure::plain(a), right: Structure::plain(b) })
            .collect();
        let w = full_config_transfer(&sets_into(&m, 3, true), &sets_into(&m, 3, true), &grids).unwrap();
        assert_eq!(w.interp.width, 2);
        assert!(full_config_transfer(&sets_into(&m, 3, true), &sets_into(&m, 3, false), &grids).is_err());

        // Graphs through the doubling into partial orders, then made injective.
        let g = make_injective(&builtin_configuration(BuiltinConfig::GToPo, 2).unwrap()).unwrap();
        let target = g.interp.target.clone();
        let po_sets = ConfigWitness {
            interp: Interpretation::new(Arc::new(Signature::empty()), target.clone(), 1, vec![]).unwrap(),
            entries: vec![],
        };
        let shared = share_targets(&[g, po_sets]).unwrap();
        let m = shared[0].entries[0].target.clone();
        let sets = ConfigWitness {
            interp: shared[1].interp.clone(),
            entries: (0..=2)
                .map(|n| ConfigEntry { index: Structure::plain(n), target: m.clone(), map: (0..n).map(|a| vec![a]).collect() })
                .collect(),
        };
        let square = FullAssembly { left: Structure::graph(2, &[(0, 1)]), right: Structure::plain(2) };
        let w = full_config_transfer(&shared[0], &sets, &[square]).unwrap();
        assert_eq!(w.entries[0].index.size(), 4);
    }

    #[test]
    fn superpositions() {
        let g = builtin_configuration(BuiltinConfig::GToPo, 3).unwrap();
        let lo = ClassSpec::builtin(Builtin::LinearOrders);
        let lo_id = ConfigWitness {
            interp: Interpretation::identity(lo.sig_arc().clone()),
            entries: (0..=3)
                .flat_map(|n| enumerate_members(&lo, n).unwrap().to_vec())
                .map(|s| ConfigEntry { map: (0..s.size()).map(|a| vec![a]).collect(), target: s.clone(), index: s })
                .collect(),
        };
        let shared = share_targets(&[g, lo_id]).unwrap();
        let k = ClassSpec::superpose(ClassSpec::graphs(), lo.clone());
        let members: Vec<Structure> = (0..=3).flat_map(|n| enumerate_members(&k, n).unwrap().to_vec()).collect();
        let w = super_config_transfer(&shared[0], &shared[1], &members).unwrap();
        assert_eq!(w.interp.width, 3);
        assert_eq!(w.entries.len(), members.len());

        // Empty second signature: the first witness padded by one coordinate.
        let m = shared[0].entries[0].target.clone();
        let trivial = ConfigWitness {
            interp: Interpretation::new(Arc::new(Signature::empty()), shared[0].interp.target.clone(), 1, vec![]).unwrap(),
            entries: (0..=3)
                .map(|n| ConfigEntry { index: Structure::plain(n), target: m.clone(), map: vec![vec![0]; n] })
                .collect(),
        };
        let gs: Vec<Structure> = (0..=3).flat_map(|n| enumerate_members(&ClassSpec::graphs(), n).unwrap().to_vec()).collect();
        let w = super_config_transfer(&shared[0], &trivial, &gs).unwrap();
        assert_eq!(w.interp.formulas, shared[0].interp.formulas);
    }

    #[test]
    fn superposition_of_renamed_graphs() {
        let g = builtin_configuration(BuiltinConfig::GToT, 2).unwrap();
        let k = ClassSpec::superpose(ClassSpec::graphs(), ClassSpec::graphs());
        assert_eq!(k.sig().len(), 2);
        assert_ne!(k.sig().name(0), k.sig().name(1));
        let members: Vec<Structure> = (0..=2).flat_map(|n| enumerate_members(&k, n).unwrap().to_vec()).collect();
        let w = super_config_transfer(&g, &g, &members).unwrap_err();
        assert!(w.to_string().contains("different targets"));
        let shared = share_targets(&[g.clone(), g]).unwrap();
        let w = super_config_transfer(&shared[0], &shared[1], &members).unwrap();
        assert!(verify_configuration(&w).unwrap().is_pass());
    }
}
