//! Randomised invariants of the kernel, classes, products, partition search
//! and configurations.

use std::sync::Arc;

use fraisse_core::classes::{all_structures, contains, Builtin, ClassSpec};
use fraisse_core::configurations::{builtin_configuration, make_injective, verify_configuration, BuiltinConfig};
use fraisse_core::kernel::{
    age_of, canonical_form, compose, embeds, enumerate_automorphisms, enumerate_embeddings, is_embedding, qf_class,
    QfClassSelector, Signature, Structure,
};
use fraisse_core::partition::{copy_sets, find_bad_coloring};
use fraisse_core::products::{decompose_lex, full_structure, lex_structure, FullAssembly, LexAssembly};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn signatures() -> Vec<Signature> {
    vec![
        Signature::binary("E"),
        Signature::new([("P", 1), ("E", 2)]).unwrap(),
        Signature::new([("R", 3)]).unwrap(),
    ]
}

/// A structure of the given signature whose cells are read off `bits`.
fn fill(sig: &Signature, n: usize, bits: &[bool]) -> Structure {
    let mut s = Structure::with_sig(sig, n);
    let mut it = bits.iter().cycle();
    for r in 0..sig.len() {
        for idx in 0..s.cell_count(r) {
            s.set_idx(r, idx, *it.next().unwrap());
        }
    }
    s
}

fn structure(max: usize) -> impl Strategy<Value = Structure> {
    (0..signatures().len(), 1..=max, prop::collection::vec(prop::bool::weighted(0.35), 1..64))
        .prop_map(|(i, n, bits)| fill(&signatures()[i], n, &bits))
}

fn with_perm(max: usize) -> impl Strategy<Value = (Structure, Vec<usize>)> {
    structure(max).prop_flat_map(|s| {
        let n = s.size();
        (Just(s), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// An injective map from `0..m` into `0..n`, for `m ≤ n`.
fn injection(n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=n).prop_flat_map(move |m| subsequence((0..n).collect::<Vec<_>>(), m).prop_shuffle())
}

fn builtin_classes() -> Vec<Builtin> {
    Builtin::ALL_NAMES
        .iter()
        .map(|n| Builtin::parse(n, None).unwrap_or_else(|_| Builtin::parse(n, Some(3)).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_ignores_relabelling((s, perm) in with_perm(5)) {
        prop_assert_eq!(canonical_form(&s), canonical_form(&s.relabel(&perm)));
    }

    #[test]
    fn pullbacks_along_injections_are_embeddings(
        (s, f, g) in structure(5).prop_flat_map(|s| {
            let n = s.size();
            (Just(s), injection(n)).prop_flat_map(|(s, f)| {
                let m = f.len();
                (Just(s), Just(f), injection(m))
            })
        })
    ) {
        let mid = s.pullback(&f);
        let low = mid.pullback(&g);
        prop_assert!(is_embedding(&mid, &s, &f));
        prop_assert!(is_embedding(&low, &mid, &g));
        prop_assert!(is_embedding(&low, &s, &compose(&g, &f)));
        prop_assert!(embeds(&low, &s).unwrap());
    }

    #[test]
    fn automorphisms_are_the_self_embeddings(s in structure(4)) {
        let mut auts = enumerate_automorphisms(&s);
        let mut selfs = enumerate_embeddings(&s, &s).unwrap();
        auts.sort();
        selfs.sort();
        prop_assert_eq!(auts, selfs);
    }

    #[test]
    fn age_grows_with_the_structure((s, f) in structure(5).prop_flat_map(|s| {
        let n = s.size();
        (Just(s), injection(n))
    })) {
        let sub = s.pullback(&f);
        let small = age_of(&sub, 3);
        let big = age_of(&s, 3);
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn a_full_base_leaves_only_the_pivot((s, pivot) in structure(5).prop_flat_map(|s| {
        let n = s.size();
        (Just(s), 0..n)
    })) {
        let base: Vec<usize> = (0..s.size()).filter(|&x| x != pivot).collect();
        let class = qf_class(&QfClassSelector { ambient: s, base, pivot }).unwrap();
        prop_assert_eq!(class, vec![pivot]);
    }

    #[test]
    fn builtin_membership_ignores_relabelling(
        (which, n, bits, seed) in (0..13usize, 1..=4usize, prop::collection::vec(any::<bool>(), 1..64), any::<u64>())
    ) {
        let builtins = builtin_classes();
        let b = builtins[which % builtins.len()];
        let k = ClassSpec::builtin(b);
        let s = fill(&b.signature(), n, &bits);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed as usize) % n);
        if seed % 2 == 1 && n > 1 {
            perm.swap(0, n - 1);
        }
        prop_assert_eq!(contains(&k, &s).unwrap(), contains(&k, &s.relabel(&perm)).unwrap());
    }

    #[test]
    fn bad_colourings_avoid_every_copy((a, b) in (structure(2), structure(5))
        .prop_filter("same signature", |(a, b)| a.sig() == b.sig())) {
        for k in 1..=3 {
            if let Some(c) = find_bad_coloring(&a, &b, k).unwrap() {
                prop_assert_eq!(c.assignment.len(), b.size());
                let copies = copy_sets(&a, &b).unwrap();
                prop_assert!(!c.has_monochromatic(&copies));
                // A bad colouring with k colours is one with k + 1.
                if k < 3 {
                    prop_assert!(find_bad_coloring(&a, &b, k + 1).unwrap().is_some());
                }
            }
        }
    }
}

fn sets_sig() -> Arc<Signature> {
    Arc::new(Signature::empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lex_products_decompose_back(
        (sizes, base_bits) in (prop::collection::vec(1..=2usize, 1..=3), prop::collection::vec(any::<bool>(), 9))
    ) {
        let base = fill(&Signature::binary("E"), sizes.len(), &base_bits);
        let base = {
            // Loops are not graph edges; symmetrise and clear the diagonal.
            let mut g = Structure::graph(base.size(), &[]);
            for x in 0..base.size() {
                for y in 0..x {
                    if base.holds(0, &[x, y]) {
                        g.set(0, &[x, y], true);
                        g.set(0, &[y, x], true);
                    }
                }
            }
            g
        };
        let fibers: Vec<Structure> = sizes.iter().map(|&n| Structure::with_sig(&sets_sig(), n)).collect();
        let asm = LexAssembly { l0: sets_sig(), base, fibers };
        let s = lex_structure(&asm).unwrap();
        let k0 = ClassSpec::sets();
        let k1 = ClassSpec::graphs();
        let d = decompose_lex(&s, &k0, &k1).unwrap().expect("a lex product decomposes");
        prop_assert_eq!(lex_structure(&d.assembly).unwrap().size(), s.size());
        prop_assert_eq!(canonical_form(&lex_structure(&d.assembly).unwrap()), canonical_form(&s));
        prop_assert_eq!(canonical_form(&d.assembly.base), canonical_form(&asm.base));
    }

    #[test]
    fn full_product_embeddings_are_coordinatewise(
        (a0, b0, a1, b1) in (1..=2usize, 2..=3usize, 1..=2usize, 2..=3usize)
    ) {
        let grid = |l: usize, r: usize| full_structure(&FullAssembly {
            left: Structure::with_sig(&Signature::empty(), l),
            right: Structure::with_sig(&Signature::empty(), r),
        });
        let small = grid(a0, a1);
        let big = grid(b0.max(a0), b1.max(a1));
        let right_small = a1;
        let right_big = b1.max(a1);
        for f in enumerate_embeddings(&small, &big).unwrap() {
            // Each element's row image depends on its row alone, and likewise
            // for columns.
            for x in 0..small.size() {
                for y in 0..small.size() {
                    let same_row = x / right_small == y / right_small;
                    let same_col = x % right_small == y % right_small;
                    prop_assert_eq!(same_row, f[x] / right_big == f[y] / right_big);
                    prop_assert_eq!(same_col, f[x] % right_big == f[y] % right_big);
                }
            }
        }
    }
}

#[test]
fn injective_witnesses_still_verify() {
    for which in BuiltinConfig::ALL {
        let w = builtin_configuration(which, 3).unwrap();
        assert!(verify_configuration(&w).unwrap().is_pass(), "{which:?}");
        let inj = make_injective(&w).unwrap();
        assert!(inj.is_injective());
        assert!(verify_configuration(&inj).unwrap().is_pass(), "{which:?} made injective");
    }
}

#[test]
fn exhaustive_structure_counts() {
    // Labelled structures on n points: 2^(cells).
    let e = Signature::binary("E");
    assert_eq!(all_structures(&e, 2).count(), 16);
    assert_eq!(all_structures(&Signature::new([("P", 1)]).unwrap(), 3).count(), 8);
}
