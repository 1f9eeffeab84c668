//! Round trips through the DSL and JSON, DOT determinism, and the widths of
//! transferred and composed configurations.

use fraisse_cli::catalog::Catalog;
use fraisse_cli::dot::{export_dot_with, DotStyle};
use fraisse_cli::dsl::{parse_class, parse_dsl, parse_structure, print_class, print_structure, Document, Value};
use fraisse_cli::json::{config_from_json, config_to_json, structure_from_json, structure_to_json};
use fraisse_cli::ops::{compose_builtins, transfer_builtins};
use fraisse_cli::settings::default_catalog;
use fraisse_core::classes::{Builtin, ClassSpec};
use fraisse_core::configurations::{builtin_configuration, BuiltinConfig};
use fraisse_core::kernel::{Signature, Structure};
use proptest::prelude::*;

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

fn signature() -> impl Strategy<Value = Signature> {
    prop::collection::vec(1..=3usize, 0..=3).prop_map(|arities| {
        Signature::new(arities.iter().enumerate().map(|(i, &a)| (format!("R{i}"), a))).unwrap()
    })
}

fn structure() -> impl Strategy<Value = Structure> {
    (signature(), 0..=4usize, prop::collection::vec(prop::bool::weighted(0.3), 1..48))
        .prop_map(|(sig, n, bits)| fill(&sig, n, &bits))
}

fn class() -> impl Strategy<Value = ClassSpec> {
    let leaf = prop::sample::select(vec!["sets", "graphs", "linear_orders", "tournaments", "equivalence_relations"])
        .prop_map(|n| ClassSpec::builtin(Builtin::parse(n, None).unwrap()));
    leaf.prop_recursive(2, 6, 2, |inner| {
        (0..3usize, inner.clone(), inner).prop_map(|(op, a, b)| match op {
            0 => ClassSpec::lex(a, b),
            1 => ClassSpec::full(a, b),
            _ => ClassSpec::superpose(a, b),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn structures_survive_the_dsl(s in structure()) {
        let text = print_structure(&s);
        let back = parse_structure(&text, &Document::default()).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(print_structure(&back), text);
    }

    #[test]
    fn structures_survive_json(s in structure()) {
        prop_assert_eq!(structure_from_json(&structure_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn classes_survive_the_dsl(k in class()) {
        let text = print_class(&k);
        let back = parse_class(&text, &Document::default()).unwrap();
        prop_assert!(back == k, "{} reparsed as {}", text, print_class(&back));
    }

    #[test]
    fn dot_output_is_deterministic(s in structure()) {
        for style in [DotStyle::Collapse, DotStyle::Directed] {
            let a = export_dot_with(&s, style);
            let b = export_dot_with(&s.clone(), style);
            prop_assert_eq!(&a, &b);
            let closed = a.ends_with("}\n");
            prop_assert!(closed);
        }
    }
}

#[test]
fn configurations_survive_json() {
    for which in BuiltinConfig::ALL {
        let w = builtin_configuration(which, 3).unwrap();
        assert_eq!(config_from_json(&config_to_json(&w)).unwrap(), w, "{which:?}");
    }
}

/// Every definition and every DSL-valued field of every case reparses to
/// the same value from its printed form.
#[test]
fn catalog_inputs_survive_the_dsl() {
    let catalog = Catalog::load(&default_catalog()).unwrap();
    assert!(!catalog.cases.is_empty());
    let mut checked = 0;
    for lc in &catalog.cases {
        for s in lc.env.structures.values() {
            assert_eq!(&parse_structure(&print_structure(s), &Document::default()).unwrap(), s);
            checked += 1;
        }
        let op = serde_json::to_value(&lc.case.run).unwrap();
        for text in op.as_object().unwrap().values().filter_map(|v| v.as_str()) {
            match parse_dsl(text, &lc.env) {
                Ok(Value::Structure(s)) => {
                    assert_eq!(parse_structure(&print_structure(&s), &Document::default()).unwrap(), s, "{}", lc.case.id);
                    checked += 1;
                }
                Ok(Value::Class(k)) => {
                    assert!(parse_class(&print_class(&k), &Document::default()).unwrap() == k, "{}", lc.case.id);
                    checked += 1;
                }
                Err(_) => {}
            }
        }
    }
    assert!(checked > 50, "only {checked} inputs checked");
}

#[test]
fn transfers_and_compositions_add_and_multiply_widths() {
    let width = |c: BuiltinConfig| builtin_configuration(c, 2).unwrap().interp.width;
    for mode in ["lex", "full", "super"] {
        for l in BuiltinConfig::ALL {
            for r in BuiltinConfig::ALL {
                let w = transfer_builtins(mode, l, r, 2).unwrap();
                assert_eq!(w.interp.width, width(l) + width(r), "{mode} {l:?} {r:?}");
            }
        }
    }
    let w = compose_builtins(BuiltinConfig::DgToG, BuiltinConfig::GToPo, 2).unwrap();
    assert_eq!(w.interp.width, width(BuiltinConfig::DgToG) * width(BuiltinConfig::GToPo));
}
