//! Acceptance suite: one PASS/FAIL line per criterion, with its time budget.
//! Runs without the libtest harness so the lines are always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fraisse_cli::catalog::{render_json, render_text, run_cases, Catalog};
use fraisse_cli::ops::{compose_builtins, transfer_builtins, Status};
use fraisse_cli::runner::Runner;
use fraisse_cli::settings::default_catalog;
use fraisse_core::amalgamation::{check_ap, check_ap_instance, check_disjoint_n, AmalgInstance, AmalgamSearch};
use fraisse_core::classes::enumerate_members;
use fraisse_core::configurations::{
    builtin_configuration, make_injective, verify_configuration, BuiltinConfig, ConfigEntry, ConfigWitness,
    Interpretation,
};
use fraisse_core::kernel::embeds;
use fraisse_core::partition::{
    check_dss, check_dss_instance, copy_sets, dss_from_3amalg, dss_instances, find_bad_coloring,
    find_indivisibility_witness, full_indivisibility_witness, lex_indivisibility_witness, super_dss_transfer,
    verify_dss_witness, verify_indivisibility_witness, DssInstance, DssSearch, WitnessBounds,
};
use fraisse_core::products::{
    age_product_check, aut_order_product_check, decompose_full, full_structure, FullAssembly, FullLayout, FullVerdict,
    ProductMode,
};
use fraisse_core::{Builtin, ClassSpec, Error, Signature, Structure};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn lo() -> ClassSpec {
    ClassSpec::builtin(Builtin::LinearOrders)
}
fn eqv() -> ClassSpec {
    ClassSpec::builtin(Builtin::EquivalenceRelations)
}
fn tournaments() -> ClassSpec {
    ClassSpec::builtin(Builtin::Tournaments)
}

fn members(k: &ClassSpec, from: usize, to: usize) -> Result<Vec<Structure>, String> {
    let mut out = Vec::new();
    for n in from..=to {
        out.extend(ok(enumerate_members(k, n))?.iter().cloned());
    }
    Ok(out)
}

/// Per-case wall-clock budgets for the headline catalog cases.
const CATALOG_BUDGETS: &[(&str, u64)] = &[
    ("planar-k33-no-amalgam", 120),
    ("forest-five-cycle-no-amalgam", 10),
    ("transitive-linear-orders-no-3-amalgam", 30),
    ("transitive-equivalences-no-3-amalgam", 30),
    ("transitive-partial-orders-no-3-amalgam", 30),
    ("graphs-3-amalgamation", 60),
    ("tournaments-3-amalgamation", 60),
];

fn criterion_1() -> Check {
    let catalog = ok(Catalog::load(&default_catalog()))?;
    let runner = ok(Runner::new(1, None, 0.0))?;
    let reports = run_cases(&catalog.cases, &runner, None);
    let bad: Vec<&str> = reports.iter().filter(|r| r.status != Status::Pass).map(|r| r.id.as_str()).collect();
    ensure!(bad.is_empty(), "cases not ok: {bad:?}");
    for &(id, secs) in CATALOG_BUDGETS {
        let r = reports.iter().find(|r| r.id == id).ok_or(format!("missing case {id}"))?;
        ensure!(r.wall < Duration::from_secs(secs), "{id} took {:?}, budget {secs}s", r.wall);
    }
    Ok(format!("{} cases ok, headline cases within budget", reports.len()))
}

fn grid(cells: &[(usize, usize)]) -> Structure {
    let k = ClassSpec::full(ClassSpec::sets(), ClassSpec::sets());
    let mut s = Structure::new(k.sig_arc().clone(), cells.len());
    for (x, &(r0, c0)) in cells.iter().enumerate() {
        for (y, &(r1, c1)) in cells.iter().enumerate() {
            s.set(0, &[x, y], r0 == r1);
            s.set(1, &[x, y], c0 == c1);
        }
    }
    s
}

fn criterion_2() -> Check {
    let lexlo = ClassSpec::lex(lo(), lo());
    ensure!(ok(check_ap(&lexlo, 3, 6, true))?.is_pass(), "Lex(LO,LO) strong amalgamation failed");

    let full_sets = ClassSpec::full(ClassSpec::sets(), ClassSpec::sets());
    let b = grid(&[(0, 0), (1, 1), (0, 1)]);
    let inst = ok(AmalgInstance::new(b.pullback(&[0, 1]), b.clone(), b, vec![0, 1], vec![0, 1]))?;
    let strong = ok(check_ap_instance(&full_sets, &inst, 8, true))?;
    ensure!(
        strong == AmalgamSearch::NoneUpToBound { exhaustive: true },
        "antidiagonal instance: expected no strong amalgam, got {strong:?}"
    );

    for k in [ClassSpec::lex(ClassSpec::sets(), ClassSpec::sets()), full_sets] {
        ensure!(ok(check_disjoint_n(&k, 3, 2, 0))?.is_fail(), "{k} unexpectedly has disjoint 3-amalgamation");
    }
    let sup = ClassSpec::superpose(ClassSpec::graphs(), ClassSpec::graphs());
    ensure!(ok(check_disjoint_n(&sup, 3, 2, 0))?.is_pass(), "Super(graphs,graphs) failed disjoint 3-amalgamation");
    Ok("Lex(LO,LO) SAP; Full(sets,sets) SAP instance fails; 3-amalgamation fails for lex/full sets, holds for Super(graphs,graphs)".into())
}

/// Every `k`-colouring of `b`, checked directly.
fn brute_force_bad_colouring(a: &Structure, b: &Structure, k: usize) -> Result<bool, String> {
    let copies = ok(copy_sets(a, b))?;
    let n = b.size();
    let total = k.pow(n as u32);
    for code in 0..total {
        let colour: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
        let mono = copies.iter().any(|c| c.iter().all(|&x| colour[x] == colour[c[0]]));
        if !mono {
            return Ok(true);
        }
    }
    Ok(false)
}

fn criterion_3() -> Check {
    let graphs = ClassSpec::graphs();
    let k2 = Structure::graph(2, &[(0, 1)]);
    let w = ok(find_indivisibility_witness(&graphs, &k2, 2, 6))?.ok_or("no witness for K2")?;
    ensure!(w.size() == 3, "K2 witness has {} points", w.size());
    for g in members(&graphs, 0, 2)? {
        ensure!(!ok(verify_indivisibility_witness(&graphs, &k2, 2, &g))?, "{g} should not be a K2 witness");
    }

    let sets = ClassSpec::sets();
    let bounds = WitnessBounds::default();
    let (mut checked, mut certified, mut largest) = (0, 0, 0);
    for (name, product) in [("lex", ClassSpec::lex(sets.clone(), sets.clone())), ("full", ClassSpec::full(sets.clone(), sets.clone()))] {
        for a in members(&product, 1, 3)? {
            let pw = if name == "lex" {
                ok(lex_indivisibility_witness(&sets, &sets, &a, 2, &bounds))?
            } else {
                ok(full_indivisibility_witness(&sets, &sets, &a, 2, &bounds))?
            };
            // A certificate is a sub-product embedded in the witness; any
            // colouring of the witness restricts to it.
            let checked_structure = match &pw.certificate {
                Some(c) => {
                    ensure!(ok(embeds(c, &pw.witness))?, "{name}: certificate for {a} does not embed");
                    certified += 1;
                    c
                }
                None => &pw.witness,
            };
            ensure!(
                ok(verify_indivisibility_witness(&product, &a, 2, checked_structure))?,
                "{name} witness for {a} fails verification"
            );
            largest = largest.max(pw.witness.size());
            checked += 1;
        }
    }

    let mut cases = 0;
    for a in members(&graphs, 1, 2)? {
        for b in members(&graphs, 0, 4)? {
            let fast = ok(find_bad_coloring(&a, &b, 2))?.is_some();
            let slow = brute_force_bad_colouring(&a, &b, 2)?;
            ensure!(fast == slow, "colouring verdicts differ for a = {a}, b = {b}");
            cases += 1;
        }
    }
    Ok(format!(
        "K2 witness has 3 points and is minimal; {checked} product witnesses verify \
         ({certified} through an embedded sub-product, largest {largest} points); {cases} colouring cases agree"
    ))
}

fn point_into(b: Structure, c: Structure, base: Vec<usize>, pivot: usize) -> DssInstance {
    DssInstance { a: b.pullback(&[0]), b, c, f: vec![0], base, pivot, g: vec![pivot] }
}

fn criterion_4() -> Check {
    let lex_sets = ClassSpec::lex(ClassSpec::sets(), ClassSpec::sets());
    let lex_e = |n: usize, pairs: &[(usize, usize)]| {
        let mut s = Structure::new(lex_sets.sig_arc().clone(), n);
        for x in 0..n {
            s.set(0, &[x, x], true);
        }
        for &(x, y) in pairs {
            s.set(0, &[x, y], true);
            s.set(0, &[y, x], true);
        }
        s
    };
    let e = eqv();
    let eq = |n: usize, classes: &[usize]| {
        let mut s = Structure::new(e.sig_arc().clone(), n);
        for x in 0..n {
            for y in 0..n {
                s.set(0, &[x, y], classes[x] == classes[y]);
            }
        }
        s
    };
    let documented = [
        (lex_sets.clone(), point_into(lex_e(2, &[]), lex_e(2, &[(0, 1)]), vec![0], 1), 10),
        (
            ClassSpec::full(ClassSpec::sets(), ClassSpec::sets()),
            point_into(grid(&[(0, 0), (1, 1)]), grid(&[(0, 0), (0, 1)]), vec![0], 1),
            10,
        ),
        (e.clone(), point_into(eq(2, &[0, 1]), eq(3, &[0, 1, 0]), vec![0, 1], 2), 8),
    ];
    for (k, inst, host) in &documented {
        let r = ok(check_dss_instance(k, inst, *host))?;
        ensure!(r == DssSearch::NoneUpToBound { exhaustive: true }, "{k}: documented instance got {r:?}");
    }
    ensure!(ok(check_dss(&ClassSpec::builtin(Builtin::UnaryAll), 2, None, false))?.is_fail(), "unary_all passed");
    ensure!(ok(check_dss(&e, 3, None, false))?.is_fail(), "equivalence relations passed");
    for k in [ClassSpec::graphs(), tournaments()] {
        ensure!(ok(check_dss(&k, 2, Some(5), false))?.is_pass(), "{k} failed self-similarity at size 2, host 5");
    }

    let mut built = 0;
    for k in [ClassSpec::graphs(), tournaments(), lo(), ClassSpec::builtin(Builtin::UnaryAll)] {
        for inst in ok(dss_instances(&k, 2, true))? {
            match dss_from_3amalg(&k, &inst) {
                Ok(w) => {
                    ensure!(ok(verify_dss_witness(&k, &inst, &w))?, "{k}: built witness rejected");
                    built += 1;
                }
                Err(Error::Hypothesis(_)) => {}
                Err(other) => return Err(format!("{k}: {other}")),
            }
        }
    }
    let sup = ClassSpec::superpose(ClassSpec::graphs(), ClassSpec::graphs());
    let insts = ok(dss_instances(&sup, 2, false))?;
    for inst in &insts {
        let w = ok(super_dss_transfer(&ClassSpec::graphs(), &ClassSpec::graphs(), inst, inst.default_host()))?;
        ensure!(ok(verify_dss_witness(&sup, inst, &w))?, "transferred witness rejected");
    }
    Ok(format!(
        "documented counter-instances rejected; graphs and tournaments pass; {built} built and {} transferred witnesses verify",
        insts.len()
    ))
}

fn criterion_5() -> Check {
    // The automorphism identities need nonempty factors.
    let mut pool = members(&ClassSpec::sets(), 1, 3)?;
    pool.extend(members(&ClassSpec::graphs(), 1, 3)?);
    let mut pairs = 0;
    for a in &pool {
        for b in &pool {
            ensure!(ok(aut_order_product_check(a, b))?.is_pass(), "automorphism identity fails for {a}, {b}");
            for mode in [ProductMode::Lex, ProductMode::Full] {
                ensure!(ok(age_product_check(a, b, mode, 3))?.is_pass(), "{mode} age identity fails for {a}, {b}");
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, both product modes"))
}

/// Random witness reading plain sets into a random graph; maps need not be
/// injective, and with no source symbols any map verifies.
fn random_sets_witness(rng: &mut ChaCha8Rng) -> ConfigWitness {
    let m_size = rng.gen_range(3..7);
    let edges: Vec<(usize, usize)> =
        (0..m_size).flat_map(|x| (0..x).map(move |y| (x, y))).filter(|_| rng.gen_bool(0.5)).collect();
    let m = Structure::graph(m_size, &edges);
    let interp = Interpretation::new(Arc::new(Signature::empty()), m.sig_arc().clone(), 1, vec![]).unwrap();
    let entries = (0..=rng.gen_range(1..=m_size))
        .map(|n| ConfigEntry {
            index: Structure::plain(n),
            target: m.clone(),
            map: (0..n).map(|_| vec![rng.gen_range(0..m_size)]).collect(),
        })
        .collect();
    ConfigWitness { interp, entries }
}

/// A builtin witness with shuffled targets and a random subset of entries.
fn random_builtin_witness(rng: &mut ChaCha8Rng) -> ConfigWitness {
    let which = *BuiltinConfig::ALL.choose(rng).unwrap();
    let mut w = builtin_configuration(which, 3).unwrap();
    w.entries.retain(|_| rng.gen_bool(0.6));
    for e in &mut w.entries {
        let mut perm: Vec<usize> = (0..e.target.size()).collect();
        perm.shuffle(rng);
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        // New element i is old element perm[i].
        e.target = e.target.pullback(&perm);
        for block in &mut e.map {
            for x in block.iter_mut() {
                *x = inv[*x];
            }
        }
    }
    w
}

fn criterion_6() -> Check {
    let mut entries = 0;
    for which in BuiltinConfig::ALL {
        let w = ok(builtin_configuration(which, 4))?;
        ensure!(ok(verify_configuration(&w))?.is_pass(), "{which} fails verification");
        entries += w.entries.len();
    }
    let composed = ok(compose_builtins(BuiltinConfig::DgToG, BuiltinConfig::GToPo, 3))?;
    ensure!(ok(verify_configuration(&composed))?.is_pass(), "composed DG to PO fails verification");

    let mut transfers = 0;
    for left in BuiltinConfig::ALL {
        for right in BuiltinConfig::ALL {
            for mode in ["lex", "full", "super"] {
                let w = ok(transfer_builtins(mode, left, right, 3))?;
                ensure!(ok(verify_configuration(&w))?.is_pass(), "{mode} transfer of {left}, {right} fails");
                transfers += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..20 {
        let w = if i % 2 == 0 { random_sets_witness(&mut rng) } else { random_builtin_witness(&mut rng) };
        ensure!(ok(verify_configuration(&w))?.is_pass(), "random witness {i} does not verify");
        let inj = ok(make_injective(&w))?;
        ensure!(inj.is_injective(), "random witness {i}: not injective after make_injective");
        ensure!(ok(verify_configuration(&inj))?.is_pass(), "random witness {i}: verification lost");
    }
    Ok(format!("{entries} builtin entries, composition and {transfers} transfers verify; 20 random witnesses made injective"))
}

/// Membership by definition: `s` embeds into `D ⊠ B` for members of size
/// at most `|s|`.
fn full_oracle(s: &Structure, left: &[Structure], right: &[Structure]) -> Result<bool, String> {
    let n = s.size();
    for d in left.iter().filter(|d| d.size() <= n.max(1)) {
        for b in right.iter().filter(|b| b.size() <= n.max(1)) {
            if d.size() * b.size() < n {
                continue;
            }
            if ok(embeds(s, &full_structure(&FullAssembly { left: d.clone(), right: b.clone() })))? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn all_binary(n: usize) -> Vec<Vec<(usize, usize)>> {
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    (0..1u32 << cells.len())
        .map(|mask| cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect())
        .collect()
}

fn is_equivalence(n: usize, pairs: &[(usize, usize)]) -> bool {
    let has = |x, y| pairs.contains(&(x, y));
    (0..n).all(|x| has(x, x))
        && pairs.iter().all(|&(x, y)| has(y, x))
        && pairs.iter().all(|&(x, y)| (0..n).all(|z| !has(y, z) || has(x, z)))
}

fn criterion_7() -> Check {
    let sets = ClassSpec::sets();
    let graphs = ClassSpec::graphs();
    let mut compared = 0;
    for (k0, k1) in [(sets.clone(), sets.clone()), (graphs.clone(), sets.clone())] {
        let layout = FullLayout::new(k0.sig(), k1.sig());
        let (left, right) = (members(&k0, 0, 3)?, members(&k1, 0, 3)?);
        let (e0, e1) = (layout.e0(), layout.e1());
        let has_l0 = !k0.sig().is_empty();
        for n in 0..=3 {
            let rels = all_binary(n);
            let equiv: Vec<bool> = rels.iter().map(|r| is_equivalence(n, r)).collect();
            for (i0, r0) in rels.iter().enumerate() {
                for (i1, r1) in rels.iter().enumerate() {
                    // The L0 relation only matters once both equivalences hold;
                    // otherwise two representatives stand in for all of them.
                    let l0_choices: Vec<&Vec<(usize, usize)>> = if !has_l0 {
                        vec![&rels[0]]
                    } else if (equiv[i0] && equiv[i1]) || n < 3 {
                        rels.iter().collect()
                    } else {
                        vec![&rels[0], &rels[rels.len() - 1]]
                    };
                    for l0 in l0_choices {
                        let mut s = Structure::new(layout.sig.clone(), n);
                        for &(x, y) in r0 {
                            s.set(e0, &[x, y], true);
                        }
                        for &(x, y) in r1 {
                            s.set(e1, &[x, y], true);
                        }
                        if has_l0 {
                            for &(x, y) in l0 {
                                s.set(0, &[x, y], true);
                            }
                        }
                        let verdict = ok(decompose_full(&s, &k0, &k1, n.max(1)))?;
                        ensure!(!matches!(verdict, FullVerdict::Inconclusive(_)), "inconclusive on {s}");
                        let oracle = full_oracle(&s, &left, &right)?;
                        ensure!(verdict.is_accept() == oracle, "decompose_full disagrees with the oracle on {s}");
                        compared += 1;
                    }
                }
            }
        }
    }
    for k in [graphs, lo(), eqv()] {
        let disjoint = ok(check_disjoint_n(&k, 2, 2, 0))?.kind();
        let strong = ok(check_ap(&k, 2, 6, true))?.kind();
        ensure!(disjoint == strong, "{k}: disjoint 2-amalgamation {disjoint}, strong amalgamation {strong}");
    }
    Ok(format!("{compared} structures agree with the embedding oracle; disjoint 2-amalgamation equals SAP on graphs, LO, E"))
}

fn criterion_8() -> Check {
    let catalog = ok(Catalog::load(&default_catalog()))?;
    let run = |jobs| -> Result<(String, String), String> {
        let runner = ok(Runner::new(jobs, None, 0.0))?;
        let reports = run_cases(&catalog.cases, &runner, None);
        Ok((render_text(&reports), render_json(&reports)))
    };
    let first = run(1)?;
    let second = run(8)?;
    ensure!(first.0 == second.0, "text reports differ between 1 and 8 jobs");
    ensure!(first.1 == second.1, "JSON reports differ between 1 and 8 jobs");
    let third = run(8)?;
    ensure!(second == third, "consecutive runs with 8 jobs differ");
    Ok(format!("{} bytes of report identical across 1, 8, 8 jobs", first.0.len()))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 8] = [
        (1, "repro catalog", 600, criterion_1),
        (2, "product amalgamation theorems", 300, criterion_2),
        (3, "indivisibility", 300, criterion_3),
        (4, "definable self-similarity", 600, criterion_4),
        (5, "automorphism and age identities", 120, criterion_5),
        (6, "configurations", 300, criterion_6),
        (7, "oracle equivalences", 600, criterion_7),
        (8, "determinism", 600, criterion_8),
    ];
    let mut failed = 0;
    for (n, name, budget, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let wall = start.elapsed();
        let result = match result {
            Ok(d) if wall > Duration::from_secs(budget) => Err(format!("{d}; but took {wall:.1?}, budget {budget}s")),
            other => other,
        };
        match result {
            Ok(d) => println!("criterion {n} PASS  {name} ({:.1}s of {budget}s): {d}", wall.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {n} FAIL  {name} ({:.1}s of {budget}s): {e}", wall.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
