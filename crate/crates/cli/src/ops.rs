//! Operations shared by the catalog and the subcommands.
//!
//! Inputs are DSL text so an operation serializes into a catalog file or a
//! cache key unchanged.

use std::fmt;

use anyhow::{anyhow, bail, Context};
use fraisse_core::amalgamation::{
    check_ap, check_ap_instance, check_disjoint_n, check_jep, complete_system, fmt_subset, is_transitivity_pattern,
    transitivity_system, AmalgInstance, AmalgamSearch, PSystem,
};
use fraisse_core::classes::{check_hereditary, enumerate_members, HereditaryVerdict};
use fraisse_core::configurations::{
    builtin_configuration, builtin_configuration_on, check_reductive_subclass, compose_configurations,
    full_config_transfer, lex_config_transfer, make_injective, share_targets, super_config_transfer,
    verify_configuration, BuiltinConfig, ConfigWitness,
};
use fraisse_core::partition::{
    check_dss, check_dss_instance, dss_from_3amalg, dss_instances, find_indivisibility_witness,
    full_indivisibility_witness, lex_indivisibility_witness, super_dss_transfer, verify_dss_witness,
    verify_indivisibility_witness, DssInstance, DssSearch, ProductWitness, WitnessBounds,
};
use fraisse_core::products::{
    age_product_check, aut_order_product_check, decompose_full, FullAssembly, FullVerdict, LexAssembly, ProductMode,
};
use fraisse_core::{ClassSpec, Error, Structure, VerdictKind};
use serde::{Deserialize, Serialize};

use crate::dsl::{parse_class, parse_structure, print_structure, Document};
use crate::json::StructureRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl From<VerdictKind> for Status {
    fn from(v: VerdictKind) -> Self {
        match v {
            VerdictKind::Pass => Status::Pass,
            VerdictKind::Fail => Status::Fail,
            VerdictKind::Inconclusive => Status::Inconclusive,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Status {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "inconclusive" => Ok(Status::Inconclusive),
            other => bail!("unknown verdict {other:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedStructure {
    pub name: String,
    pub structure: StructureRecord,
}

/// Verdict, a deterministic one-line summary and any certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub verdict: Status,
    pub detail: String,
    #[serde(default)]
    pub witnesses: Vec<NamedStructure>,
}

impl Outcome {
    fn new(verdict: Status, detail: impl Into<String>) -> Self {
        Outcome { verdict, detail: detail.into(), witnesses: Vec::new() }
    }

    fn with(mut self, name: impl Into<String>, s: &Structure) -> Self {
        self.witnesses.push(NamedStructure { name: name.into(), structure: s.into() });
        self
    }

    /// Witnesses decoded back to structures.
    pub fn structures(&self) -> anyhow::Result<Vec<(String, Structure)>> {
        self.witnesses.iter().map(|w| Ok((w.name.clone(), w.structure.to_structure()?))).collect()
    }
}

fn default_true() -> bool {
    true
}

/// One bounded computation. Structures and classes are DSL expressions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Operation {
    /// A single amalgamation problem `f0: a → b0`, `f1: a → b1`.
    ApInstance {
        class: String,
        a: String,
        b0: String,
        b1: String,
        f0: Vec<usize>,
        f1: Vec<usize>,
        host: usize,
        #[serde(default)]
        strong: bool,
    },
    CheckAp {
        class: String,
        base: usize,
        host: usize,
        #[serde(default)]
        strong: bool,
    },
    CheckJep {
        class: String,
        base: usize,
        host: usize,
    },
    CheckNamalg {
        class: String,
        n: usize,
        base: usize,
        #[serde(default)]
        pad: usize,
    },
    CheckHp {
        class: String,
        size: usize,
    },
    /// Completion of the three-point system `R(x,y)`, `R(y,z)`, `¬R(x,z)`.
    Transitivity {
        class: String,
        symbol: String,
        #[serde(default)]
        pad: usize,
    },
    DssInstance {
        class: String,
        a: String,
        b: String,
        c: String,
        f: Vec<usize>,
        base: Vec<usize>,
        pivot: usize,
        g: Vec<usize>,
        host: Option<usize>,
    },
    DssCheck {
        class: String,
        size: usize,
        host: Option<usize>,
        #[serde(default)]
        full_range: bool,
    },
    /// Witnesses from disjoint 3-amalgamation for every instance up to `size`.
    DssBuild {
        class: String,
        size: usize,
        #[serde(default = "default_true")]
        full_range: bool,
    },
    /// Witnesses for a superposition assembled from its two components.
    DssSuper {
        left: String,
        right: String,
        size: usize,
        host: Option<usize>,
    },
    IndivisibleSearch {
        class: String,
        pattern: String,
        colors: usize,
        max_size: usize,
    },
    IndivisibleVerify {
        class: String,
        pattern: String,
        colors: usize,
        witness: String,
    },
    /// Witness search for every nonempty member up to `size` as pattern.
    IndivisibleSweep {
        class: String,
        size: usize,
        colors: usize,
        max_size: usize,
    },
    LexWitness {
        left: String,
        right: String,
        pattern: String,
        colors: usize,
    },
    FullWitness {
        left: String,
        right: String,
        pattern: String,
        colors: usize,
    },
    ConfigBuiltin {
        which: String,
        size: usize,
    },
    /// `outer` followed by `inner`, inner entries built on the outer targets.
    ConfigCompose {
        outer: String,
        inner: String,
        size: usize,
    },
    /// Product configuration from two builtins on the products of their
    /// index classes, entries up to `size` points.
    ConfigTransfer {
        mode: String,
        left: String,
        right: String,
        size: usize,
    },
    Reductive {
        sub: String,
        sup: String,
        size: usize,
        #[serde(default)]
        rename: Vec<(String, String)>,
    },
    AutProduct {
        left: String,
        right: String,
    },
    AgeProduct {
        left: String,
        right: String,
        mode: String,
        size: usize,
    },
    DecomposeFull {
        left: String,
        right: String,
        structure: String,
    },
}

impl Operation {
    /// The `op` tag.
    pub fn name(&self) -> String {
        let v = serde_json::to_value(self).expect("operations serialize");
        v["op"].as_str().expect("tagged").to_string()
    }
}

struct Ctx<'a> {
    env: &'a Document,
}

impl Ctx<'_> {
    fn class(&self, text: &str) -> anyhow::Result<ClassSpec> {
        parse_class(text, self.env).with_context(|| format!("class `{text}`"))
    }

    fn structure(&self, text: &str) -> anyhow::Result<Structure> {
        parse_structure(text, self.env).with_context(|| format!("structure `{text}`"))
    }

    /// A structure that must be over the class signature.
    fn member_input(&self, k: &ClassSpec, text: &str) -> anyhow::Result<Structure> {
        let s = self.structure(text)?;
        if s.sig() != k.sig() {
            bail!("`{text}` is over {} but the class is over {}", s.sig(), k.sig());
        }
        Ok(s)
    }
}

/// Soft failures: search budgets become inconclusive outcomes and, for
/// builders, unmet hypotheses become failures.
enum Soft {
    Inconclusive(String),
    Hypothesis(String),
}

fn soften<T>(r: fraisse_core::Result<T>) -> anyhow::Result<Result<T, Soft>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(Error::Inconclusive(m) | Error::Limit(m)) => Ok(Err(Soft::Inconclusive(m))),
        Err(Error::Hypothesis(m)) => Ok(Err(Soft::Hypothesis(m))),
        Err(e) => Err(e.into()),
    }
}

macro_rules! soft {
    ($e:expr) => {
        match soften($e)? {
            Ok(v) => v,
            Err(Soft::Inconclusive(m)) => return Ok(Outcome::new(Status::Inconclusive, m)),
            Err(Soft::Hypothesis(m)) => bail!("hypothesis not met: {m}"),
        }
    };
}

macro_rules! builder {
    ($e:expr) => {
        match soften($e)? {
            Ok(v) => v,
            Err(Soft::Inconclusive(m)) => return Ok(Outcome::new(Status::Inconclusive, m)),
            Err(Soft::Hypothesis(m)) => return Ok(Outcome::new(Status::Fail, format!("hypothesis not met: {m}"))),
        }
    };
}

fn dsl(s: &Structure) -> String {
    print_structure(s)
}

fn describe_ap(inst: &AmalgInstance) -> String {
    format!(
        "a = {}; b0 = {}; b1 = {}; f0 = {:?}; f1 = {:?}",
        dsl(&inst.a),
        dsl(&inst.b0),
        dsl(&inst.b1),
        inst.f0,
        inst.f1
    )
}

fn ap_witnesses(out: Outcome, inst: &AmalgInstance) -> Outcome {
    out.with("a", &inst.a).with("b0", &inst.b0).with("b1", &inst.b1)
}

fn describe_system(sys: &PSystem) -> String {
    let parts: Vec<String> = sys.structures.iter().map(|(p, s)| format!("{} = {}", fmt_subset(*p), dsl(s))).collect();
    format!("n = {}; {}", sys.n, parts.join("; "))
}

fn system_witnesses(mut out: Outcome, sys: &PSystem) -> Outcome {
    for (p, s) in &sys.structures {
        // `A`, `A_0`, `A_0_1`, ...: usable as DSL names.
        let idx: String = (0..sys.n).filter(|i| *p >> i & 1 == 1).map(|i| format!("_{i}")).collect();
        out = out.with(format!("A{idx}"), s);
    }
    out
}

fn describe_dss(inst: &DssInstance) -> String {
    format!(
        "a = {}; b = {}; c = {}; f = {:?}; base = {:?}; pivot = {}; g = {:?}",
        dsl(&inst.a),
        dsl(&inst.b),
        dsl(&inst.c),
        inst.f,
        inst.base,
        inst.pivot,
        inst.g
    )
}

fn dss_witnesses(out: Outcome, inst: &DssInstance) -> Outcome {
    out.with("a", &inst.a).with("b", &inst.b).with("c", &inst.c)
}

fn builtin_config(name: &str) -> anyhow::Result<BuiltinConfig> {
    name.parse::<BuiltinConfig>().map_err(|e| anyhow!("{e}"))
}

fn config_outcome(w: &ConfigWitness, what: &str) -> anyhow::Result<Outcome> {
    let v = verify_configuration(w)?;
    let entries = w.entries.len();
    Ok(match v.failure() {
        None => Outcome::new(
            Status::Pass,
            format!("{what}: width {}, {entries} entries, every tuple checked", w.interp.width),
        ),
        Some(bad) => Outcome::new(Status::Fail, format!("{what}: {bad}"))
            .with("index", &w.entries[bad.entry].index)
            .with("target", &w.entries[bad.entry].target),
    })
}

fn members_up_to(k: &ClassSpec, size: usize, nonempty: bool) -> anyhow::Result<Vec<Structure>> {
    let start = usize::from(nonempty);
    let mut out = Vec::new();
    for n in start..=size {
        out.extend(enumerate_members(k, n)?.iter().cloned());
    }
    Ok(out)
}

/// Builtin witness made injective when it is not already.
fn injective(w: ConfigWitness) -> anyhow::Result<ConfigWitness> {
    Ok(if w.is_injective() { w } else { make_injective(&w)? })
}

/// Builds the product configuration for [`Operation::ConfigTransfer`].
pub fn transfer_builtins(mode: &str, left: BuiltinConfig, right: BuiltinConfig, size: usize) -> anyhow::Result<ConfigWitness> {
    let (k0, k1) = (left.source(), right.source());
    let w0 = builtin_configuration(left, size)?;
    let w1 = builtin_configuration(right, size)?;
    let (w0, w1) = match mode {
        "lex" => (w0, injective(w1)?),
        "full" => (injective(w0)?, injective(w1)?),
        "super" => (w0, w1),
        other => bail!("unknown transfer mode {other:?}; expected lex, full or super"),
    };
    let shared = share_targets(&[w0, w1])?;
    let (w0, w1) = (&shared[0], &shared[1]);
    let w = match mode {
        "lex" => {
            let mut asms = Vec::new();
            for base in members_up_to(&k1, size, false)? {
                let fibres = members_up_to(&k0, size, true)?;
                let mut stack: Vec<Vec<Structure>> = vec![Vec::new()];
                for _ in 0..base.size() {
                    let mut next = Vec::new();
                    for partial in &stack {
                        let used: usize = partial.iter().map(Structure::size).sum();
                        for f in fibres.iter().filter(|f| used + f.size() <= size) {
                            let mut p = partial.clone();
                            p.push(f.clone());
                            next.push(p);
                        }
                    }
                    stack = next;
                }
                for fibers in stack {
                    asms.push(LexAssembly { l0: k0.sig_arc().clone(), base: base.clone(), fibers });
                }
            }
            lex_config_transfer(w0, w1, &asms)?
        }
        "full" => {
            let mut grids = Vec::new();
            for l in members_up_to(&k0, size, true)? {
                for r in members_up_to(&k1, size, true)? {
                    if l.size() * r.size() <= size {
                        grids.push(FullAssembly { left: l.clone(), right: r });
                    }
                }
            }
            full_config_transfer(w0, w1, &grids)?
        }
        _ => {
            let k = ClassSpec::superpose(k0, k1);
            super_config_transfer(w0, w1, &members_up_to(&k, size, false)?)?
        }
    };
    Ok(w)
}

/// Builds `outer` then `inner` on the outer targets and composes them.
pub fn compose_builtins(outer: BuiltinConfig, inner: BuiltinConfig, size: usize) -> anyhow::Result<ConfigWitness> {
    let o = builtin_configuration(outer, size)?;
    let targets: Vec<Structure> = o.entries.iter().map(|e| e.target.clone()).collect();
    let i = injective(builtin_configuration_on(inner, &targets)?)?;
    Ok(compose_configurations(&o, &i)?)
}

fn product_witness_outcome(w: ProductWitness, what: &str) -> Outcome {
    let (d, b) = &w.components;
    let (verdict, check) = match (w.verified, &w.certificate) {
        (Some(true), None) => (Status::Pass, "verified by colouring search".to_string()),
        (Some(true), Some(c)) => {
            (Status::Pass, format!("certified by an embedded sub-product of {} points, verified by colouring search", c.size()))
        }
        (Some(false), _) => (Status::Fail, "rejected by colouring search".to_string()),
        (None, _) => (Status::Inconclusive, "components verified; the product is too large to re-check".to_string()),
    };
    let out = Outcome::new(
        verdict,
        format!(
            "{what} witness on {} points from components of sizes {} and {} ({} base colours), {check}",
            w.witness.size(),
            d.size(),
            b.size(),
            w.base_colors
        ),
    )
    .with("witness", &w.witness)
    .with("first_component", d)
    .with("second_component", b);
    match &w.certificate {
        Some(c) => out.with("certificate", c),
        None => out,
    }
}

/// Runs an operation. `Err` means malformed input or an unexpected error;
/// exhausted search budgets come back as inconclusive outcomes.
pub fn execute(op: &Operation, env: &Document) -> anyhow::Result<Outcome> {
    let cx = Ctx { env };
    match op {
        Operation::ApInstance { class, a, b0, b1, f0, f1, host, strong } => {
            let k = cx.class(class)?;
            let inst = AmalgInstance::new(
                cx.member_input(&k, a)?,
                cx.member_input(&k, b0)?,
                cx.member_input(&k, b1)?,
                f0.clone(),
                f1.clone(),
            )?;
            let kind = if *strong { "strong amalgam" } else { "amalgam" };
            Ok(match soft!(check_ap_instance(&k, &inst, *host, *strong)) {
                AmalgamSearch::Found(am) => {
                    Outcome::new(Status::Pass, format!("{kind} on {} points", am.c.size())).with("amalgam", &am.c)
                }
                AmalgamSearch::NoneUpToBound { exhaustive: true } => Outcome::new(
                    Status::Fail,
                    format!("no {kind} on any universe of at most {host} points; every identification was tried"),
                ),
                AmalgamSearch::NoneUpToBound { exhaustive: false } => Outcome::new(
                    Status::Inconclusive,
                    format!("no {kind} up to {host} points, but larger universes were not tried"),
                ),
            })
        }
        Operation::CheckAp { class, base, host, strong } => {
            let k = cx.class(class)?;
            let v = soft!(check_ap(&k, *base, *host, *strong));
            let what = if *strong { "strong amalgamation" } else { "amalgamation" };
            Ok(match v {
                fraisse_core::Verdict::Pass => {
                    Outcome::new(Status::Pass, format!("{what} holds for bases up to {base} within {host} points"))
                }
                fraisse_core::Verdict::Fail(inst) => {
                    ap_witnesses(Outcome::new(Status::Fail, format!("no amalgam: {}", describe_ap(&inst))), &inst)
                }
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::CheckJep { class, base, host } => {
            let k = cx.class(class)?;
            Ok(match soft!(check_jep(&k, *base, *host)) {
                fraisse_core::Verdict::Pass => {
                    Outcome::new(Status::Pass, format!("joint embeddings exist for members up to {base}"))
                }
                fraisse_core::Verdict::Fail((x, y)) => Outcome::new(
                    Status::Fail,
                    format!("no joint embedding of {} and {}", dsl(&x), dsl(&y)),
                )
                .with("left", &x)
                .with("right", &y),
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::CheckNamalg { class, n, base, pad } => {
            let k = cx.class(class)?;
            Ok(match soft!(check_disjoint_n(&k, *n, *base, *pad)) {
                fraisse_core::Verdict::Pass => Outcome::new(
                    Status::Pass,
                    format!("every base system with parts up to {base} completes ({n}-amalgamation)"),
                ),
                fraisse_core::Verdict::Fail(sys) => system_witnesses(
                    Outcome::new(Status::Fail, format!("system without completion: {}", describe_system(&sys))),
                    &sys,
                ),
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::CheckHp { class, size } => {
            let k = cx.class(class)?;
            Ok(match soft!(check_hereditary(&k, *size)) {
                HereditaryVerdict::Pass => {
                    Outcome::new(Status::Pass, format!("closed under substructures up to size {size}"))
                }
                HereditaryVerdict::Counterexample { member, subset } => Outcome::new(
                    Status::Fail,
                    format!("{} has a substructure on {subset:?} outside the class", dsl(&member)),
                )
                .with("member", &member),
            })
        }
        Operation::Transitivity { class, symbol, pad } => {
            let k = cx.class(class)?;
            let sys = transitivity_system(&k, symbol)?;
            let r = k.sig().index_of(symbol).expect("checked by transitivity_system");
            if !is_transitivity_pattern(&sys, r)? {
                bail!("the system built for {symbol} does not realize the transitivity pattern");
            }
            Ok(match soft!(complete_system(&k, &sys, *pad)) {
                Some(c) => Outcome::new(Status::Pass, format!("completed on {} points", c.top.size())).with("top", &c.top),
                None => system_witnesses(
                    Outcome::new(
                        Status::Fail,
                        format!("{symbol}(x,y), {symbol}(y,z), not {symbol}(x,z) has no completion; {}", describe_system(&sys)),
                    ),
                    &sys,
                ),
            })
        }
        Operation::DssInstance { class, a, b, c, f, base, pivot, g, host } => {
            let k = cx.class(class)?;
            let inst = DssInstance {
                a: cx.member_input(&k, a)?,
                b: cx.member_input(&k, b)?,
                c: cx.member_input(&k, c)?,
                f: f.clone(),
                base: base.clone(),
                pivot: *pivot,
                g: g.clone(),
            };
            inst.validate()?;
            let host = host.unwrap_or_else(|| inst.default_host());
            Ok(match soft!(check_dss_instance(&k, &inst, host)) {
                DssSearch::Found(w) => {
                    Outcome::new(Status::Pass, format!("extension found on {} points", w.d.size())).with("d", &w.d)
                }
                DssSearch::NoneUpToBound { exhaustive: true } => Outcome::new(
                    Status::Fail,
                    format!("no extension within {host} points; every placement was tried"),
                ),
                DssSearch::NoneUpToBound { exhaustive: false } => {
                    Outcome::new(Status::Inconclusive, format!("no extension within {host} points"))
                }
            })
        }
        Operation::DssCheck { class, size, host, full_range } => {
            let k = cx.class(class)?;
            Ok(match soft!(check_dss(&k, *size, *host, *full_range)) {
                fraisse_core::Verdict::Pass => {
                    Outcome::new(Status::Pass, format!("every instance up to size {size} extends"))
                }
                fraisse_core::Verdict::Fail(inst) => dss_witnesses(
                    Outcome::new(Status::Fail, format!("instance without extension: {}", describe_dss(&inst))),
                    &inst,
                ),
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::DssBuild { class, size, full_range } => {
            let k = cx.class(class)?;
            let insts = dss_instances(&k, *size, *full_range)?;
            for inst in &insts {
                let w = builder!(dss_from_3amalg(&k, inst));
                if !verify_dss_witness(&k, inst, &w)? {
                    return Ok(dss_witnesses(
                        Outcome::new(Status::Fail, format!("built witness rejected for {}", describe_dss(inst))),
                        inst,
                    ));
                }
            }
            Ok(Outcome::new(Status::Pass, format!("{} instances, every built witness verified", insts.len())))
        }
        Operation::DssSuper { left, right, size, host } => {
            let (k0, k1) = (cx.class(left)?, cx.class(right)?);
            let sk = ClassSpec::superpose(k0.clone(), k1.clone());
            let insts = dss_instances(&sk, *size, false)?;
            for inst in &insts {
                let h = host.unwrap_or_else(|| inst.default_host());
                let w = builder!(super_dss_transfer(&k0, &k1, inst, h));
                if !verify_dss_witness(&sk, inst, &w)? {
                    return Ok(dss_witnesses(
                        Outcome::new(Status::Fail, format!("transferred witness rejected for {}", describe_dss(inst))),
                        inst,
                    ));
                }
            }
            Ok(Outcome::new(Status::Pass, format!("{} instances, every transferred witness verified", insts.len())))
        }
        Operation::IndivisibleSearch { class, pattern, colors, max_size } => {
            let k = cx.class(class)?;
            let a = cx.member_input(&k, pattern)?;
            Ok(match soft!(find_indivisibility_witness(&k, &a, *colors, *max_size)) {
                Some(b) => Outcome::new(
                    Status::Pass,
                    format!("smallest witness has {} points (all smaller sizes exhausted)", b.size()),
                )
                .with("witness", &b),
                None => Outcome::new(Status::Inconclusive, format!("no witness up to {max_size} points")),
            })
        }
        Operation::IndivisibleVerify { class, pattern, colors, witness } => {
            let k = cx.class(class)?;
            let a = cx.member_input(&k, pattern)?;
            let b = cx.member_input(&k, witness)?;
            Ok(if soft!(verify_indivisibility_witness(&k, &a, *colors, &b)) {
                Outcome::new(Status::Pass, format!("every {colors}-colouring has a monochromatic copy"))
            } else {
                let bad = fraisse_core::partition::find_bad_coloring(&a, &b, *colors)?.expect("rejected witness");
                Outcome::new(Status::Fail, format!("colouring {:?} has no monochromatic copy", bad.assignment))
            })
        }
        Operation::IndivisibleSweep { class, size, colors, max_size } => {
            let k = cx.class(class)?;
            let mut found = Vec::new();
            let mut missing = Vec::new();
            for a in members_up_to(&k, *size, true)? {
                match soft!(find_indivisibility_witness(&k, &a, *colors, *max_size)) {
                    Some(b) => found.push(b.size()),
                    None => missing.push(a),
                }
            }
            let sizes = found.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
            Ok(match missing.first() {
                None => Outcome::new(Status::Pass, format!("{} patterns, witness sizes [{sizes}]", found.len())),
                Some(a) => Outcome::new(
                    Status::Inconclusive,
                    format!("{} of {} patterns lack a witness up to {max_size} points", missing.len(), missing.len() + found.len()),
                )
                .with("first_open_pattern", a),
            })
        }
        Operation::LexWitness { left, right, pattern, colors } => {
            let (k0, k1) = (cx.class(left)?, cx.class(right)?);
            let a = cx.member_input(&ClassSpec::lex(k0.clone(), k1.clone()), pattern)?;
            let w = builder!(lex_indivisibility_witness(&k0, &k1, &a, *colors, &WitnessBounds::default()));
            Ok(product_witness_outcome(w, "lexicographic"))
        }
        Operation::FullWitness { left, right, pattern, colors } => {
            let (k0, k1) = (cx.class(left)?, cx.class(right)?);
            let a = cx.member_input(&ClassSpec::full(k0.clone(), k1.clone()), pattern)?;
            let w = builder!(full_indivisibility_witness(&k0, &k1, &a, *colors, &WitnessBounds::default()));
            Ok(product_witness_outcome(w, "full product"))
        }
        Operation::ConfigBuiltin { which, size } => {
            let w = soft!(builtin_configuration(builtin_config(which)?, *size));
            config_outcome(&w, which)
        }
        Operation::ConfigCompose { outer, inner, size } => {
            let w = compose_builtins(builtin_config(outer)?, builtin_config(inner)?, *size)?;
            config_outcome(&w, &format!("{outer} then {inner}"))
        }
        Operation::ConfigTransfer { mode, left, right, size } => {
            let w = transfer_builtins(mode, builtin_config(left)?, builtin_config(right)?, *size)?;
            config_outcome(&w, &format!("{mode} transfer of {left} and {right}"))
        }
        Operation::Reductive { sub, sup, size, rename } => {
            let (k0, k1) = (cx.class(sub)?, cx.class(sup)?);
            Ok(match soft!(check_reductive_subclass(&k0, &k1, *size, rename)) {
                fraisse_core::Verdict::Pass => {
                    Outcome::new(Status::Pass, format!("every member up to size {size} is a reduct"))
                }
                fraisse_core::Verdict::Fail(s) => {
                    Outcome::new(Status::Fail, format!("{} is no reduct of a member", dsl(&s))).with("member", &s)
                }
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::AutProduct { left, right } => {
            let (a, b) = (cx.structure(left)?, cx.structure(right)?);
            Ok(match soft!(aut_order_product_check(&a, &b)) {
                fraisse_core::Verdict::Pass => Outcome::new(Status::Pass, "both automorphism counts match"),
                fraisse_core::Verdict::Fail(m) => Outcome::new(
                    Status::Fail,
                    format!("{} product: expected {} automorphisms, found {}", m.mode, m.expected, m.actual),
                ),
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::AgeProduct { left, right, mode, size } => {
            let (a, b) = (cx.structure(left)?, cx.structure(right)?);
            let mode: ProductMode = mode.parse()?;
            Ok(match soft!(age_product_check(&a, &b, mode, *size)) {
                fraisse_core::Verdict::Pass => {
                    Outcome::new(Status::Pass, format!("{mode} ages agree up to size {size}"))
                }
                fraisse_core::Verdict::Fail(m) => {
                    let side = if m.only_in_product_age { "the product's age" } else { "the product of ages" };
                    Outcome::new(Status::Fail, format!("shape only in {side}")).with("shape", m.shape.structure())
                }
                fraisse_core::Verdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
        Operation::DecomposeFull { left, right, structure } => {
            let (k0, k1) = (cx.class(left)?, cx.class(right)?);
            let s = cx.structure(structure)?;
            Ok(match soft!(decompose_full(&s, &k0, &k1, s.size())) {
                FullVerdict::Accept(d) => Outcome::new(
                    Status::Pass,
                    format!("embeds into a product of hosts of sizes {} and {}", d.hosts.0.size(), d.hosts.1.size()),
                )
                .with("host0", &d.hosts.0)
                .with("host1", &d.hosts.1),
                FullVerdict::Reject(why) => Outcome::new(Status::Fail, why),
                FullVerdict::Inconclusive(m) => Outcome::new(Status::Inconclusive, m),
            })
        }
    }
}
