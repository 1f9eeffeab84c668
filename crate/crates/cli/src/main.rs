use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fraisse_cli::cache::Cache;
use fraisse_cli::catalog::{exit_code, render_json, render_text, run_cases, summary, Catalog};
use fraisse_cli::dot::{export_dot_with, DotStyle};
use fraisse_cli::dsl::{parse_class, parse_document, parse_structure, print_class, print_structure, Document};
use fraisse_cli::json::{config_from_json, config_to_json, structure_from_json, structure_to_json};
use fraisse_cli::ops::{compose_builtins, transfer_builtins, Operation, Outcome, Status};
use fraisse_cli::runner::{RunResult, Runner};
use fraisse_cli::settings::{Settings, SettingsFile};
use fraisse_core::classes::enumerate_members;
use fraisse_core::configurations::{
    builtin_configuration, compose_configurations, make_injective, verify_configuration, BuiltinConfig, ConfigWitness,
};
use fraisse_core::products::{full_structure, lex_structure, superpose_structures, FullAssembly, LexAssembly, Superposition};
use fraisse_core::Structure;

const EXIT_USAGE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Dsl,
    Json,
}

/// Bounded checkers and builders for classes of finite relational structures.
///
/// Structure and class arguments take DSL text, `@path` to read it from a
/// file, or a JSON structure record. Exit status: 0 pass, 1 fail,
/// 2 inconclusive, 3 usage error.
#[derive(Parser, Debug)]
#[command(name = "fraisse", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for cached results; caching is off without it.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Seconds per operation; fractions allowed.
    #[arg(long, global = true, value_parser = parse_seconds)]
    time_limit: Option<Duration>,
    /// TOML settings file (jobs, cache_dir, time_limit, format, catalog, resample).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// DSL file of `let`/`class` definitions usable by name.
    #[arg(long, global = true)]
    defs: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Amalgamation-type properties of a class.
    Check(CheckArgs),
    /// Partition properties: witnesses that every colouring has a monochromatic copy.
    #[command(subcommand)]
    Indivisible(IndivisibleCmd),
    /// Definable self-similarity.
    #[command(subcommand)]
    Dss(DssCmd),
    /// Product structures and the product identities.
    #[command(subcommand)]
    Product(ProductCmd),
    /// Configuration witnesses.
    #[command(subcommand)]
    Config(ConfigCmd),
    /// Run catalog cases and compare with their expected verdicts.
    Repro(ReproArgs),
    /// Members of a class of a given size, up to isomorphism.
    Enumerate(EnumerateArgs),
    /// Convert a structure to DOT, JSON or DSL.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Ap,
    Sap,
    Jep,
    Hp,
    Namalg,
    Transitivity,
}

#[derive(Args, Debug)]
struct CheckArgs {
    kind: CheckKind,
    #[arg(long)]
    class: String,
    /// Largest base (or member) size examined.
    #[arg(long, default_value_t = 2)]
    base: usize,
    /// Largest amalgam universe tried.
    #[arg(long)]
    host: Option<usize>,
    /// Require strong amalgams (same as `sap`).
    #[arg(long)]
    strong: bool,
    /// Arity of the amalgamation systems for `namalg`.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Extra points allowed beyond the colimit for `namalg` and `transitivity`.
    #[arg(long, default_value_t = 0)]
    pad: usize,
    /// Binary symbol for `transitivity`.
    #[arg(long, default_value = "E")]
    symbol: String,
}

#[derive(Subcommand, Debug)]
enum IndivisibleCmd {
    /// Check a proposed witness.
    Verify {
        #[arg(long)]
        class: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        witness: String,
    },
    /// Smallest witness up to a size bound.
    Search {
        #[arg(long)]
        class: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        colors: usize,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
    /// Witness search for every member up to `--size`; the experiment
    /// harness for classes such as superpositions.
    Sweep {
        #[arg(long)]
        class: String,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        colors: usize,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
    /// Witness for a lexicographic product built from component witnesses.
    Lex(ProductWitnessArgs),
    /// Witness for a full product built from component witnesses.
    Full(ProductWitnessArgs),
}

#[derive(Args, Debug)]
struct ProductWitnessArgs {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    colors: usize,
}

#[derive(Subcommand, Debug)]
enum DssCmd {
    /// Every instance up to `--size`.
    Check {
        #[arg(long)]
        class: String,
        #[arg(long)]
        size: usize,
        /// Defaults to |B| + |C| per instance.
        #[arg(long)]
        host: Option<usize>,
        /// Include extensions by more than one point.
        #[arg(long)]
        full_range: bool,
    },
    /// Witnesses built from disjoint 3-amalgamation.
    Build {
        #[arg(long)]
        class: String,
        #[arg(long)]
        size: usize,
    },
    /// Witnesses for a superposition from its components.
    Super {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        host: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ProductCmd {
    /// Fibres over a base; one `--fiber` is used for every base point.
    Lex {
        #[arg(long)]
        base: String,
        #[arg(long, required = true)]
        fiber: Vec<String>,
    },
    Full {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Right relations pulled back along `--aligner` (default identity).
    Super {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, value_delimiter = ',')]
        aligner: Option<Vec<usize>>,
    },
    /// Automorphism counts of both products against the product formulas.
    Aut {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Age of the product against the product of the ages.
    Age {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value = "lex")]
        mode: String,
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
    /// Membership of a structure in a full product class.
    Decompose {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        structure: String,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigCmd {
    /// Builtin witness over every index structure up to `--size`, as JSON.
    Build {
        which: BuiltinConfig,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a JSON witness.
    Verify { file: PathBuf },
    /// Compose two witnesses, given as builtin names or JSON files.
    Compose {
        #[arg(long)]
        outer: String,
        #[arg(long)]
        inner: String,
        /// Index size for builtin names.
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Append a tag coordinate so that every map is injective.
    Inject {
        file: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Product configuration from two builtins.
    Transfer {
        mode: String,
        #[arg(long)]
        left: BuiltinConfig,
        #[arg(long)]
        right: BuiltinConfig,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Whether every member of `--sub` is a reduct of a member of `--sup`.
    Reductive {
        #[arg(long)]
        sub: String,
        #[arg(long)]
        sup: String,
        #[arg(long)]
        size: usize,
        /// `from=to` symbol renamings.
        #[arg(long, value_delimiter = ',')]
        rename: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// Case id, or `all`.
    #[arg(default_value = "all")]
    id: String,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// List the case ids instead of running them.
    #[arg(long)]
    list: bool,
    /// Append wall times to stderr.
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    class: String,
    #[arg(long)]
    size: usize,
    /// Print only the number of members.
    #[arg(long)]
    count: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Dot,
    Json,
    Dsl,
}

#[derive(Args, Debug)]
struct ExportArgs {
    kind: ExportKind,
    #[arg(long)]
    structure: String,
    /// Draw every arc of a binary relation, without collapsing symmetric pairs.
    #[arg(long)]
    directed: bool,
}

struct App {
    format: Format,
    settings: Settings,
    env: Arc<Document>,
    defs: String,
}

/// Reads `@path` arguments.
fn read_arg(text: &str) -> anyhow::Result<String> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(text.to_string()),
    }
}

impl App {
    /// Structure argument as canonical DSL text.
    fn structure_text(&self, arg: &str) -> anyhow::Result<String> {
        Ok(print_structure(&self.structure(arg)?))
    }

    fn structure(&self, arg: &str) -> anyhow::Result<Structure> {
        let text = read_arg(arg)?;
        if text.trim_start().starts_with('{') {
            return structure_from_json(&text);
        }
        Ok(parse_structure(text.trim(), &self.env)?)
    }

    /// Class argument as DSL text; names resolve against `--defs`.
    fn class_text(&self, arg: &str) -> anyhow::Result<String> {
        let text = read_arg(arg)?;
        parse_class(text.trim(), &self.env)?;
        Ok(text.trim().to_string())
    }

    fn print_structure(&self, s: &Structure) -> String {
        match self.format {
            Format::Dsl => print_structure(s),
            Format::Json => structure_to_json(s),
        }
    }

    fn runner(&self) -> anyhow::Result<Runner> {
        let cache = self.settings.cache_dir.as_deref().map(Cache::open).transpose()?;
        Runner::new(self.settings.jobs, cache, self.settings.resample)
    }

    /// Runs an operation and prints its outcome.
    fn run_op(&self, op: Operation) -> anyhow::Result<u8> {
        let runner = self.runner()?;
        let r = runner.run(&op, &self.env, &self.defs, self.settings.time_limit);
        if let Some(s) = runner.cache_summary() {
            eprintln!("{s}");
        }
        match r {
            RunResult::Done { outcome, .. } => {
                self.print_outcome(&outcome)?;
                Ok(match outcome.verdict {
                    Status::Pass => 0,
                    Status::Fail => 1,
                    Status::Inconclusive => 2,
                })
            }
            RunResult::TimedOut(l) => {
                let outcome = Outcome {
                    verdict: Status::Inconclusive,
                    detail: format!("time limit of {}s reached", l.as_secs_f64()),
                    witnesses: vec![],
                };
                self.print_outcome(&outcome)?;
                Ok(2)
            }
            RunResult::Error(m) => Err(anyhow!(m)),
        }
    }

    fn print_outcome(&self, o: &Outcome) -> anyhow::Result<()> {
        let mut out = std::io::stdout().lock();
        match self.format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(o)?)?,
            Format::Dsl => {
                writeln!(out, "verdict: {}", o.verdict)?;
                writeln!(out, "detail: {}", o.detail)?;
                for (name, s) in o.structures()? {
                    writeln!(out, "let {name} = {}", print_structure(&s))?;
                }
            }
        }
        Ok(())
    }
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> anyhow::Result<ConfigWitness> {
    config_from_json(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

/// A builtin name or a JSON witness file.
fn config_source(arg: &str, size: usize) -> anyhow::Result<ConfigWitness> {
    match arg.parse::<BuiltinConfig>() {
        Ok(b) => Ok(builtin_configuration(b, size)?),
        Err(_) => load_config(Path::new(arg)),
    }
}

/// Reports a witness's verification on stderr and returns the exit code.
fn finish_config(w: &ConfigWitness, output: Option<&Path>) -> anyhow::Result<u8> {
    let v = verify_configuration(w)?;
    emit(&(config_to_json(w) + "\n"), output)?;
    match v.failure() {
        None => {
            eprintln!("verified: width {}, {} entries", w.interp.width, w.entries.len());
            Ok(0)
        }
        Some(bad) => {
            eprintln!("verification failed: {bad}");
            Ok(1)
        }
    }
}

fn check_op(app: &App, a: &CheckArgs) -> anyhow::Result<Operation> {
    let class = app.class_text(&a.class)?;
    let host = a.host.unwrap_or(2 * a.base + 1);
    Ok(match a.kind {
        CheckKind::Ap | CheckKind::Sap => {
            Operation::CheckAp { class, base: a.base, host, strong: a.strong || a.kind == CheckKind::Sap }
        }
        CheckKind::Jep => Operation::CheckJep { class, base: a.base, host },
        CheckKind::Hp => Operation::CheckHp { class, size: a.base },
        CheckKind::Namalg => Operation::CheckNamalg { class, n: a.n, base: a.base, pad: a.pad },
        CheckKind::Transitivity => Operation::Transitivity { class, symbol: a.symbol.clone(), pad: a.pad },
    })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let file = match &cli.config {
        Some(p) => SettingsFile::load(p)?,
        None => SettingsFile::default(),
    };
    let mut settings = Settings::from_file(&file)?;
    if let Some(j) = cli.jobs {
        anyhow::ensure!(j >= 1, "--jobs must be at least 1");
        settings.jobs = j;
    }
    if cli.cache_dir.is_some() {
        settings.cache_dir = cli.cache_dir.clone();
    }
    if let Some(t) = cli.time_limit {
        settings.time_limit = Some(t);
    }
    let format = match (cli.format, file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("json")) => Format::Json,
        (None, Some("dsl") | None) => Format::Dsl,
        (None, Some(other)) => bail!("unknown format {other:?} in the settings file"),
    };
    let defs = match &cli.defs {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let env = Arc::new(parse_document(&defs).context("definitions file")?);
    let app = App { format, settings, env, defs };

    match cli.cmd {
        Cmd::Check(a) => app.run_op(check_op(&app, &a)?),
        Cmd::Indivisible(c) => {
            let op = match c {
                IndivisibleCmd::Verify { class, pattern, colors, witness } => Operation::IndivisibleVerify {
                    class: app.class_text(&class)?,
                    pattern: app.structure_text(&pattern)?,
                    colors,
                    witness: app.structure_text(&witness)?,
                },
                IndivisibleCmd::Search { class, pattern, colors, max_size } => Operation::IndivisibleSearch {
                    class: app.class_text(&class)?,
                    pattern: app.structure_text(&pattern)?,
                    colors,
                    max_size,
                },
                IndivisibleCmd::Sweep { class, size, colors, max_size } => {
                    Operation::IndivisibleSweep { class: app.class_text(&class)?, size, colors, max_size }
                }
                IndivisibleCmd::Lex(p) => Operation::LexWitness {
                    left: app.class_text(&p.left)?,
                    right: app.class_text(&p.right)?,
                    pattern: app.structure_text(&p.pattern)?,
                    colors: p.colors,
                },
                IndivisibleCmd::Full(p) => Operation::FullWitness {
                    left: app.class_text(&p.left)?,
                    right: app.class_text(&p.right)?,
                    pattern: app.structure_text(&p.pattern)?,
                    colors: p.colors,
                },
            };
            app.run_op(op)
        }
        Cmd::Dss(c) => {
            let op = match c {
                DssCmd::Check { class, size, host, full_range } => {
                    Operation::DssCheck { class: app.class_text(&class)?, size, host, full_range }
                }
                DssCmd::Build { class, size } => {
                    Operation::DssBuild { class: app.class_text(&class)?, size, full_range: true }
                }
                DssCmd::Super { left, right, size, host } => Operation::DssSuper {
                    left: app.class_text(&left)?,
                    right: app.class_text(&right)?,
                    size,
                    host,
                },
            };
            app.run_op(op)
        }
        Cmd::Product(c) => match c {
            ProductCmd::Lex { base, fiber } => {
                let base = app.structure(&base)?;
                let fibers = fiber.iter().map(|f| app.structure(f)).collect::<anyhow::Result<Vec<_>>>()?;
                let fibers = match fibers.len() {
                    1 => vec![fibers[0].clone(); base.size()],
                    n if n == base.size() => fibers,
                    n => bail!("{n} fibres for a base of size {}", base.size()),
                };
                let l0 = fibers.first().map_or_else(|| Arc::new(fraisse_core::Signature::empty()), |f| f.sig_arc().clone());
                let s = lex_structure(&LexAssembly { l0, base, fibers })?;
                println!("{}", app.print_structure(&s));
                Ok(0)
            }
            ProductCmd::Full { left, right } => {
                let s = full_structure(&FullAssembly { left: app.structure(&left)?, right: app.structure(&right)? });
                println!("{}", app.print_structure(&s));
                Ok(0)
            }
            ProductCmd::Super { left, right, aligner } => {
                let left = app.structure(&left)?;
                let aligner = aligner.unwrap_or_else(|| (0..left.size()).collect());
                let s = superpose_structures(&Superposition { left, right: app.structure(&right)?, aligner })?;
                println!("{}", app.print_structure(&s));
                Ok(0)
            }
            ProductCmd::Aut { left, right } => app.run_op(Operation::AutProduct {
                left: app.structure_text(&left)?,
                right: app.structure_text(&right)?,
            }),
            ProductCmd::Age { left, right, mode, size } => app.run_op(Operation::AgeProduct {
                left: app.structure_text(&left)?,
                right: app.structure_text(&right)?,
                mode,
                size,
            }),
            ProductCmd::Decompose { left, right, structure } => app.run_op(Operation::DecomposeFull {
                left: app.class_text(&left)?,
                right: app.class_text(&right)?,
                structure: app.structure_text(&structure)?,
            }),
        },
        Cmd::Config(c) => match c {
            ConfigCmd::Build { which, size, output } => {
                finish_config(&builtin_configuration(which, size)?, output.as_deref())
            }
            ConfigCmd::Verify { file } => {
                let w = load_config(&file)?;
                match verify_configuration(&w)?.failure() {
                    None => {
                        println!("verdict: pass\ndetail: width {}, {} entries", w.interp.width, w.entries.len());
                        Ok(0)
                    }
                    Some(bad) => {
                        println!("verdict: fail\ndetail: {bad}");
                        Ok(1)
                    }
                }
            }
            ConfigCmd::Compose { outer, inner, size, output } => {
                let w = match (outer.parse::<BuiltinConfig>(), inner.parse::<BuiltinConfig>()) {
                    (Ok(o), Ok(i)) => compose_builtins(o, i, size)?,
                    _ => compose_configurations(&config_source(&outer, size)?, &config_source(&inner, size)?)?,
                };
                finish_config(&w, output.as_deref())
            }
            ConfigCmd::Inject { file, output } => finish_config(&make_injective(&load_config(&file)?)?, output.as_deref()),
            ConfigCmd::Transfer { mode, left, right, size, output } => {
                finish_config(&transfer_builtins(&mode, left, right, size)?, output.as_deref())
            }
            ConfigCmd::Reductive { sub, sup, size, rename } => {
                let rename = rename
                    .iter()
                    .map(|p| {
                        p.split_once('=')
                            .map(|(a, b)| (a.to_string(), b.to_string()))
                            .ok_or_else(|| anyhow!("renaming {p:?} is not of the form from=to"))
                    })
                    .collect::<anyhow::Result<Vec<_>>>()?;
                app.run_op(Operation::Reductive { sub: app.class_text(&sub)?, sup: app.class_text(&sup)?, size, rename })
            }
        },
        Cmd::Repro(a) => {
            let dir = a.catalog.clone().unwrap_or_else(|| app.settings.catalog.clone());
            let catalog = Catalog::load(&dir)?;
            if a.list {
                for c in &catalog.cases {
                    println!("{}  {}", c.case.id, c.case.claim);
                }
                return Ok(0);
            }
            let cases = catalog.select(&a.id)?;
            let runner = app.runner()?;
            let reports = run_cases(&cases, &runner, app.settings.time_limit);
            match app.format {
                Format::Dsl => print!("{}", render_text(&reports)),
                Format::Json => print!("{}", render_json(&reports)),
            }
            if a.timings {
                for r in &reports {
                    eprintln!("{:>10.3}s  {}", r.wall.as_secs_f64(), r.id);
                }
            }
            if let Some(s) = runner.cache_summary() {
                eprintln!("{s}");
            }
            if app.format == Format::Json {
                eprintln!("{}", summary(&reports));
            }
            Ok(exit_code(&reports) as u8)
        }
        Cmd::Enumerate(a) => {
            let k = parse_class(read_arg(&a.class)?.trim(), &app.env)?;
            let members = enumerate_members(&k, a.size)?;
            if a.count {
                println!("{}", members.len());
            } else {
                for m in members.iter() {
                    println!("{}", app.print_structure(m));
                }
            }
            eprintln!("{} members of {} on {} points", members.len(), print_class(&k), a.size);
            Ok(0)
        }
        Cmd::Export(a) => {
            let s = app.structure(&a.structure)?;
            let style = if a.directed { DotStyle::Directed } else { DotStyle::Collapse };
            match a.kind {
                ExportKind::Dot => print!("{}", export_dot_with(&s, style)),
                ExportKind::Json => println!("{}", structure_to_json(&s)),
                ExportKind::Dsl => println!("{}", print_structure(&s)),
            }
            Ok(0)
        }
    }
}

fn parse_seconds(text: &str) -> Result<Duration, String> {
    let secs: f64 = text.parse().map_err(|e| format!("{e}"))?;
    Duration::try_from_secs_f64(secs).map_err(|_| format!("{text} is not a non-negative number of seconds"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // A closed stdout (e.g. piped into `head`) is not a usage error.
            if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
