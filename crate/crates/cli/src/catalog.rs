//! Reproduction catalog: TOML files of cases, each an operation with an
//! expected verdict.
//!
//! ```toml
//! defs = "let P = graph 3 {0-1 1-2}"   # optional, shared by the file
//!
//! [[case]]
//! id = "forest-five-cycle-no-amalgam"
//! claim = "forests fail amalgamation"
//! expect = "fail"
//! time_limit = 10                        # seconds, optional
//! expect_detail = "every identification" # substring, optional
//! [case.run]
//! op = "ap-instance"
//! ...
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::dsl::{parse_document, Document};
use crate::ops::{Operation, Status};
use crate::runner::{RunResult, Runner};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub id: String,
    pub claim: String,
    pub expect: Status,
    #[serde(default)]
    pub time_limit: Option<u64>,
    #[serde(default)]
    pub expect_detail: Option<String>,
    pub run: Operation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    defs: String,
    #[serde(default)]
    case: Vec<Case>,
}

#[derive(Clone, Debug)]
pub struct LoadedCase {
    pub case: Case,
    pub file: PathBuf,
    pub defs: String,
    pub env: Arc<Document>,
}

/// Cases sorted by id.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    pub cases: Vec<LoadedCase>,
}

impl Catalog {
    /// Every `*.toml` file in `dir`. Ids must be unique across files.
    pub fn load(dir: &Path) -> anyhow::Result<Catalog> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("reading catalog directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        let mut cases = Vec::new();
        for file in files {
            let text = std::fs::read_to_string(&file)?;
            let parsed: CatalogFile = toml::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
            let env = Arc::new(
                parse_document(&parsed.defs).with_context(|| format!("definitions in {}", file.display()))?,
            );
            for case in parsed.case {
                cases.push(LoadedCase { case, file: file.clone(), defs: parsed.defs.clone(), env: env.clone() });
            }
        }
        cases.sort_by(|a, b| a.case.id.cmp(&b.case.id));
        let mut seen = BTreeSet::new();
        for c in &cases {
            if !seen.insert(&c.case.id) {
                bail!("duplicate case id {}", c.case.id);
            }
        }
        Ok(Catalog { cases })
    }

    /// `all`, or a single id.
    pub fn select(&self, id: &str) -> anyhow::Result<Vec<LoadedCase>> {
        if id == "all" {
            return Ok(self.cases.clone());
        }
        match self.cases.iter().find(|c| c.case.id == id) {
            Some(c) => Ok(vec![c.clone()]),
            None => bail!("unknown case id {id:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub claim: String,
    pub expect: Status,
    pub got: Option<Status>,
    /// `pass` when the expectation was met, `inconclusive` when the run
    /// timed out or was inconclusive against a definite expectation.
    pub status: Status,
    pub detail: String,
    #[serde(skip)]
    pub wall: Duration,
}

fn judge(lc: &LoadedCase, r: RunResult) -> CaseReport {
    let c = &lc.case;
    let mut rep = CaseReport {
        id: c.id.clone(),
        claim: c.claim.clone(),
        expect: c.expect,
        got: None,
        status: Status::Fail,
        detail: String::new(),
        wall: Duration::ZERO,
    };
    match r {
        RunResult::Done { outcome, wall, .. } => {
            rep.got = Some(outcome.verdict);
            rep.wall = wall;
            let detail_ok = c.expect_detail.as_deref().map_or(true, |d| outcome.detail.contains(d));
            rep.status = if outcome.verdict == c.expect && detail_ok {
                Status::Pass
            } else if outcome.verdict == Status::Inconclusive {
                Status::Inconclusive
            } else {
                Status::Fail
            };
            rep.detail = if detail_ok {
                outcome.detail
            } else {
                format!("{} (expected the detail to mention {:?})", outcome.detail, c.expect_detail.as_deref().unwrap_or(""))
            };
        }
        RunResult::TimedOut(l) => {
            rep.status = Status::Inconclusive;
            rep.detail = format!("time limit of {}s reached", l.as_secs_f64());
        }
        RunResult::Error(m) => rep.detail = format!("error: {m}"),
    }
    rep
}

/// Runs cases on `runner.jobs()` worker threads. Reports come back in the
/// order of `cases`. A case's own limit wins over `default_limit`.
pub fn run_cases(cases: &[LoadedCase], runner: &Runner, default_limit: Option<Duration>) -> Vec<CaseReport> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CaseReport>>> = cases.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..runner.jobs().min(cases.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(lc) = cases.get(i) else { break };
                let limit = lc.case.time_limit.map(Duration::from_secs).or(default_limit);
                let r = runner.run(&lc.case.run, &lc.env, &lc.defs, limit);
                *slots[i].lock().expect("unpoisoned") = Some(judge(lc, r));
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("unpoisoned").expect("every case ran")).collect()
}

fn tag(s: Status) -> &'static str {
    match s {
        Status::Pass => "ok",
        Status::Fail => "FAILED",
        Status::Inconclusive => "INCONCLUSIVE",
    }
}

/// One line per case and a summary; no timings, so reruns compare equal.
pub fn render_text(reports: &[CaseReport]) -> String {
    let width = reports.iter().map(|r| r.id.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in reports {
        let got = r.got.map_or("none".to_string(), |g| g.to_string());
        out.push_str(&format!(
            "{:<12} {:<width$}  expect {:<12} got {:<12} {}\n",
            tag(r.status),
            r.id,
            r.expect.to_string(),
            got,
            r.detail
        ));
    }
    out.push_str(&summary(reports));
    out.push('\n');
    out
}

pub fn render_json(reports: &[CaseReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize") + "\n"
}

pub fn summary(reports: &[CaseReport]) -> String {
    let count = |s| reports.iter().filter(|r| r.status == s).count();
    format!(
        "{} cases: {} ok, {} failed, {} inconclusive",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Inconclusive)
    )
}

/// 0 all ok, 1 any failure, 2 only inconclusive shortfalls.
pub fn exit_code(reports: &[CaseReport]) -> i32 {
    if reports.iter().any(|r| r.status == Status::Fail) {
        1
    } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
        2
    } else {
        0
    }
}
