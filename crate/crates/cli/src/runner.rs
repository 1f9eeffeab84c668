//! Executes operations on a sized thread pool under a wall-clock limit,
//! consulting the cache.

use std::collections::hash_map::RandomState;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::cache::{cache_key, resample, Cache, RunRecord};
use crate::dsl::Document;
use crate::ops::{execute, Operation, Outcome};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunResult {
    Done { outcome: Outcome, wall: Duration, cached: bool },
    TimedOut(Duration),
    Error(String),
}

#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicUsize,
    pub misses: AtomicUsize,
    pub resampled: AtomicUsize,
    pub mismatches: AtomicUsize,
}

pub struct Runner {
    pool: Arc<rayon::ThreadPool>,
    jobs: usize,
    cache: Option<Cache>,
    resample: f64,
    seed: RandomState,
    pub stats: CacheStats,
}

impl Runner {
    /// A pool of `jobs` threads for the searches inside each operation.
    pub fn new(jobs: usize, cache: Option<Cache>, resample: f64) -> anyhow::Result<Runner> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .thread_name(|i| format!("fraisse-worker-{i}"))
            .build()?;
        Ok(Runner { pool: Arc::new(pool), jobs: jobs.max(1), cache, resample, seed: RandomState::new(), stats: CacheStats::default() })
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    /// Runs on a fresh thread so the caller can stop waiting at the limit.
    /// A timed-out computation is abandoned, not interrupted; it finishes in
    /// the background and its result is dropped.
    fn compute(&self, op: &Operation, env: &Arc<Document>, limit: Option<Duration>) -> RunResult {
        let (tx, rx) = mpsc::channel();
        let (pool, op, env) = (self.pool.clone(), op.clone(), env.clone());
        let start = Instant::now();
        std::thread::spawn(move || {
            let r = pool.install(|| execute(&op, &env));
            let _ = tx.send(r);
        });
        let received = match limit {
            Some(l) => match rx.recv_timeout(l) {
                Err(mpsc::RecvTimeoutError::Timeout) => return RunResult::TimedOut(l),
                other => other.map_err(|_| ()),
            },
            None => rx.recv().map_err(|_| ()),
        };
        match received {
            Ok(Ok(outcome)) => RunResult::Done { outcome, wall: start.elapsed(), cached: false },
            Ok(Err(e)) => RunResult::Error(format!("{e:#}")),
            Err(()) => RunResult::Error("the operation panicked".into()),
        }
    }

    pub fn run(&self, op: &Operation, env: &Arc<Document>, defs: &str, limit: Option<Duration>) -> RunResult {
        let Some(cache) = &self.cache else {
            return self.compute(op, env, limit);
        };
        let key = cache_key(op, defs);
        if let Some(rec) = cache.get(&key) {
            if !resample(&key, self.resample, &self.seed) {
                self.stats.hits.fetch_add(1, Ordering::Relaxed);
                return RunResult::Done {
                    outcome: rec.outcome,
                    wall: Duration::from_millis(rec.wall_time_ms),
                    cached: true,
                };
            }
            self.stats.resampled.fetch_add(1, Ordering::Relaxed);
            let fresh = self.compute(op, env, limit);
            if let RunResult::Done { outcome, .. } = &fresh {
                if outcome != &rec.outcome {
                    self.stats.mismatches.fetch_add(1, Ordering::Relaxed);
                    eprintln!("warning: cached result {key} differs from a fresh run; replacing it");
                    self.store(cache, op, key, &fresh);
                }
            }
            return fresh;
        }
        self.stats.misses.fetch_add(1, Ordering::Relaxed);
        let fresh = self.compute(op, env, limit);
        self.store(cache, op, key, &fresh);
        fresh
    }

    /// Only completed runs are cached; timeouts and errors are retried.
    fn store(&self, cache: &Cache, op: &Operation, key: String, r: &RunResult) {
        if let RunResult::Done { outcome, wall, .. } = r {
            let rec = RunRecord {
                command: op.name(),
                config_hash: key,
                outcome: outcome.clone(),
                wall_time_ms: wall.as_millis() as u64,
            };
            if let Err(e) = cache.put(&rec) {
                eprintln!("warning: could not write cache record: {e:#}");
            }
        }
    }

    pub fn cache_summary(&self) -> Option<String> {
        self.cache.as_ref()?;
        let s = &self.stats;
        Some(format!(
            "cache: {} hits, {} misses, {} resampled, {} mismatches",
            s.hits.load(Ordering::Relaxed),
            s.misses.load(Ordering::Relaxed),
            s.resampled.load(Ordering::Relaxed),
            s.mismatches.load(Ordering::Relaxed)
        ))
    }
}
