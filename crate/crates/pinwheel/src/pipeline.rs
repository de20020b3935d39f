//! Proving in parallel and solver selection.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use pinwheel_core::fast::{fast_solve, FastConfig};
use pinwheel_core::proof::{self, BaseMode, ProofChain, ProofParams, ProofStage};
use pinwheel_core::{solve, Clock, FrozenClock, Instance, Schedule, SolveConfig, SolveOutcome};
use rayon::prelude::*;

use crate::artifacts::write_chain;
use crate::clock::StdClock;
use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "PINWHEEL_THREADS";

/// Worker count from `PINWHEEL_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Foresight,
    Fast,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Foresight => "foresight",
            SolverKind::Fast => "fast",
        }
    }

    pub fn run(self, instance: &Instance, time_limit_ms: u64, clock: &dyn Clock) -> Result<SolveOutcome> {
        Ok(match self {
            SolverKind::Foresight => solve(instance, &SolveConfig::with_time_limit(time_limit_ms), clock)?,
            SolverKind::Fast => fast_solve(instance, &FastConfig::with_time_limit(time_limit_ms), clock)?,
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "foresight" => Ok(SolverKind::Foresight),
            "fast" => Ok(SolverKind::Fast),
            other => Err(Error::UnknownSolver(other.to_string())),
        }
    }
}

/// Budgets for classifying proof candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProveOptions {
    /// Per-candidate solver settings. With no wall budget the node limits
    /// alone bound the work, which makes stage files reproducible.
    pub fast: FastConfig,
    /// Optional per-candidate wall-clock budget.
    pub wall_budget_ms: Option<u64>,
    pub threads: Option<usize>,
    pub base: BaseMode,
    /// Report each finished stage on stderr.
    pub progress: bool,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            fast: FastConfig {
                time_limit_ms: u64::MAX,
                attempt_node_limit: Some(200_000),
                max_attempts: Some(16),
                ..FastConfig::default()
            },
            wall_budget_ms: None,
            threads: threads_from_env(),
            base: BaseMode::Exact,
            progress: false,
        }
    }
}

fn solve_candidate(c: &Instance, opts: &ProveOptions) -> Result<Option<Schedule>> {
    let outcome = match opts.wall_budget_ms {
        Some(ms) => {
            let cfg = FastConfig {
                time_limit_ms: ms,
                ..opts.fast.clone()
            };
            fast_solve(c, &cfg, &StdClock::new())?
        }
        None => fast_solve(c, &opts.fast, &FrozenClock)?,
    };
    Ok(outcome.schedule().cloned())
}

pub fn prove_chain(params: &ProofParams, opts: &ProveOptions) -> Result<ProofChain> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let (mut solved, mut last_report) = (0usize, 0.0f64);
    let mut chunk = |cands: &[Instance]| -> pinwheel_core::Result<Vec<Option<Schedule>>> {
        let results: Vec<Result<Option<Schedule>>> =
            pool.install(|| cands.par_iter().map(|c| solve_candidate(c, opts)).collect());
        solved += cands.len();
        let now = started.elapsed().as_secs_f64();
        if opts.progress && now - last_report >= 30.0 {
            last_report = now;
            eprintln!("  {solved} candidates solved, elapsed={now:.1}s");
        }
        results
            .into_iter()
            .map(|r| {
                r.map_err(|e| match e {
                    Error::Core(c) => c,
                    other => pinwheel_core::CoreError::Contract(other.to_string()),
                })
            })
            .collect()
    };
    let mut report = |stage: &ProofStage| {
        if opts.progress {
            eprintln!(
                "theta={} lists={} removed={} elapsed={:.1}s",
                stage.theta,
                stage.lists.len(),
                stage.removed.len(),
                started.elapsed().as_secs_f64()
            );
        }
    };
    Ok(proof::prove_observed(params, opts.base, &mut chunk, &mut report)?)
}

/// Proves and writes the artifacts to `dir`.
pub fn prove_to_dir(dir: &Path, params: &ProofParams, opts: &ProveOptions) -> Result<ProofChain> {
    let chain = prove_chain(params, opts)?;
    write_chain(dir, &chain, opts.base)?;
    Ok(chain)
}
