//! Benchmark runner and CSV records.

use std::io::{Read, Write};
use std::time::Instant;

use pinwheel_core::{Instance, SolveOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::StdClock;
use crate::error::{Error, Result};
use crate::pipeline::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Schedulable,
    Unschedulable,
    Timeout,
}

impl From<&SolveOutcome> for Outcome {
    fn from(o: &SolveOutcome) -> Self {
        match o {
            SolveOutcome::Schedulable(_) => Outcome::Schedulable,
            SolveOutcome::Unschedulable => Outcome::Unschedulable,
            SolveOutcome::Timeout { .. } => Outcome::Timeout,
        }
    }
}

/// One CSV row: `instance,solver,outcome,elapsed_ms,seed,max_param`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub solver: String,
    pub outcome: Outcome,
    /// Wall time of the solver call alone.
    pub elapsed_ms: f64,
    pub seed: u64,
    pub max_param: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub solvers: Vec<SolverKind>,
    pub time_limit_ms: u64,
    pub seed: u64,
    pub max_param: Option<u64>,
    /// Parallel workers; timings under more than one worker are approximate.
    pub workers: usize,
}

/// Times one solver call.
pub fn time_solver(kind: SolverKind, instance: &Instance, time_limit_ms: u64) -> Result<(SolveOutcome, f64)> {
    let clock = StdClock::new();
    let start = Instant::now();
    let outcome = kind.run(instance, time_limit_ms, &clock)?;
    Ok((outcome, start.elapsed().as_secs_f64() * 1000.0))
}

/// Runs every (instance, solver) pair; records follow instance order, then
/// solver order.
pub fn bench_run(instances: &[Instance], spec: &BenchSpec) -> Result<Vec<BenchRecord>> {
    if spec.solvers.is_empty() {
        return Err(Error::Usage("no solver selected".into()));
    }
    let jobs: Vec<(&Instance, SolverKind)> = instances
        .iter()
        .flat_map(|a| spec.solvers.iter().map(move |&s| (a, s)))
        .collect();
    let run = |&(a, kind): &(&Instance, SolverKind)| -> Result<BenchRecord> {
        let (outcome, elapsed_ms) = time_solver(kind, a, spec.time_limit_ms)?;
        Ok(BenchRecord {
            instance: a.to_string(),
            solver: kind.name().to_string(),
            outcome: Outcome::from(&outcome),
            elapsed_ms,
            seed: spec.seed,
            max_param: spec.max_param,
        })
    };
    if spec.workers <= 1 {
        jobs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["instance", "solver", "outcome", "elapsed_ms", "seed", "max_param"])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// The `k`-th smallest time among solved runs, if at least `k` were solved.
pub fn time_to_k(records: &[&BenchRecord], k: usize) -> Option<f64> {
    let mut times: Vec<f64> = records
        .iter()
        .filter(|r| r.outcome == Outcome::Schedulable)
        .map(|r| r.elapsed_ms)
        .collect();
    times.sort_by(f64::total_cmp);
    k.checked_sub(1).and_then(|i| times.get(i).copied())
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub solver: String,
    pub runs: usize,
    pub solved: usize,
    /// Over all runs; unsolved runs count with their elapsed time.
    pub mean_ms: f64,
    pub median_ms: f64,
    pub time_to_k: Vec<(usize, Option<f64>)>,
}

/// Per-solver summaries in order of first appearance.
pub fn summarize(records: &[BenchRecord], ks: &[usize]) -> Vec<SolverSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.solver.as_str()) {
            names.push(&r.solver);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.solver == name).collect();
            let mut times: Vec<f64> = rows.iter().map(|r| r.elapsed_ms).collect();
            SolverSummary {
                solver: name.to_string(),
                runs: rows.len(),
                solved: rows.iter().filter(|r| r.outcome == Outcome::Schedulable).count(),
                mean_ms: times.iter().sum::<f64>() / times.len() as f64,
                median_ms: median(&mut times).unwrap_or(0.0),
                time_to_k: ks.iter().map(|&k| (k, time_to_k(&rows, k))).collect(),
            }
        })
        .collect()
}
