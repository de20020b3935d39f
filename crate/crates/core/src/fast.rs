//! Heuristic solver: fold an instance by a good partition, solve the smaller
//! folded instance with the complete solver, and lift the schedule back.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{CoreError, Result};
use crate::instance::Instance;
use crate::lift::lift_schedule;
use crate::partition::{folded_instance, Partition, PartitionFilter};
use crate::schedule::verify_schedule;
use crate::solver::{solve, Clock, SolveConfig, SolveOutcome, DEFAULT_MEMO_CAP};
use crate::Rational;

pub const DEFAULT_MAX_PARTITIONS: usize = 4096;
pub const DEFAULT_PER_ATTEMPT_MS: u64 = 10_000;

/// Density at or above which a folded instance is not attempted.
pub fn density_cap() -> Rational {
    Rational::new(BigInt::from(95), BigInt::from(100))
}

/// Partitions of an ascending integer instance whose groups all pass
/// `filter`, in a fixed generation order starting with the empty partition.
///
/// Equal elements are interchangeable, so a group takes the lowest unused
/// positions of each value it uses, and an element left out of every group
/// leaves all later equal elements out as well.
pub fn enumerate_partitions(values: &[u64], filter: &PartitionFilter, cap: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if cap == 0 {
        return out;
    }
    let mut status = alloc::vec![Slot::Open; values.len()];
    let mut groups = Vec::new();
    PartitionWalk {
        values,
        filter,
        cap,
        out: &mut out,
    }
    .walk(0, &mut status, &mut groups);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Open,
    Grouped,
    Single,
}

struct PartitionWalk<'a> {
    values: &'a [u64],
    filter: &'a PartitionFilter,
    cap: usize,
    out: &'a mut Vec<Partition>,
}

impl PartitionWalk<'_> {
    fn full(&self) -> bool {
        self.out.len() >= self.cap
    }

    fn walk(&mut self, from: usize, status: &mut [Slot], groups: &mut Vec<Vec<usize>>) {
        if self.full() {
            return;
        }
        let Some(lead) = (from..self.values.len()).find(|&i| status[i] == Slot::Open) else {
            self.out.push(Partition::new(groups.clone()));
            return;
        };
        let v = self.values[lead];

        // leave `lead` (and every later open copy of its value) ungrouped
        let copies: Vec<usize> = (lead..self.values.len())
            .filter(|&i| status[i] == Slot::Open && self.values[i] == v)
            .collect();
        for &i in &copies {
            status[i] = Slot::Single;
        }
        self.walk(lead + 1, status, groups);
        for &i in &copies {
            status[i] = Slot::Open;
        }

        let pool: Vec<usize> = (lead + 1..self.values.len())
            .filter(|&i| status[i] == Slot::Open && self.values[i] - v <= 5)
            .collect();
        for size in [2usize, 3, 5] {
            let mut chosen = Vec::with_capacity(size);
            chosen.push(lead);
            self.members(&pool, 0, size, &mut chosen, status, groups);
        }
    }

    fn members(
        &mut self,
        pool: &[usize],
        start: usize,
        size: usize,
        chosen: &mut Vec<usize>,
        status: &mut [Slot],
        groups: &mut Vec<Vec<usize>>,
    ) {
        if self.full() {
            return;
        }
        if chosen.len() == size {
            if !self.filter.accepts(self.values, chosen) {
                return;
            }
            for &i in chosen.iter() {
                status[i] = Slot::Grouped;
            }
            groups.push(chosen.clone());
            self.walk(chosen[0] + 1, status, groups);
            groups.pop();
            for &i in chosen.iter() {
                status[i] = Slot::Open;
            }
            return;
        }
        for k in start..pool.len() {
            // within a run of equal values only a prefix may be taken
            if k > start && self.values[pool[k]] == self.values[pool[k - 1]] {
                continue;
            }
            chosen.push(pool[k]);
            self.members(pool, k + 1, size, chosen, status, groups);
            chosen.pop();
        }
    }
}

/// A partition with its folded instance and ordering score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPartition {
    pub partition: Partition,
    pub folded: Instance,
    pub density: f64,
    pub score: f64,
}

/// `sqrt(product) / (0.95 - density)^2` over the folded instance, with
/// fractional elements rounded up in the product. `None` when the folded
/// density is at least 0.95.
pub fn score_partition(instance: &Instance, partition: &Partition, filter: &PartitionFilter) -> Result<Option<ScoredPartition>> {
    let (folded, _) = folded_instance(instance, partition, filter)?;
    let exact = folded.density();
    if exact >= density_cap() {
        return Ok(None);
    }
    let density = exact.to_f64().unwrap_or(f64::INFINITY);
    let product: f64 = folded.iter().map(|p| p.ceil() as f64).product();
    let gap = 0.95 - density;
    Ok(Some(ScoredPartition {
        partition: partition.clone(),
        folded,
        density,
        score: libm::sqrt(product) / (gap * gap),
    }))
}

/// Attempt order: ascending score, ties broken by the partition's text. The
/// empty partition is always present; when its density is over the cap it is
/// placed last.
pub fn ranked_partitions(instance: &Instance, filter: &PartitionFilter, cap: usize) -> Result<Vec<Partition>> {
    let values = instance.integers()?;
    let mut scored: Vec<(f64, String, Partition)> = Vec::new();
    let mut empty_scored = false;
    for p in enumerate_partitions(&values, filter, cap) {
        if let Some(s) = score_partition(instance, &p, filter)? {
            empty_scored |= p.is_empty();
            scored.push((s.score, p.to_string(), p));
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut order: Vec<Partition> = scored.into_iter().map(|(_, _, p)| p).collect();
    if !empty_scored {
        order.push(Partition::empty());
    }
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastConfig {
    pub time_limit_ms: u64,
    pub per_attempt_ms: u64,
    pub max_partitions: usize,
    /// Stop after this many folded attempts.
    pub max_attempts: Option<usize>,
    /// Deterministic per-attempt cap on expanded states.
    pub attempt_node_limit: Option<u64>,
    pub memo_cap: usize,
    pub filter: PartitionFilter,
}

impl FastConfig {
    pub fn with_time_limit(time_limit_ms: u64) -> Self {
        FastConfig {
            time_limit_ms,
            ..FastConfig::default()
        }
    }
}

impl Default for FastConfig {
    fn default() -> Self {
        FastConfig {
            time_limit_ms: 60_000,
            per_attempt_ms: DEFAULT_PER_ATTEMPT_MS,
            max_partitions: DEFAULT_MAX_PARTITIONS,
            max_attempts: None,
            attempt_node_limit: None,
            memo_cap: DEFAULT_MEMO_CAP,
            filter: PartitionFilter::default(),
        }
    }
}

/// Result of [`fast_solve_with`], naming the partition that succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastReport {
    pub outcome: SolveOutcome,
    pub partition: Option<Partition>,
    pub attempts: usize,
}

pub fn fast_solve(instance: &Instance, config: &FastConfig, clock: &dyn Clock) -> Result<SolveOutcome> {
    fast_solve_report(instance, config, clock).map(|r| r.outcome)
}

pub fn fast_solve_report(instance: &Instance, config: &FastConfig, clock: &dyn Clock) -> Result<FastReport> {
    if config.time_limit_ms == 0 {
        return Err(CoreError::ZeroTimeLimit);
    }
    let order = ranked_partitions(instance, &config.filter, config.max_partitions)?;
    fast_solve_with(instance, &order, config, clock)
}

/// Tries `partitions` in the given order. A folded attempt that fails proves
/// nothing, so the outcome is a schedule or a timeout, except that an
/// exhausted attempt on the empty partition refutes the instance itself.
pub fn fast_solve_with(
    instance: &Instance,
    partitions: &[Partition],
    config: &FastConfig,
    clock: &dyn Clock,
) -> Result<FastReport> {
    if config.time_limit_ms == 0 {
        return Err(CoreError::ZeroTimeLimit);
    }
    let started = clock.now_ms();
    let elapsed = || clock.now_ms().saturating_sub(started);
    let mut attempts = 0;
    for partition in partitions {
        let remaining = config.time_limit_ms.saturating_sub(elapsed());
        if remaining == 0 || config.max_attempts.is_some_and(|m| attempts >= m) {
            break;
        }
        attempts += 1;
        let (folded, trace) = folded_instance(instance, partition, &config.filter)?;
        let attempt = SolveConfig {
            time_limit_ms: remaining.min(config.per_attempt_ms).max(1),
            complete: false,
            node_limit: config.attempt_node_limit,
            memo_cap: config.memo_cap,
        };
        match solve(&folded, &attempt, clock)? {
            SolveOutcome::Schedulable(s) => {
                let lifted = lift_schedule(&s, trace.trace(), instance)?;
                verify_schedule(instance, &lifted)
                    .map_err(|e| CoreError::Contract(format!("lifted schedule for {instance} fails: {e}")))?;
                return Ok(FastReport {
                    outcome: SolveOutcome::Schedulable(lifted),
                    partition: Some(partition.clone()),
                    attempts,
                });
            }
            SolveOutcome::Unschedulable if partition.is_empty() => {
                return Ok(FastReport {
                    outcome: SolveOutcome::Unschedulable,
                    partition: None,
                    attempts,
                });
            }
            _ => {}
        }
    }
    Ok(FastReport {
        outcome: SolveOutcome::Timeout { elapsed_ms: elapsed() },
        partition: None,
        attempts,
    })
}
