//! Complete state-space search for pinwheel schedules.
//!
//! Every day exactly one job runs (idling is never better than running some
//! job early). A state records, per job, the days since its last run and the
//! ceiling-gap flags of fractional periods; jobs of equal period are
//! interchangeable, so each equal-period block is kept sorted. The search is
//! a depth-first walk from the state where every job just ran: reaching a
//! state already on the current path closes a cycle, which is the schedule.
//! States whose subtree holds no cycle are remembered as failed.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use hashbrown::{HashMap, HashSet};
use num_traits::One;

use crate::error::{CoreError, Result};
use crate::fractional::{CeilFlags, JobState};
use crate::instance::Instance;
use crate::period::Period;
use crate::schedule::{verify_schedule, Schedule};
use crate::Rational;

/// Milliseconds from a monotonic source.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

/// A clock that never advances; time limits never expire.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now_ms(&self) -> u64 {
        0
    }
}

pub const DEFAULT_MEMO_CAP: usize = 1 << 26;

/// Largest `ceil(period)` the packed state encoding supports.
pub const MAX_CEIL: u64 = (1 << 14) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub time_limit_ms: u64,
    /// When set, the failure memo is never evicted, so an exhausted search is
    /// always reached without re-exploration.
    pub complete: bool,
    /// Optional cap on expanded states; deterministic alternative to the
    /// time limit.
    pub node_limit: Option<u64>,
    /// Maximum number of remembered failed states before the memo is
    /// cleared. Clearing may cause re-exploration, never wrong answers.
    pub memo_cap: usize,
}

impl SolveConfig {
    pub fn with_time_limit(time_limit_ms: u64) -> Self {
        SolveConfig {
            time_limit_ms,
            ..SolveConfig::default()
        }
    }

    pub fn complete(mut self) -> Self {
        self.complete = true;
        self
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            time_limit_ms: 60_000,
            complete: false,
            node_limit: None,
            memo_cap: DEFAULT_MEMO_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Carries a schedule that passed [`verify_schedule`].
    Schedulable(Schedule),
    Unschedulable,
    Timeout { elapsed_ms: u64 },
}

impl SolveOutcome {
    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            SolveOutcome::Schedulable(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_schedulable(&self) -> bool {
        matches!(self, SolveOutcome::Schedulable(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Schedulable(_) => "schedulable",
            SolveOutcome::Unschedulable => "unschedulable",
            SolveOutcome::Timeout { .. } => "timeout",
        }
    }
}

/// Search statistics returned by [`solve_with_stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub memo_clears: u32,
}

/// Decides schedulability of `instance` by exhaustive search.
pub fn solve(instance: &Instance, config: &SolveConfig, clock: &dyn Clock) -> Result<SolveOutcome> {
    solve_with_stats(instance, config, clock).map(|(o, _)| o)
}

pub fn solve_with_stats(instance: &Instance, config: &SolveConfig, clock: &dyn Clock) -> Result<(SolveOutcome, SolveStats)> {
    if config.time_limit_ms == 0 {
        return Err(CoreError::ZeroTimeLimit);
    }
    if instance.is_empty() {
        return Ok((SolveOutcome::Schedulable(Schedule::idle()), SolveStats::default()));
    }
    if let Some(p) = instance.iter().find(|p| p.ceil() > MAX_CEIL) {
        return Err(CoreError::PeriodTooLarge(format!("{p}")));
    }
    if instance.density() > Rational::one() {
        return Ok((SolveOutcome::Unschedulable, SolveStats::default()));
    }
    let mut search = Search::new(instance, config, clock);
    let outcome = search.run()?;
    if let SolveOutcome::Schedulable(s) = &outcome {
        verify_schedule(instance, s)
            .map_err(|e| CoreError::Contract(format!("solver produced an invalid schedule for {instance}: {e}")))?;
    }
    Ok((outcome, search.stats))
}

type State = Box<[u16]>;

const ELAPSED_MASK: u16 = (1 << 14) - 1;

fn pack(job: JobState) -> u16 {
    job.elapsed as u16 | job.flags.bits() << 14
}

fn unpack(code: u16) -> JobState {
    JobState {
        elapsed: (code & ELAPSED_MASK) as u64,
        flags: CeilFlags::from_bits(code >> 14),
    }
}

struct Frame {
    state: State,
    candidates: Vec<u16>,
    next: usize,
    chosen: u16,
}

struct Search<'a> {
    instance: &'a Instance,
    periods: Vec<Period>,
    /// Start of the equal-period block of each job.
    block_start: Vec<usize>,
    blocks: Vec<(usize, usize)>,
    config: &'a SolveConfig,
    clock: &'a dyn Clock,
    started: u64,
    stats: SolveStats,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, config: &'a SolveConfig, clock: &'a dyn Clock) -> Self {
        let periods: Vec<Period> = instance.iter().collect();
        let mut blocks = Vec::new();
        let mut block_start = Vec::with_capacity(periods.len());
        for (i, p) in periods.iter().enumerate() {
            if i == 0 || periods[i - 1] != *p {
                blocks.push((i, i + 1));
            } else {
                blocks.last_mut().unwrap().1 = i + 1;
            }
            block_start.push(blocks.last().unwrap().0);
        }
        Search {
            instance,
            periods,
            block_start,
            blocks,
            config,
            clock,
            started: clock.now_ms(),
            stats: SolveStats::default(),
        }
    }

    fn canonicalize(&self, state: &mut [u16]) {
        for &(lo, hi) in &self.blocks {
            if hi - lo > 1 {
                state[lo..hi].sort_unstable();
            }
        }
    }

    /// Successor after running the job at position `pos`, or `None` if some
    /// job can no longer meet its deadline.
    fn step(&self, state: &[u16], pos: usize) -> Option<State> {
        let mut next: State = state.into();
        for (i, code) in next.iter_mut().enumerate() {
            let job = unpack(*code);
            let period = self.periods[i];
            let moved = if i == pos { job.run(period) } else { job.idle() };
            if moved.slack(period) < 1 {
                return None;
            }
            *code = pack(moved);
        }
        if !self.pigeonhole_ok(&next) {
            return None;
        }
        self.canonicalize(&mut next);
        Some(next)
    }

    /// With slacks sorted, the `k`-th most urgent job (1-based) needs a slack
    /// of at least `k`.
    fn pigeonhole_ok(&self, state: &[u16]) -> bool {
        let mut slacks: Vec<i64> = state
            .iter()
            .zip(&self.periods)
            .map(|(&c, &p)| unpack(c).slack(p))
            .collect();
        slacks.sort_unstable();
        slacks.iter().enumerate().all(|(k, &s)| s > k as i64)
    }

    /// Candidate positions: most urgent first, then smaller period, then
    /// position; only the first of several identical jobs in a block.
    fn candidates(&self, state: &[u16]) -> Vec<u16> {
        let mut cands: Vec<(i64, usize)> = (0..state.len())
            .filter(|&i| i == self.block_start[i] || state[i] != state[i - 1])
            .map(|i| (unpack(state[i]).slack(self.periods[i]), i))
            .collect();
        cands.sort_unstable();
        cands.into_iter().map(|(_, i)| i as u16).collect()
    }

    fn out_of_budget(&self) -> Option<u64> {
        let elapsed = self.clock.now_ms().saturating_sub(self.started);
        let over_nodes = self.config.node_limit.is_some_and(|n| self.stats.nodes >= n);
        (elapsed >= self.config.time_limit_ms || over_nodes).then_some(elapsed)
    }

    fn run(&mut self) -> Result<SolveOutcome> {
        let n = self.periods.len();
        let root: State = alloc::vec![pack(JobState::default()); n].into_boxed_slice();
        let mut on_path: HashMap<State, usize> = HashMap::new();
        let mut failed: HashSet<State> = HashSet::new();
        on_path.insert(root.clone(), 0);
        let mut stack = alloc::vec![Frame {
            candidates: self.candidates(&root),
            state: root,
            next: 0,
            chosen: 0,
        }];
        while let Some(top) = stack.last_mut() {
            if top.next < top.candidates.len() {
                let pos = top.candidates[top.next];
                top.next += 1;
                top.chosen = pos;
                self.stats.nodes += 1;
                if self.stats.nodes % 1024 == 0 {
                    if let Some(elapsed_ms) = self.out_of_budget() {
                        return Ok(SolveOutcome::Timeout { elapsed_ms });
                    }
                }
                let Some(child) = self.step(&top.state, pos as usize) else {
                    continue;
                };
                if let Some(&depth) = on_path.get(&child) {
                    let decisions: Vec<u16> = stack[depth..].iter().map(|f| f.chosen).collect();
                    let start = stack[depth].state.clone();
                    return Ok(SolveOutcome::Schedulable(self.extract(&start, &decisions)?));
                }
                if failed.contains(&child) {
                    continue;
                }
                on_path.insert(child.clone(), stack.len());
                let candidates = self.candidates(&child);
                stack.push(Frame {
                    state: child,
                    candidates,
                    next: 0,
                    chosen: 0,
                });
            } else {
                let frame = stack.pop().expect("non-empty stack");
                on_path.remove(&frame.state);
                if !self.config.complete && failed.len() >= self.config.memo_cap {
                    failed.clear();
                    self.stats.memo_clears += 1;
                }
                failed.insert(frame.state);
            }
        }
        Ok(SolveOutcome::Unschedulable)
    }

    /// Replays canonical decisions from `start`, tracking which actual job
    /// sits at each canonical position, until the labelling comes back to
    /// the identity.
    fn extract(&self, start: &[u16], decisions: &[u16]) -> Result<Schedule> {
        let n = self.periods.len();
        let identity: Vec<usize> = (0..n).collect();
        let mut labels = identity.clone();
        let mut cycle = Vec::new();
        loop {
            let mut state: Vec<u16> = start.to_vec();
            for &pos in decisions {
                let pos = pos as usize;
                cycle.push(Some(labels[pos]));
                for (i, code) in state.iter_mut().enumerate() {
                    let job = unpack(*code);
                    *code = pack(if i == pos { job.run(self.periods[i]) } else { job.idle() });
                }
                for &(lo, hi) in &self.blocks {
                    if hi - lo > 1 {
                        let mut pairs: Vec<(u16, usize)> = (lo..hi).map(|i| (state[i], labels[i])).collect();
                        pairs.sort_by_key(|&(v, _)| v);
                        for (k, (v, l)) in pairs.into_iter().enumerate() {
                            state[lo + k] = v;
                            labels[lo + k] = l;
                        }
                    }
                }
            }
            if *state != *start {
                return Err(CoreError::Contract("cycle replay diverged".into()));
            }
            if labels == identity {
                break;
            }
            if cycle.len() == decisions.len() {
                // a single round is often already a valid cycle
                let round = Schedule::new(cycle.clone())?;
                if verify_schedule(&self.instance, &round).is_ok() {
                    return Ok(round);
                }
            }
            if cycle.len() > crate::lift::MAX_LIFTED_LEN {
                return Err(CoreError::Contract("cycle relabelling does not close".into()));
            }
        }
        Schedule::new(cycle)
    }
}
