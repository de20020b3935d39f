//! Density-bound proofs by folding.
//!
//! A proof for minimum period `m` and bound `d` is a chain of stages over
//! even fold parameters `theta_min, theta_min + 2, ..., theta_max`. Stage
//! `theta` holds `L`, integer instances with a stored schedule, and `R`,
//! instances deferred to the next stage. The chain is valid when
//!
//! 1. every integer instance with elements in `[m, theta_min - 1]` and
//!    `D'_theta_min <= d + 1/theta_min` is in `R` or covered by a member of `L`,
//! 2. every unfolding of `R_theta` is in `R_{theta+2}` or covered by `L_{theta+2}`,
//! 3. every stored schedule verifies,
//! 4. `R_theta_max` is empty.
//!
//! Then any instance with elements at least `m` and density at most `d` folds,
//! at some stage, to an instance covered by a member of `L`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dominance::{covers, dominates};
use crate::error::{CoreError, Result};
use crate::fold::{ffold, ffold_traced, FoldParameter};
use crate::instance::{DprimeScale, Instance};
use crate::lift::lift_schedule;
use crate::schedule::{verify_schedule, Schedule};
use crate::unfold::{slack_bound, unfold, UnfoldRule};
use crate::Rational;

/// Candidates are classified in chunks of this size; members of a chunk are
/// solved independently of each other.
pub const CLASSIFY_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofParams {
    pub min: u64,
    pub bound: Rational,
    pub theta_min: u64,
    pub theta_max: u64,
}

impl ProofParams {
    pub fn new(min: u64, bound: Rational, theta_min: u64, theta_max: u64) -> Result<Self> {
        let p = ProofParams {
            min,
            bound,
            theta_min,
            theta_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(CoreError::InvalidParams(why));
        if self.min < 2 {
            return bad(format!("minimum period {} is below 2", self.min));
        }
        if self.bound.is_negative() || self.bound >= Rational::one() {
            return bad(format!("bound {} is outside [0, 1)", self.bound));
        }
        FoldParameter::new(self.theta_min)?;
        FoldParameter::new(self.theta_max)?;
        if self.theta_min > self.theta_max {
            return bad(format!("theta range {}..{} is empty", self.theta_min, self.theta_max));
        }
        if self.min >= self.theta_min {
            return bad(format!("minimum period {} is not below theta {}", self.min, self.theta_min));
        }
        Ok(())
    }

    pub fn thetas(&self) -> impl Iterator<Item = u64> {
        (self.theta_min..=self.theta_max).step_by(2)
    }
}

/// How base candidates are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMode {
    /// Every qualifying multiset.
    #[default]
    Exact,
    /// Only multisets that cannot take one more `theta - 1` element.
    Saturated,
}

/// Integer instances with elements in `[min, theta - 1]` and
/// `D'_theta <= bound + 1/theta`, in canonical order.
pub fn enumerate_base(theta: u64, min: u64, bound: &Rational, mode: BaseMode) -> Result<Vec<Instance>> {
    FoldParameter::new(theta)?;
    if min == 0 || min >= theta {
        return Err(CoreError::InvalidParams(format!("minimum period {min} must lie in [1, {theta})")));
    }
    let top = theta - 1;
    let scale = DprimeScale::new(theta, top, &slack_bound(bound, theta))?;
    let free_top = match mode {
        BaseMode::Exact => top,
        BaseMode::Saturated => top - 1,
    };
    let values: Vec<u64> = (min..=free_top).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    enumerate_counts(&scale, &values, 0, 0, &mut current, &mut |chosen, used| {
        let mut v = chosen.to_vec();
        if mode == BaseMode::Saturated {
            let w = scale.weight(top);
            let room = (scale.limit() - used) / w;
            v.extend(core::iter::repeat_n(top, room as usize));
        }
        out.push(Instance::from_integers(&v));
    });
    out.sort();
    Ok(out)
}

fn enumerate_counts(
    scale: &DprimeScale,
    values: &[u64],
    at: usize,
    used: u128,
    current: &mut Vec<u64>,
    emit: &mut dyn FnMut(&[u64], u128),
) {
    if at == values.len() {
        emit(current, used);
        return;
    }
    let w = scale.weight(values[at]);
    let mut sum = used;
    let mut pushed = 0;
    loop {
        enumerate_counts(scale, values, at + 1, sum, current, emit);
        sum += w;
        if sum > scale.limit() {
            break;
        }
        current.push(values[at]);
        pushed += 1;
    }
    current.truncate(current.len() - pushed);
}

/// One stage of a proof chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofStage {
    pub theta: u64,
    pub lists: BTreeMap<Instance, Schedule>,
    pub removed: BTreeSet<Instance>,
}

impl ProofStage {
    pub fn empty(theta: u64) -> Self {
        ProofStage {
            theta,
            ..ProofStage::default()
        }
    }

    /// A member of `L` covering `target`, preferring an exact match.
    pub fn cover_in_lists(&self, target: &Instance) -> Option<&Instance> {
        if let Some((k, _)) = self.lists.get_key_value(target) {
            return Some(k);
        }
        self.lists.keys().find(|k| covers(k, target))
    }

    pub fn is_resolved(&self, candidate: &Instance) -> bool {
        self.removed.contains(candidate) || self.cover_in_lists(candidate).is_some()
    }
}

/// Outcome of classifying one stage's candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classified {
    pub lists: BTreeMap<Instance, Schedule>,
    pub removed: BTreeSet<Instance>,
    /// Candidates settled by a member of `lists` without solving.
    pub covered: usize,
}

/// Solves a chunk of candidates; `None` for each candidate left unsolved.
pub type ChunkSolver<'a> = dyn FnMut(&[Instance]) -> Result<Vec<Option<Schedule>>> + 'a;

/// Classifies candidates in order of decreasing density. Candidates covered
/// by an already solved instance are dropped; the others of each chunk are
/// handed to `solve_chunk`, whose schedules are verified before acceptance.
pub fn classify(candidates: &BTreeSet<Instance>, solve_chunk: &mut ChunkSolver<'_>) -> Result<Classified> {
    let mut order: Vec<(Rational, &Instance)> = candidates.iter().map(|c| (c.density(), c)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let mut out = Classified::default();
    for chunk in order.chunks(CLASSIFY_CHUNK) {
        let mut pending = Vec::new();
        for (_, c) in chunk {
            if out.lists.keys().any(|k| covers(k, c)) {
                out.covered += 1;
            } else {
                pending.push((*c).clone());
            }
        }
        if pending.is_empty() {
            continue;
        }
        let results = solve_chunk(&pending)?;
        if results.len() != pending.len() {
            return Err(CoreError::Contract(format!(
                "chunk solver returned {} results for {} candidates",
                results.len(),
                pending.len()
            )));
        }
        for (c, r) in pending.into_iter().zip(results) {
            match r {
                Some(s) => {
                    verify_schedule(&c, &s).map_err(|e| CoreError::Contract(format!("schedule for {c} fails: {e}")))?;
                    out.lists.insert(c, s);
                }
                None => {
                    out.removed.insert(c);
                }
            }
        }
    }
    Ok(out)
}

fn stage_from(theta: u64, classified: Classified) -> ProofStage {
    ProofStage {
        theta,
        lists: classified.lists,
        removed: classified.removed,
    }
}

/// Candidates of the first stage.
pub fn base_candidates(params: &ProofParams, mode: BaseMode) -> Result<BTreeSet<Instance>> {
    Ok(enumerate_base(params.theta_min, params.min, &params.bound, mode)?.into_iter().collect())
}

/// Candidates of the stage after `prev`.
pub fn next_candidates(prev: &ProofStage, params: &ProofParams) -> Result<BTreeSet<Instance>> {
    unfold(&prev.removed, FoldParameter::new(prev.theta)?, &params.bound, params.min, UnfoldRule::AllChanges)
}

pub fn base_stage(params: &ProofParams, mode: BaseMode, solve_chunk: &mut ChunkSolver<'_>) -> Result<ProofStage> {
    let candidates = base_candidates(params, mode)?;
    Ok(stage_from(params.theta_min, classify(&candidates, solve_chunk)?))
}

pub fn advance_stage(prev: &ProofStage, params: &ProofParams, solve_chunk: &mut ChunkSolver<'_>) -> Result<ProofStage> {
    if prev.theta + 2 > params.theta_max {
        return Err(CoreError::InvalidParams(format!("no stage after theta {}", prev.theta)));
    }
    let candidates = next_candidates(prev, params)?;
    Ok(stage_from(prev.theta + 2, classify(&candidates, solve_chunk)?))
}

/// A complete or partial proof chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofChain {
    pub params: ProofParams,
    pub stages: Vec<ProofStage>,
}

impl ProofChain {
    pub fn stage(&self, theta: u64) -> Result<&ProofStage> {
        self.stages
            .iter()
            .find(|s| s.theta == theta)
            .ok_or(CoreError::MissingStage(theta))
    }
}

/// Proves a chain stage by stage, stopping early once `R` is empty (later
/// stages are then empty as well and are emitted as such).
pub fn prove(params: &ProofParams, mode: BaseMode, solve_chunk: &mut ChunkSolver<'_>) -> Result<ProofChain> {
    prove_observed(params, mode, solve_chunk, &mut |_| {})
}

/// Like [`prove`], calling `on_stage` after each stage is complete.
pub fn prove_observed(
    params: &ProofParams,
    mode: BaseMode,
    solve_chunk: &mut ChunkSolver<'_>,
    on_stage: &mut dyn FnMut(&ProofStage),
) -> Result<ProofChain> {
    params.validate()?;
    let mut stages = alloc::vec![base_stage(params, mode, solve_chunk)?];
    on_stage(&stages[0]);
    while let Some(prev) = stages.last() {
        if prev.theta >= params.theta_max {
            break;
        }
        let next = if prev.removed.is_empty() {
            ProofStage::empty(prev.theta + 2)
        } else {
            advance_stage(prev, params, solve_chunk)?
        };
        on_stage(&next);
        stages.push(next);
    }
    Ok(ProofChain {
        params: params.clone(),
        stages,
    })
}

/// The first stage whose `L` covers `ffold(a, theta)`, with the covering
/// member.
pub fn theta_generator<'c>(a: &Instance, chain: &'c ProofChain) -> Result<Option<(u64, &'c Instance)>> {
    for theta in chain.params.thetas() {
        let stage = chain.stage(theta)?;
        let folded = ffold(a, FoldParameter::new(theta)?)?;
        if let Some(cover) = stage.cover_in_lists(&folded) {
            return Ok(Some((theta, cover)));
        }
    }
    Ok(None)
}

/// A verified schedule for `a`, built from a stored schedule of the stage
/// found by [`theta_generator`].
pub fn schedule_via_proof(a: &Instance, chain: &ProofChain) -> Result<Schedule> {
    let Some((theta, cover)) = theta_generator(a, chain)? else {
        return Err(CoreError::Contract(format!("no stage covers any fold of {a}")));
    };
    let (folded, trace) = ffold_traced(a, FoldParameter::new(theta)?)?;
    let witness = dominates(cover, &folded).ok_or_else(|| CoreError::Contract(format!("{cover} does not cover {folded}")))?;
    let stored = &chain.stage(theta)?.lists[cover];
    let transferred = witness.transfer(stored, cover.len());
    lift_schedule(&transferred, trace.trace(), a)
}

/// A reason a chain is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertifyFailure {
    MissingStage(u64),
    /// An element outside `[min, theta - 1]`.
    OutOfRange { theta: u64, instance: Instance },
    /// An instance in both `L` and `R`.
    Overlap { theta: u64, instance: Instance },
    Uncovered { property: u8, theta: u64, instance: Instance },
    BadSchedule { theta: u64, instance: Instance, reason: String },
    RemainingAtEnd { theta: u64, count: usize },
    /// An `R` member that is not a candidate of its stage.
    Extraneous { theta: u64, instance: Instance },
    Error(String),
}

impl fmt::Display for CertifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyFailure::MissingStage(t) => write!(f, "missing-stage theta={t}"),
            CertifyFailure::OutOfRange { theta, instance } => write!(f, "out-of-range theta={theta} instance={instance}"),
            CertifyFailure::Overlap { theta, instance } => write!(f, "overlap theta={theta} instance={instance}"),
            CertifyFailure::Uncovered {
                property,
                theta,
                instance,
            } => write!(f, "property{property} uncovered theta={theta} instance={instance}"),
            CertifyFailure::BadSchedule { theta, instance, reason } => {
                write!(f, "property3 bad-schedule theta={theta} instance={instance} reason={reason}")
            }
            CertifyFailure::RemainingAtEnd { theta, count } => write!(f, "property4 remaining theta={theta} count={count}"),
            CertifyFailure::Extraneous { theta, instance } => write!(f, "extraneous theta={theta} instance={instance}"),
            CertifyFailure::Error(e) => write!(f, "error {e}"),
        }
    }
}

/// Re-checks the four chain properties without solving. Candidates of every
/// stage are recomputed from the previous stage's `R`.
pub fn certify_chain(chain: &ProofChain, mode: BaseMode) -> Vec<CertifyFailure> {
    let mut failures = Vec::new();
    let params = &chain.params;
    if let Err(e) = params.validate() {
        failures.push(CertifyFailure::Error(format!("{e}")));
        return failures;
    }
    let mut prev: Option<&ProofStage> = None;
    for theta in params.thetas() {
        let Ok(stage) = chain.stage(theta) else {
            failures.push(CertifyFailure::MissingStage(theta));
            return failures;
        };
        check_stage_shape(stage, params.min, &mut failures);
        for (instance, schedule) in &stage.lists {
            if let Err(e) = verify_schedule(instance, schedule) {
                failures.push(CertifyFailure::BadSchedule {
                    theta,
                    instance: instance.clone(),
                    reason: format!("{e}"),
                });
            }
        }
        let (property, candidates) = match prev {
            None => (1, base_candidates(params, mode)),
            Some(p) => (2, next_candidates(p, params)),
        };
        match candidates {
            Ok(candidates) => {
                for c in &candidates {
                    if !stage.is_resolved(c) {
                        failures.push(CertifyFailure::Uncovered {
                            property,
                            theta,
                            instance: c.clone(),
                        });
                    }
                }
                for r in stage.removed.difference(&candidates) {
                    failures.push(CertifyFailure::Extraneous {
                        theta,
                        instance: r.clone(),
                    });
                }
            }
            Err(e) => failures.push(CertifyFailure::Error(format!("theta={theta}: {e}"))),
        }
        prev = Some(stage);
    }
    if let Some(last) = prev {
        if !last.removed.is_empty() {
            failures.push(CertifyFailure::RemainingAtEnd {
                theta: last.theta,
                count: last.removed.len(),
            });
        }
    }
    failures
}

fn check_stage_shape(stage: &ProofStage, min: u64, failures: &mut Vec<CertifyFailure>) {
    let theta = stage.theta;
    let in_range = |a: &Instance| {
        a.is_integral() && a.iter().all(|p| p.as_integer().is_some_and(|v| v >= min && v < theta))
    };
    for a in stage.lists.keys().chain(&stage.removed) {
        if !in_range(a) {
            failures.push(CertifyFailure::OutOfRange {
                theta,
                instance: a.clone(),
            });
        }
    }
    for a in stage.removed.iter().filter(|a| stage.lists.contains_key(*a)) {
        failures.push(CertifyFailure::Overlap {
            theta,
            instance: a.clone(),
        });
    }
}

/// `num/den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Whether `a` satisfies the hypotheses of a proof with `params`.
pub fn in_contract(a: &Instance, params: &ProofParams) -> bool {
    a.is_integral()
        && a.min().is_none_or(|m| m.as_integer().is_some_and(|v| v >= params.min))
        && a.density() <= params.bound
        && !(a.is_empty() && params.bound.is_zero())
}
