//! End-to-end pipelines: unfold against brute force, fold and lift,
//! partition solving, and schedules read off a proof chain.

use std::collections::{BTreeMap, BTreeSet};

use pinwheel_core::fast::{fast_solve_with, ranked_partitions, FastConfig};
use pinwheel_core::generate::{gen_density, gen_scaling, InstanceSampler};
use pinwheel_core::partition::folded_instance;
use pinwheel_core::proof::{
    certify_chain, enumerate_base, in_contract, prove, ratio, schedule_via_proof, BaseMode, ProofParams,
};
use pinwheel_core::fold::ffold_traced;
use pinwheel_core::unfold::slack_bound;
use pinwheel_core::{
    lift_schedule, solve, unfold, verify_schedule, FoldParameter, FrozenClock, Instance, Partition,
    PartitionFilter, Rational, Schedule, SolveConfig, SolveOutcome, UnfoldRule,
};
use proptest::prelude::*;

fn bounded(nodes: u64) -> SolveConfig {
    SolveConfig {
        node_limit: Some(nodes),
        ..SolveConfig::default()
    }
}

/// Every non-empty multiset over `[lo, hi]` with `D'_theta <= limit`.
fn multisets_within(lo: u64, hi: u64, theta: u64, limit: &Rational) -> Vec<Instance> {
    fn grow(v: &mut Vec<u64>, from: u64, hi: u64, theta: u64, limit: &Rational, out: &mut Vec<Instance>) {
        for x in from..=hi {
            v.push(x);
            let a = Instance::from_integers(v);
            if a.dprime(theta).unwrap() <= *limit {
                out.push(a);
                grow(v, x, hi, theta, limit, out);
            }
            v.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), lo, hi, theta, limit, &mut out);
    out
}

fn check_unfold_against_preimages(theta: u64, min: u64, bound: Rational) {
    let t = FoldParameter::new(theta).unwrap();
    let limit = slack_bound(&bound, theta + 2);
    let mut preimages: BTreeMap<Instance, BTreeSet<Instance>> = BTreeMap::new();
    for x in multisets_within(min, theta + 1, theta + 2, &limit) {
        let (y, _) = ffold_traced(&x, t).unwrap();
        preimages.entry(y).or_default().insert(x);
    }
    let mut targets: BTreeSet<Instance> = preimages.keys().cloned().collect();
    targets.extend(enumerate_base(theta, min, &bound, BaseMode::Exact).unwrap().into_iter().filter(|y| !y.is_empty()));
    for y in &targets {
        let all = unfold([y], t, &bound, min, UnfoldRule::AllChanges).unwrap();
        assert_eq!(Some(&all), preimages.get(y).or(Some(&BTreeSet::new())), "preimage of {y}");
        let single = unfold([y], t, &bound, min, UnfoldRule::SingleChange).unwrap();
        assert!(single.is_subset(&all), "{y}");
    }
}

#[test]
fn unfold_is_the_exact_preimage() {
    check_unfold_against_preimages(10, 4, ratio(1, 2));
    check_unfold_against_preimages(12, 5, ratio(3, 5));
}

#[test]
fn single_change_misses_multi_raise_preimages() {
    let t = FoldParameter::new(12).unwrap();
    let y = Instance::from_integers(&[11, 11]);
    let all = unfold([&y], t, &ratio(3, 4), 4, UnfoldRule::AllChanges).unwrap();
    let single = unfold([&y], t, &ratio(3, 4), 4, UnfoldRule::SingleChange).unwrap();
    let both_raised = Instance::from_integers(&[12, 12]);
    assert!(all.contains(&both_raised) && !single.contains(&both_raised));
}

fn small_integer_instance() -> impl Strategy<Value = Instance> {
    prop::collection::vec(4u64..=40, 1..=7)
        .prop_map(|v| Instance::from_integers(&v))
        .prop_filter("density at most 4/5", |a| a.density() <= ratio(4, 5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ffold_schedules_lift_to_the_original(a in small_integer_instance(), half in 2u64..=8) {
        let theta = FoldParameter::new(2 * half).unwrap();
        let (folded, trace) = ffold_traced(&a, theta).unwrap();
        if let SolveOutcome::Schedulable(s) = solve(&folded, &bounded(20_000), &FrozenClock).unwrap() {
            let lifted = lift_schedule(&s, trace.trace(), &a).unwrap();
            prop_assert!(verify_schedule(&a, &lifted).is_ok(), "{} via {}", a, folded);
        }
    }

    #[test]
    fn single_attempt_on_the_instance_matches_solve(v in prop::collection::vec(2u64..=12, 1..=4)) {
        let a = Instance::from_integers(&v);
        let cfg = FastConfig { time_limit_ms: u64::MAX, ..FastConfig::default() };
        let report = fast_solve_with(&a, &[Partition::empty()], &cfg, &FrozenClock).unwrap();
        let direct = solve(&a, &SolveConfig::default(), &FrozenClock).unwrap();
        prop_assert_eq!(report.outcome.label(), direct.label());
        prop_assert_eq!(report.attempts, 1);
    }
}

#[test]
fn partition_folds_lift_on_generated_instances() {
    let filter = PartitionFilter::default();
    let mut lifted = 0;
    for a in gen_density(11, 6) {
        for p in ranked_partitions(&a, &filter, 64).unwrap().into_iter().take(3) {
            let (folded, fold) = folded_instance(&a, &p, &filter).unwrap();
            if let SolveOutcome::Schedulable(s) = solve(&folded, &bounded(50_000), &FrozenClock).unwrap() {
                let schedule = lift_schedule(&s, fold.trace(), &a).unwrap();
                assert!(verify_schedule(&a, &schedule).is_ok(), "{a} with {p}");
                lifted += 1;
            }
        }
    }
    assert!(lifted > 0);
}

fn fast_chunk(cands: &[Instance]) -> pinwheel_core::Result<Vec<Option<Schedule>>> {
    let cfg = FastConfig {
        time_limit_ms: u64::MAX,
        attempt_node_limit: Some(200_000),
        max_attempts: Some(16),
        ..FastConfig::default()
    };
    cands
        .iter()
        .map(|c| pinwheel_core::fast_solve(c, &cfg, &FrozenClock).map(|o| o.schedule().cloned()))
        .collect()
}

#[test]
fn proof_chain_schedules_instances_in_contract() {
    let params = ProofParams::new(6, ratio(3, 4), 12, 16).unwrap();
    let chain = prove(&params, BaseMode::Exact, &mut fast_chunk).unwrap();
    assert!(certify_chain(&chain, BaseMode::Exact).is_empty());
    assert!(chain.stage(16).unwrap().removed.is_empty());
    let mut sampler = InstanceSampler::new(3);
    let mut scheduled = 0;
    while scheduled < 200 {
        let n = sampler.uniform(1, 9);
        let a = Instance::from_integers(&(0..n).map(|_| sampler.uniform(6, 120)).collect::<Vec<_>>());
        if !in_contract(&a, &params) {
            continue;
        }
        let s = schedule_via_proof(&a, &chain).unwrap();
        assert!(verify_schedule(&a, &s).is_ok(), "{a}");
        scheduled += 1;
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(gen_density(5, 20), gen_density(5, 20));
    assert_ne!(gen_density(5, 20), gen_density(6, 20));
    let scaled = gen_scaling(20, 9, 30).unwrap();
    assert_eq!(scaled, gen_scaling(20, 9, 30).unwrap());
    assert!(scaled.iter().flat_map(|a| a.iter()).all(|p| p.as_integer().is_some_and(|v| v <= 20)));
}
