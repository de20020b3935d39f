//! Independent reference implementations compared against the library.

use std::collections::HashMap;

use pinwheel_core::fractional::{check_fractional, FractionalCheck};
use pinwheel_core::{solve, verify_schedule, FrozenClock, Instance, Period, Schedule, SolveConfig, SolveOutcome};

/// Counts occurrences in every cyclic window up to three cycle lengths plus
/// three times the largest period.
fn windows_ok(instance: &Instance, cycle: &[Option<usize>]) -> bool {
    let len = cycle.len();
    let longest = 3 * len + 3 * instance.iter().map(|r| r.ceil() as usize).max().unwrap_or(0);
    instance.iter().enumerate().all(|(job, r)| {
        let hits: Vec<u64> = (0..len + longest).map(|d| u64::from(cycle[d % len] == Some(job))).collect();
        (0..len).all(|s| {
            let mut count = 0;
            (1..=longest).all(|a| {
                count += hits[s + a - 1];
                count >= r.required_in(a as u64)
            })
        })
    })
}

struct Lcg(u64);

impl Lcg {
    fn below(&mut self, n: u64) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) % n
    }
}

const SMALL_PERIODS: [&str; 12] = ["1", "2", "3", "4", "5", "6", "3/2", "5/2", "4/3", "5/3", "7/3", "8/3"];

#[test]
fn verifier_matches_window_counting() {
    let mut rng = Lcg(0x5eed);
    let mut accepted = 0;
    for _ in 0..10_000 {
        let n = 1 + rng.below(3) as usize;
        let periods: Vec<Period> = (0..n)
            .map(|_| SMALL_PERIODS[rng.below(SMALL_PERIODS.len() as u64) as usize].parse().unwrap())
            .collect();
        let a = Instance::new(periods);
        let len = 1 + rng.below(12) as usize;
        let cycle: Vec<Option<usize>> = (0..len)
            .map(|_| match rng.below(n as u64 + 1) {
                0 => None,
                j => Some(j as usize - 1),
            })
            .collect();
        let expected = windows_ok(&a, &cycle);
        let got = verify_schedule(&a, &Schedule::new(cycle.clone()).unwrap()).is_ok();
        assert_eq!(got, expected, "{a} with {cycle:?}");
        accepted += usize::from(got);
    }
    assert!(accepted > 100, "sample too easy to reject: {accepted}");
}

#[test]
fn frozen_single_job_examples() {
    let five_halves: Instance = "5/2".parse().unwrap();
    for (cycle, ok) in [("1,1,0,1,0", true), ("1,0,1,0,0", true), ("1,0,0,1,0,0", false), ("1,0,0", false)] {
        let s: Schedule = cycle.parse().unwrap();
        assert_eq!(windows_ok(&five_halves, s.cycle()), ok, "{cycle}");
        assert_eq!(verify_schedule(&five_halves, &s).is_ok(), ok, "{cycle}");
    }
}

/// Disagreements between [`check_fractional`] and windows over the
/// extended history, as (sound rejections missed, conservative rejections).
pub fn compare_fractional(max_num: u64, max_len: usize) -> (Vec<String>, usize) {
    let mut missed = Vec::new();
    let mut conservative = 0;
    for den in [2u64, 3] {
        for num in den + 1..=max_num {
            if num % den == 0 {
                continue;
            }
            let r = Period::new(num, den).unwrap();
            for len in 1..=max_len {
                for bits in 0u32..1 << (len - 1) {
                    // patterns start with an occurrence
                    let pattern = (bits << 1) | 1;
                    let history: Vec<u64> = (0..len as u64).filter(|&i| pattern >> i & 1 == 1).collect();
                    let last = *history.last().unwrap();
                    if last + 1 != len as u64 {
                        continue;
                    }
                    if violated_within(r, &history, last) {
                        continue;
                    }
                    for next in last + 1..=last + r.ceil() {
                        let checker = check_fractional(r, &history, next).unwrap() == FractionalCheck::Violated;
                        let oracle = newly_violated(r, &history, next);
                        if oracle && !checker {
                            missed.push(format!("{r} {history:?} -> {next}"));
                        } else if checker && !oracle {
                            if den == 3 && num % 3 == 1 {
                                conservative += 1;
                            } else {
                                missed.push(format!("spurious {r} {history:?} -> {next}"));
                            }
                        }
                    }
                }
            }
        }
    }
    (missed, conservative)
}

/// Some window inside `[history[0], end]` is short of occurrences.
fn violated_within(r: Period, history: &[u64], end: u64) -> bool {
    (history[0]..=end).any(|e| {
        (history[0]..=e).any(|s| {
            let count = history.iter().filter(|&&d| s <= d && d <= e).count() as u64;
            count < r.required_in(e - s + 1)
        })
    })
}

/// Some window `[s, e]` with `history[0] <= s`, `last < e <= next` has fewer
/// than `floor((e - s + 1) / r)` occurrences.
fn newly_violated(r: Period, history: &[u64], next: u64) -> bool {
    let last = *history.last().unwrap();
    let occurs = |d: u64| d == next || history.contains(&d);
    (last + 1..=next).any(|e| {
        (history[0]..=e).any(|s| {
            let count = (s..=e).filter(|&d| occurs(d)).count() as u64;
            count < r.required_in(e - s + 1)
        })
    })
}

#[test]
fn fractional_checker_matches_windows() {
    let (missed, conservative) = compare_fractional(13, 11);
    assert!(missed.is_empty(), "{missed:?}");
    assert!(conservative > 0);
}

/// Schedulability of an integer instance: prune states without successors
/// from the graph of (days since last run) vectors; a non-empty remainder
/// holds a cycle.
fn graph_schedulable(periods: &[u64]) -> bool {
    let n = periods.len();
    let mut states: Vec<Vec<u64>> = vec![vec![]];
    for &p in periods {
        states = states
            .into_iter()
            .flat_map(|s| {
                (0..p).map(move |e| {
                    let mut t = s.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    let successors = |s: &Vec<u64>| -> Vec<Vec<u64>> {
        (0..=n)
            .filter_map(|choice| {
                let t: Vec<u64> = (0..n).map(|i| if i + 1 == choice { 0 } else { s[i] + 1 }).collect();
                t.iter().zip(periods).all(|(&e, &p)| e < p).then_some(t)
            })
            .collect()
    };
    prune_to_cycles(states, successors)
}

fn prune_to_cycles<S, F>(states: Vec<S>, successors: F) -> bool
where
    S: std::hash::Hash + Eq + Clone,
    F: Fn(&S) -> Vec<S>,
{
    let index: HashMap<S, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let edges: Vec<Vec<usize>> = states
        .iter()
        .map(|s| successors(s).iter().filter_map(|t| index.get(t).copied()).collect())
        .collect();
    let mut preds = vec![Vec::new(); states.len()];
    for (i, es) in edges.iter().enumerate() {
        for &j in es {
            preds[j].push(i);
        }
    }
    let mut out_degree: Vec<usize> = edges.iter().map(Vec::len).collect();
    let mut alive = vec![true; states.len()];
    let mut queue: Vec<usize> = (0..states.len()).filter(|&i| out_degree[i] == 0).collect();
    while let Some(i) = queue.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &p in &preds[i] {
            out_degree[p] -= 1;
            if out_degree[p] == 0 && alive[p] {
                queue.push(p);
            }
        }
    }
    alive.iter().any(|&a| a)
}

fn complete_verdict(a: &Instance) -> bool {
    match solve(a, &SolveConfig::default().complete(), &FrozenClock).unwrap() {
        SolveOutcome::Schedulable(s) => {
            assert!(verify_schedule(a, &s).is_ok());
            true
        }
        SolveOutcome::Unschedulable => false,
        SolveOutcome::Timeout { .. } => panic!("timeout on {a}"),
    }
}

#[test]
fn solver_matches_state_graph_on_small_integer_instances() {
    let mut checked = 0;
    for n in 1..=3usize {
        let mut v = vec![1u64; n];
        loop {
            assert_eq!(complete_verdict(&Instance::from_integers(&v)), graph_schedulable(&v), "{v:?}");
            checked += 1;
            // next non-decreasing vector over 1..=6
            let Some(i) = (0..n).rev().find(|&i| v[i] < 6) else { break };
            let x = v[i] + 1;
            v[i..].iter_mut().for_each(|e| *e = x);
        }
    }
    assert_eq!(checked, 6 + 21 + 56);
}

/// Schedulability from the graph of the last `w` days.
fn history_graph_schedulable(a: &Instance, w: usize) -> bool {
    let n = a.len();
    let symbols = n as u64 + 1;
    let periods: Vec<Period> = a.iter().collect();
    let window_ok = |days: &[u64]| {
        // days[k] = job + 1 or 0; check windows ending at the last day
        let end = days.len();
        periods.iter().enumerate().all(|(job, r)| {
            let mut count = 0;
            (1..=end).all(|len| {
                count += u64::from(days[end - len] == job as u64 + 1);
                count >= r.required_in(len as u64)
            })
        })
    };
    let states: Vec<Vec<u64>> = (0..symbols.pow(w as u32))
        .map(|mut code| {
            (0..w)
                .map(|_| {
                    let d = code % symbols;
                    code /= symbols;
                    d
                })
                .collect()
        })
        .collect();
    let successors = |s: &Vec<u64>| -> Vec<Vec<u64>> {
        (0..symbols)
            .filter_map(|c| {
                let mut days = s.clone();
                days.push(c);
                window_ok(&days).then(|| days[1..].to_vec())
            })
            .collect()
    };
    prune_to_cycles(states, successors)
}

#[test]
fn solver_matches_history_graph_with_fractions() {
    let pool = ["3/2", "5/2", "4/3", "5/3", "7/3", "8/3", "2", "3"];
    let mut conservative = Vec::new();
    for i in 0..pool.len() {
        for j in i..pool.len() {
            let a: Instance = format!("{},{}", pool[i], pool[j]).parse().unwrap();
            let exact = history_graph_schedulable(&a, 9);
            let found = complete_verdict(&a);
            if found != exact {
                let one_mod_three = a.iter().any(|p| p.denominator() == 3 && p.numerator() % 3 == 1);
                assert!(exact && !found && one_mod_three, "{a}: solver {found}, oracle {exact}");
                conservative.push(a.to_string());
            }
        }
    }
    assert!(conservative.len() <= 3, "{conservative:?}");
}
