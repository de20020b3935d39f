//! Cyclic schedules and the window-based verifier.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::instance::Instance;

/// A finite cycle of job assignments, repeated forever. `None` is an idle day;
/// `Some(j)` runs job `j` (0-based position in the ascending instance).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    cycle: Vec<Option<usize>>,
}

impl Schedule {
    pub fn new(cycle: Vec<Option<usize>>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(CoreError::EmptySchedule);
        }
        Ok(Schedule { cycle })
    }

    /// Builds a schedule with no idle days from 0-based job indices.
    pub fn from_jobs(jobs: &[usize]) -> Result<Self> {
        Schedule::new(jobs.iter().map(|&j| Some(j)).collect())
    }

    /// The all-idle cycle of length 1, which schedules the empty instance.
    pub fn idle() -> Self {
        Schedule { cycle: alloc::vec![None] }
    }

    pub fn cycle(&self) -> &[Option<usize>] {
        &self.cycle
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Days (0-based offsets in the cycle) on which `job` runs.
    pub fn occurrences(&self, job: usize) -> Vec<usize> {
        self.cycle
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Some(job))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn into_cycle(self) -> Vec<Option<usize>> {
        self.cycle
    }
}

impl fmt::Display for Schedule {
    /// 1-based job indices, `0` for idle.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match s {
                Some(j) => write!(f, "{}", j + 1)?,
                None => f.write_str("0")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Schedule {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let cycle = s
            .trim()
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<usize>()
                    .map(|v| v.checked_sub(1))
                    .map_err(|_| CoreError::Parse(format!("invalid schedule token `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(cycle)
    }
}

/// A window of the infinite schedule in which a job runs too rarely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// 0-based job index.
    pub job: usize,
    /// 0-based offset in the cycle where the window starts.
    pub start: usize,
    pub length: u64,
    pub occurrences: u64,
    pub required: u64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "job {} has {} occurrence(s) in the window of length {} starting at day {}, needs {}",
            self.job + 1,
            self.occurrences,
            self.length,
            self.start,
            self.required
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    Malformed(CoreError),
    Violation(Violation),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Malformed(e) => write!(f, "malformed schedule: {e}"),
            VerifyError::Violation(v) => write!(f, "{v}"),
        }
    }
}

/// Checks that `schedule`, repeated forever, gives every job of period `r`
/// at least `floor(a / r)` occurrences in every window of `a` days.
///
/// Windows up to the cycle length are checked through the spans of `c`
/// consecutive occurrences (a window strictly between two occurrences `c`
/// apart holds `c - 1` of them), together with the per-cycle count
/// `k >= ceil(L / r)`, which carries the property to longer windows.
pub fn verify_schedule(instance: &Instance, schedule: &Schedule) -> Result<(), VerifyError> {
    let n = instance.len();
    let len = schedule.len();
    let mut positions: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (day, slot) in schedule.cycle().iter().enumerate() {
        if let Some(job) = *slot {
            if job >= n {
                return Err(VerifyError::Malformed(CoreError::JobOutOfRange { job, jobs: n }));
            }
            positions[job].push(day);
        }
    }
    for (job, (period, pos)) in instance.iter().zip(&positions).enumerate() {
        let (num, den) = (period.numerator() as u128, period.denominator() as u128);
        let k = pos.len();
        if k == 0 {
            return Err(VerifyError::Violation(Violation {
                job,
                start: 0,
                length: period.ceil(),
                occurrences: 0,
                required: 1,
            }));
        }
        // spans of more than `den` gaps split into spans of at most `den`
        for c in 1..=den as usize {
            // ceil(c * r)
            let bound = (c as u128 * num).div_ceil(den);
            for i in 0..k {
                let j = i + c;
                let end = pos[j % k] + len * (j / k);
                let span = (end - pos[i]) as u128;
                if span > bound {
                    let length = (span - 1) as u64;
                    return Err(VerifyError::Violation(Violation {
                        job,
                        start: (pos[i] + 1) % len,
                        length,
                        occurrences: c as u64 - 1,
                        required: period.required_in(length),
                    }));
                }
            }
        }
        // k >= ceil(L / r) = ceil(L * den / num)
        let needed = (len as u128 * den).div_ceil(num);
        if (k as u128) < needed {
            let mut t = 1u64;
            while t * k as u64 >= period.required_in(t * len as u64) {
                t += 1;
            }
            return Err(VerifyError::Violation(Violation {
                job,
                start: 0,
                length: t * len as u64,
                occurrences: t * k as u64,
                required: period.required_in(t * len as u64),
            }));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sched(tokens: &str) -> Schedule {
        tokens.parse().unwrap()
    }

    #[test]
    fn round_robin_at_capacity() {
        let a = Instance::from_integers(&[4, 4, 4, 4]);
        assert_eq!(verify_schedule(&a, &sched("1,2,3,4")), Ok(()));
    }

    #[test]
    fn two_three_six_violation_names_job_two() {
        let a = Instance::from_integers(&[2, 3, 6]);
        match verify_schedule(&a, &sched("1,2,1,3")) {
            Err(VerifyError::Violation(v)) => {
                assert_eq!(v.job, 1);
                assert_eq!(v.start, 2);
                assert_eq!(v.length, 3);
                assert_eq!(v.occurrences, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fractional_single_job() {
        // occurrences at 0, 1, 3 of a length-5 cycle; value fixed by the
        // brute-force window oracle in tests/verify_oracle.rs
        let a: Instance = "5/2".parse().unwrap();
        assert_eq!(verify_schedule(&a, &sched("1,1,0,1,0")), Ok(()));
        assert_eq!(verify_schedule(&a, &sched("1,0,1,0,0")), Ok(()));
        // two occurrences per six days falls short on windows of length 12
        assert!(verify_schedule(&a, &sched("1,0,0,1,0,0")).is_err());
    }

    #[test]
    fn malformed_and_missing_jobs() {
        let a = Instance::from_integers(&[3, 3]);
        assert!(matches!(
            verify_schedule(&a, &sched("1,3,0")),
            Err(VerifyError::Malformed(CoreError::JobOutOfRange { job: 2, jobs: 2 }))
        ));
        assert!(matches!(
            verify_schedule(&a, &sched("1,0,0")),
            Err(VerifyError::Violation(Violation { job: 1, .. }))
        ));
    }

    #[test]
    fn empty_instance_idle_cycle() {
        assert_eq!(verify_schedule(&Instance::empty(), &Schedule::idle()), Ok(()));
    }

    #[test]
    fn schedule_text_roundtrip() {
        let s = sched("1,0,2");
        assert_eq!(s.cycle(), &[Some(0), None, Some(1)]);
        assert_eq!(s.to_string(), "1,0,2");
        assert!("".parse::<Schedule>().is_err());
        assert!("1,x".parse::<Schedule>().is_err());
    }
}
