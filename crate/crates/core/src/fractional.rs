//! Constant-time constraint checks for periods with denominator 2 or 3.
//!
//! A job of period `r` needs `floor(a / r)` occurrences in every window of
//! `a` days, which is the same as: any `c` consecutive gaps sum to at most
//! `ceil(c * r)`. With `g = ceil(r)` this reduces to
//!
//! * `p/2`: no two consecutive gaps equal `g`;
//! * `p/3`, `p = 2 (mod 3)`: no three consecutive gaps equal `g`;
//! * `p/3`, `p = 1 (mod 3)`: no two gaps equal `g` among three consecutive
//!   ones. This one is conservative: `g, short, g` can be legal when the
//!   short gap is at most `floor(r) - 1`.

use crate::error::{CoreError, Result};
use crate::period::Period;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractionalCheck {
    Pass,
    Violated,
}

/// The fractional gap rule over explicit occurrence times. `history` holds the previous
/// occurrence times in increasing order and `next` the candidate time.
pub fn check_fractional(period: Period, history: &[u64], next: u64) -> Result<FractionalCheck> {
    if period.is_integer() {
        return Err(CoreError::IntegerPeriod(alloc::format!("{period}")));
    }
    let ceil = period.ceil();
    let len = history.len();
    let gap = |i: usize| history[len - i] - history[len - i - 1];
    let next_gap = match history.last() {
        Some(&last) if next > last => next - last,
        Some(_) => return Ok(FractionalCheck::Violated),
        None => return Ok(FractionalCheck::Pass),
    };
    let violated = match period.denominator() {
        2 => len >= 2 && gap(1) == ceil && next_gap == ceil,
        _ if len < 2 => false,
        _ if period.numerator() % 3 == 1 => {
            next_gap == ceil && (gap(1) == ceil || (len >= 3 && gap(2) == ceil))
        }
        _ => len > 2 && next_gap == ceil && gap(1) == ceil && gap(2) == ceil,
    };
    Ok(if violated {
        FractionalCheck::Violated
    } else {
        FractionalCheck::Pass
    })
}

/// The suffix of a job's history the checker needs: whether each of the
/// last two gaps was a ceiling gap. Flags are `false` until set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CeilFlags {
    pub last: bool,
    pub before_last: bool,
}

impl CeilFlags {
    pub fn push(self, was_ceil: bool) -> Self {
        CeilFlags {
            last: was_ceil,
            before_last: self.last,
        }
    }

    pub fn bits(self) -> u16 {
        self.last as u16 | (self.before_last as u16) << 1
    }

    pub fn from_bits(bits: u16) -> Self {
        CeilFlags {
            last: bits & 1 != 0,
            before_last: bits & 2 != 0,
        }
    }
}

/// Whether the next gap must stay below `ceil(period)`.
pub fn ceil_gap_forbidden(period: Period, flags: CeilFlags) -> bool {
    match period.denominator() {
        1 => false,
        2 => flags.last,
        _ if period.numerator() % 3 == 1 => flags.last || flags.before_last,
        _ => flags.last && flags.before_last,
    }
}

/// Longest gap allowed next for a job in state `flags`.
pub fn max_next_gap(period: Period, flags: CeilFlags) -> u64 {
    period.ceil() - u64::from(ceil_gap_forbidden(period, flags))
}

/// Per-job search state: days since the last occurrence and the ceiling
/// flags (always clear for integer periods).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct JobState {
    pub elapsed: u64,
    pub flags: CeilFlags,
}

impl JobState {
    /// State after the job runs with gap `elapsed + 1`.
    pub fn run(self, period: Period) -> JobState {
        let gap = self.elapsed + 1;
        let flags = if period.is_integer() {
            CeilFlags::default()
        } else {
            self.flags.push(gap == period.ceil())
        };
        JobState { elapsed: 0, flags }
    }

    pub fn idle(self) -> JobState {
        JobState {
            elapsed: self.elapsed + 1,
            ..self
        }
    }

    /// Days left before the job must run, counting today (at least 1 in a
    /// live state).
    pub fn slack(self, period: Period) -> i64 {
        max_next_gap(period, self.flags) as i64 - self.elapsed as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Period {
        s.parse().unwrap()
    }

    #[test]
    fn denominator_two() {
        // ceil(15/2) = 8
        assert_eq!(check_fractional(p("15/2"), &[0, 8], 16).unwrap(), FractionalCheck::Violated);
        assert_eq!(check_fractional(p("15/2"), &[0, 7], 15).unwrap(), FractionalCheck::Pass);
        assert_eq!(check_fractional(p("15/2"), &[0], 8).unwrap(), FractionalCheck::Pass);
    }

    #[test]
    fn denominator_three_one_mod_three() {
        // 13/3: ceil 5; gaps (5, 3) then 5
        assert_eq!(check_fractional(p("13/3"), &[0, 5, 8], 13).unwrap(), FractionalCheck::Violated);
        assert_eq!(check_fractional(p("13/3"), &[0, 5], 10).unwrap(), FractionalCheck::Violated);
        assert_eq!(check_fractional(p("13/3"), &[0, 4, 8], 13).unwrap(), FractionalCheck::Pass);
    }

    #[test]
    fn denominator_three_two_mod_three() {
        // 17/3: ceil 6
        assert_eq!(check_fractional(p("17/3"), &[0, 6, 12], 18).unwrap(), FractionalCheck::Violated);
        assert_eq!(check_fractional(p("17/3"), &[0, 6, 11], 17).unwrap(), FractionalCheck::Pass);
        assert_eq!(check_fractional(p("17/3"), &[0, 6], 12).unwrap(), FractionalCheck::Pass);
    }

    #[test]
    fn integer_period_is_an_error() {
        assert!(check_fractional(Period::integer(5), &[0], 5).is_err());
    }

    #[test]
    fn flags_agree_with_history_form() {
        let period = p("13/3");
        let state = JobState::default().run(period);
        assert!(!state.flags.last);
        let mut s = JobState { elapsed: 4, flags: CeilFlags::default() };
        s = s.run(period);
        assert!(s.flags.last);
        assert_eq!(s.slack(period), 4);
    }
}
