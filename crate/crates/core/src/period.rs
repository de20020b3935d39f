//! Job periods: positive rationals with denominator 1, 2 or 3.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::ToString;
use num_bigint::BigInt;
use num_rational::Ratio;

use crate::error::{CoreError, Result};
use crate::Rational;

/// A job period `numerator / denominator` in lowest terms, with
/// `denominator` in `{1, 2, 3}` and value at least 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Period {
    num: u64,
    den: u8,
}

impl Period {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        let invalid = |reason| CoreError::InvalidPeriod {
            numerator,
            denominator,
            reason,
        };
        if !(1..=3).contains(&denominator) {
            return Err(invalid("denominator must be 1, 2 or 3"));
        }
        if numerator < denominator {
            return Err(invalid("period must be at least 1"));
        }
        if numerator % denominator == 0 {
            return Ok(Period {
                num: numerator / denominator,
                den: 1,
            });
        }
        Ok(Period {
            num: numerator,
            den: denominator as u8,
        })
    }

    /// An integer period. Panics on zero.
    pub fn integer(value: u64) -> Self {
        assert!(value >= 1, "period must be positive");
        Period { num: value, den: 1 }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den as u64
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    /// The integer value, if this period is integral.
    pub fn as_integer(self) -> Option<u64> {
        self.is_integer().then_some(self.num)
    }

    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den as u64)
    }

    pub fn floor(self) -> u64 {
        self.num / self.den as u64
    }

    pub fn to_ratio(self) -> Ratio<u64> {
        Ratio::new_raw(self.num, self.den as u64)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new_raw(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `1 / period` as an exact rational.
    pub fn reciprocal(self) -> Rational {
        Rational::new_raw(BigInt::from(self.den), BigInt::from(self.num))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Minimum number of occurrences required in any window of `len` days,
    /// i.e. `floor(len / period)`.
    pub fn required_in(self, len: u64) -> u64 {
        ((len as u128 * self.den as u128) / self.num as u128) as u64
    }

    /// Converts an exact rational to a period if it is representable.
    pub fn from_ratio(value: Ratio<u64>) -> Result<Self> {
        let (n, d) = (*value.numer(), *value.denom());
        if d > 3 {
            return Err(CoreError::UnsupportedDenominator(format!("{n}/{d}")));
        }
        Period::new(n, d)
    }
}

impl Ord for Period {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Period {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Period {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || CoreError::Parse(format!("invalid period `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: u64 = n.parse().map_err(|_| bad())?;
        let d: u64 = d.parse().map_err(|_| bad())?;
        Period::new(n, d).map_err(|e| CoreError::Parse(e.to_string()))
    }
}

impl From<u64> for Period {
    fn from(value: u64) -> Self {
        Period::integer(value)
    }
}
