//! Pinwheel instances and their exact densities.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{CoreError, Result};
use crate::period::Period;
use crate::Rational;

/// A multiset of periods, always kept in ascending order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Instance {
    periods: Vec<Period>,
}

impl Instance {
    pub fn new(mut periods: Vec<Period>) -> Self {
        periods.sort();
        Instance { periods }
    }

    pub fn empty() -> Self {
        Instance::default()
    }

    /// Builds an integer instance. Panics if any value is zero.
    pub fn from_integers(values: &[u64]) -> Self {
        Instance::new(values.iter().map(|&v| Period::integer(v)).collect())
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Period> + '_ {
        self.periods.iter().copied()
    }

    pub fn get(&self, index: usize) -> Option<Period> {
        self.periods.get(index).copied()
    }

    pub fn min(&self) -> Option<Period> {
        self.periods.first().copied()
    }

    pub fn max(&self) -> Option<Period> {
        self.periods.last().copied()
    }

    pub fn is_integral(&self) -> bool {
        self.periods.iter().all(|p| p.is_integer())
    }

    /// The integer values, or an error if any period is fractional.
    pub fn integers(&self) -> Result<Vec<u64>> {
        self.periods
            .iter()
            .map(|p| p.as_integer().ok_or(CoreError::FractionalElement))
            .collect()
    }

    /// Returns a new instance with `period` added.
    pub fn with(&self, period: Period) -> Instance {
        let mut periods = self.periods.clone();
        let at = periods.partition_point(|p| *p <= period);
        periods.insert(at, period);
        Instance { periods }
    }

    /// Exact density `sum 1/a_i`; zero for the empty instance.
    pub fn density(&self) -> Rational {
        // Sum over a common denominator, then reduce once.
        let mut denom = BigInt::from(1u8);
        for p in &self.periods {
            denom = denom.lcm(&BigInt::from(p.numerator()));
        }
        let mut numer = BigInt::zero();
        for p in &self.periods {
            numer += &denom / BigInt::from(p.numerator()) * BigInt::from(p.denominator());
        }
        Rational::new(numer, denom)
    }

    pub fn density_f64(&self) -> f64 {
        self.density().to_f64().unwrap_or(f64::INFINITY)
    }

    /// The modified density charging `1/(a+1)` to every element `a >= theta/2`
    /// and `1/a` to the others. Only defined for integer instances.
    pub fn dprime(&self, theta: u64) -> Result<Rational> {
        let values = self.integers()?;
        let mut sum = Rational::zero();
        for a in values {
            let charged = if 2 * a < theta { a } else { a + 1 };
            sum += Rational::new(BigInt::from(1u8), BigInt::from(charged));
        }
        Ok(sum)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.periods.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Instance {
    type Err = CoreError;

    /// Parses comma-separated periods in any order; blank input is the empty
    /// instance. Surrounding brackets are tolerated.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if s.is_empty() {
            return Ok(Instance::empty());
        }
        s.split(',')
            .map(str::parse::<Period>)
            .collect::<Result<Vec<_>>>()
            .map(Instance::new)
    }
}

impl FromIterator<Period> for Instance {
    fn from_iter<I: IntoIterator<Item = Period>>(iter: I) -> Self {
        Instance::new(iter.into_iter().collect())
    }
}

/// Integer weights for fast `D'_theta` comparisons against a rational bound.
///
/// Every term `1/t` with `t <= max_denominator` is scaled by
/// `lcm(1..=max_denominator) * bound.denom`, so sums and the bound are exact
/// integers.
#[derive(Debug, Clone)]
pub struct DprimeScale {
    theta: u64,
    weights: Vec<u128>,
    limit: u128,
}

impl DprimeScale {
    /// Weights for elements in `[1, max_element]` and the bound
    /// `bound` (already including any `1/theta` slack).
    pub fn new(theta: u64, max_element: u64, bound: &Rational) -> Result<Self> {
        let overflow = || CoreError::Overflow("D' scaling");
        let mut scale: u128 = 1;
        for t in 1..=(max_element as u128 + 1) {
            scale = scale
                .checked_div(scale.gcd(&t))
                .and_then(|s| s.checked_mul(t))
                .ok_or_else(overflow)?;
        }
        let bden = bound.denom().to_u128().ok_or_else(overflow)?;
        let bnum = bound.numer().to_i128().ok_or_else(overflow)?;
        if bnum < 0 {
            return Err(CoreError::InvalidParams(format!("negative bound {bound}")));
        }
        let scale = scale.checked_mul(bden).ok_or_else(overflow)?;
        let limit = (bnum as u128)
            .checked_mul(scale / bden)
            .ok_or_else(overflow)?;
        let weights = (0..=max_element)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    let charged = if 2 * a < theta { a } else { a + 1 };
                    scale / charged as u128
                }
            })
            .collect();
        Ok(DprimeScale {
            theta,
            weights,
            limit,
        })
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    /// Scaled weight of element `a`. Panics if `a` exceeds `max_element`.
    pub fn weight(&self, a: u64) -> u128 {
        self.weights[a as usize]
    }

    pub fn limit(&self) -> u128 {
        self.limit
    }

    pub fn sum(&self, values: &[u64]) -> u128 {
        values.iter().map(|&a| self.weight(a)).sum()
    }

    pub fn within(&self, values: &[u64]) -> bool {
        self.sum(values) <= self.limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn density_examples() {
        assert_eq!(Instance::from_integers(&[2, 3, 6]).density(), q(1, 1));
        assert_eq!(Instance::from_integers(&[4, 5, 5, 5]).density(), q(17, 20));
        assert_eq!(Instance::empty().density(), q(0, 1));
        let folded = Instance::from_integers(&[7, 7, 8, 9, 11, 15, 19, 20, 23, 23, 23]);
        let expected = q(2, 7) + q(1, 8) + q(1, 9) + q(1, 11) + q(1, 15) + q(1, 19) + q(1, 20) + q(3, 23);
        assert_eq!(folded.density(), expected);
        assert!((folded.density_f64() - 0.9125).abs() < 1e-3);
    }

    #[test]
    fn density_with_fractions() {
        let a: Instance = "5,17/2,13/3".parse().unwrap();
        assert_eq!(a.density(), q(1, 5) + q(2, 17) + q(3, 13));
    }

    #[test]
    fn dprime_examples() {
        let a = Instance::from_integers(&[4, 4, 6]);
        assert_eq!(a.dprime(12).unwrap(), q(1, 4) + q(1, 4) + q(1, 7));
        let r16 = Instance::from_integers(&[5, 7, 8, 8, 11, 15, 15, 15, 15]);
        let d = r16.dprime(16).unwrap();
        assert_eq!(d, q(1, 5) + q(1, 7) + q(2, 9) + q(1, 12) + q(4, 16));
        assert!(d <= q(84, 100) + q(1, 16));
        assert_eq!(Instance::from_integers(&[11]).dprime(12).unwrap(), q(1, 12));
        let frac: Instance = "5,15/2".parse().unwrap();
        assert_eq!(frac.dprime(12), Err(CoreError::FractionalElement));
    }

    #[test]
    fn dprime_scale_matches_exact() {
        let bound = q(84, 100) + q(1, 16);
        let scale = DprimeScale::new(16, 17, &bound).unwrap();
        let r16 = [5u64, 7, 8, 8, 11, 15, 15, 15, 15];
        assert!(scale.within(&r16));
        let over = [4u64, 4, 4, 5];
        assert!(!scale.within(&over));
    }

    #[test]
    fn parse_canonicalizes() {
        let a: Instance = "9, 5,17/2,7".parse().unwrap();
        assert_eq!(a.to_string(), "5,7,17/2,9");
        assert_eq!("".parse::<Instance>().unwrap(), Instance::empty());
        assert_eq!("[4,4]".parse::<Instance>().unwrap(), Instance::from_integers(&[4, 4]));
    }
}
