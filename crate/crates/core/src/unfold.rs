//! Preimages of integer-folded instances at the next fold parameter.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use num_bigint::BigInt;

use crate::error::{CoreError, Result};
use crate::fold::FoldParameter;
use crate::instance::{DprimeScale, Instance};
use crate::Rational;

/// Which `theta - 1` elements may be raised when unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnfoldRule {
    /// At most one `theta - 1` element is raised, to `theta` or `theta + 1`.
    SingleChange,
    /// Any number of `theta - 1` elements may be raised to `theta`, plus at
    /// most one to `theta + 1`. This is the full integer preimage.
    #[default]
    AllChanges,
}

/// `bound + 1/theta`, the slack used by every `D'_theta` test.
pub fn slack_bound(bound: &Rational, theta: u64) -> Rational {
    bound + Rational::new(BigInt::from(1u8), BigInt::from(theta))
}

/// Unfolds every member of `removed` (integer instances with elements in
/// `[min, theta - 1]`) into integer instances with elements in
/// `[min, theta + 1]` and `D'_{theta+2} <= bound + 1/(theta+2)` whose
/// integer fold at `theta` is that member.
///
/// Per member, elements other than `theta/2` and `theta - 1` carry over;
/// each `theta/2` either stays or becomes a pair `theta + 1, theta + 1`;
/// `theta - 1` elements stay or are raised according to `rule`. Outputs are
/// deduplicated and returned in canonical order.
pub fn unfold<'a, I>(removed: I, theta: FoldParameter, bound: &Rational, min: u64, rule: UnfoldRule) -> Result<BTreeSet<Instance>>
where
    I: IntoIterator<Item = &'a Instance>,
{
    let t = theta.get();
    let next = t + 2;
    let scale = DprimeScale::new(next, t + 1, &slack_bound(bound, next))?;
    let (half, top) = (t / 2, t - 1);
    let mut out = BTreeSet::new();
    for member in removed {
        let values = member.integers()?;
        if let Some(&bad) = values.iter().find(|&&v| v < min || v > top) {
            return Err(CoreError::OutOfRange {
                value: alloc::format!("{bad} in {member}"),
                min,
                max: top,
            });
        }
        let halves = values.iter().filter(|&&v| v == half).count();
        let tops = values.iter().filter(|&&v| v == top).count();
        let rest: Vec<u64> = values.iter().copied().filter(|&v| v != half && v != top).collect();
        let base = scale.sum(&rest);
        for expanded in 0..=halves {
            for raised_plus in 0..=usize::from(tops > 0) {
                let max_raised = match rule {
                    UnfoldRule::SingleChange => 1 - raised_plus,
                    UnfoldRule::AllChanges => tops - raised_plus,
                };
                for raised in 0..=max_raised.min(tops - raised_plus) {
                    let kept_tops = tops - raised - raised_plus;
                    let plus = 2 * expanded + raised_plus;
                    let total = base
                        + (halves - expanded) as u128 * scale.weight(half)
                        + kept_tops as u128 * scale.weight(top)
                        + raised as u128 * scale.weight(t)
                        + plus as u128 * scale.weight(t + 1);
                    if total > scale.limit() {
                        continue;
                    }
                    let mut v = rest.clone();
                    v.extend(core::iter::repeat_n(half, halves - expanded));
                    v.extend(core::iter::repeat_n(top, kept_tops));
                    v.extend(core::iter::repeat_n(t, raised));
                    v.extend(core::iter::repeat_n(t + 1, plus));
                    out.insert(Instance::from_integers(&v));
                }
            }
        }
    }
    Ok(out)
}
