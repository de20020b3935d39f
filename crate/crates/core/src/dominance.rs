//! Domination between instances: a schedule for the cover yields one for the
//! target.

use alloc::vec::Vec;

use crate::instance::Instance;
use crate::schedule::Schedule;

/// Maps every target position to a distinct cover position holding a period
/// no larger than the target's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationWitness {
    assignment: Vec<usize>,
}

impl DominationWitness {
    /// `assignment()[t]` is the cover position serving target position `t`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Rewrites a schedule of the cover into a schedule of the target: days
    /// of unmatched cover jobs become idle.
    pub fn transfer(&self, cover_schedule: &Schedule, cover_len: usize) -> Schedule {
        let mut inverse = alloc::vec![None; cover_len];
        for (t, &c) in self.assignment.iter().enumerate() {
            inverse[c] = Some(t);
        }
        let cycle = cover_schedule
            .cycle()
            .iter()
            .map(|slot| slot.and_then(|c| inverse.get(c).copied().flatten()))
            .collect();
        Schedule::new(cycle).expect("cycle length preserved")
    }
}

/// Returns a witness iff the `|target|` smallest periods of `cover` are
/// pointwise no larger than the sorted periods of `target`. Then every
/// schedule of `cover` yields one of `target`, so `cover` is at least as hard.
pub fn dominates(cover: &Instance, target: &Instance) -> Option<DominationWitness> {
    if cover.len() < target.len() {
        return None;
    }
    let fits = cover
        .periods()
        .iter()
        .zip(target.periods())
        .all(|(c, t)| c <= t);
    fits.then(|| DominationWitness {
        assignment: (0..target.len()).collect(),
    })
}

/// Cheap boolean form of [`dominates`].
pub fn covers(cover: &Instance, target: &Instance) -> bool {
    cover.len() >= target.len()
        && cover
            .periods()
            .iter()
            .zip(target.periods())
            .all(|(c, t)| c <= t)
}
