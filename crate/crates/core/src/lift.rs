//! Turning a schedule of a folded instance into one of the original.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fold::FoldTrace;
use crate::instance::Instance;
use crate::schedule::{verify_schedule, Schedule};

/// Upper bound on the length of a lifted cycle.
pub const MAX_LIFTED_LEN: usize = 1 << 22;

/// Reverses `trace`: every occurrence of a folded job walks down its merge
/// tree, where pair and group nodes hand successive occurrences to their
/// children in rotation and theta replacements pass them straight through.
/// The folded cycle is repeated until every rotation is back at its start,
/// so the result is again a cycle.
///
/// `folded` may schedule any instance that is pointwise no larger than the
/// folded values (e.g. the integer rounding of a fold). The result is
/// verified against `original`; a failure is reported as
/// [`CoreError::LiftFailed`].
pub fn lift_schedule(folded: &Schedule, trace: &FoldTrace, original: &Instance) -> Result<Schedule> {
    if trace.origin_len() != original.len() {
        return Err(CoreError::InvalidTrace(format!(
            "trace covers {} jobs, original has {}",
            trace.origin_len(),
            original.len()
        )));
    }
    let origin = trace.origin_len();
    let children: Vec<Vec<usize>> = trace.steps().iter().map(|s| s.children()).collect();
    let terminals = trace.terminals();
    for slot in folded.cycle().iter().flatten() {
        if *slot >= terminals.len() {
            return Err(CoreError::JobOutOfRange {
                job: *slot,
                jobs: terminals.len(),
            });
        }
    }
    let mut turn = alloc::vec![0usize; children.len()];
    let mut cycle = Vec::with_capacity(folded.len());
    loop {
        for slot in folded.cycle() {
            let lifted = slot.map(|job| {
                let mut node = terminals[job];
                while node >= origin {
                    let step = node - origin;
                    let kids = &children[step];
                    let next = kids[turn[step]];
                    turn[step] = (turn[step] + 1) % kids.len();
                    node = next;
                }
                node
            });
            cycle.push(lifted);
        }
        if turn.iter().all(|&t| t == 0) {
            break;
        }
        if cycle.len() > MAX_LIFTED_LEN {
            return Err(CoreError::LiftFailed(format!(
                "lifted cycle exceeds {MAX_LIFTED_LEN} days"
            )));
        }
    }
    let lifted = Schedule::new(cycle)?;
    verify_schedule(original, &lifted).map_err(|e| CoreError::LiftFailed(format!("{e}")))?;
    Ok(lifted)
}
