//! Partitions of an ascending instance into groups folded into single jobs.

use core::fmt;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fold::{group_value, FoldStep, FoldTrace, Folded, Value};
use crate::instance::Instance;
use crate::period::Period;

/// Thresholds of the partition filter. The default values are the ones of the
/// published filter; relaxed values are available for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionFilter {
    /// Maximum `L[E1] - L[E0]` for a pair.
    pub pair_spread: u64,
    /// Maximum `(L[E1] - L[E0]) + (L[E2] - L[E0])` for a triple.
    pub triple_spread: u64,
    /// Maximum `sum(L[Ei] - 5 * floor(L[E0] / 5))` for a group of five.
    pub quintuple_excess: u64,
}

impl Default for PartitionFilter {
    fn default() -> Self {
        PartitionFilter {
            pair_spread: 2,
            triple_spread: 2,
            quintuple_excess: 3,
        }
    }
}

impl PartitionFilter {
    /// Whether `group` (ascending positions into `values`) may be folded.
    pub fn accepts(&self, values: &[u64], group: &[usize]) -> bool {
        let at = |i: usize| values[group[i]];
        match group.len() {
            2 => at(1) - at(0) <= self.pair_spread,
            3 => (at(1) - at(0)) + (at(2) - at(0)) <= self.triple_spread,
            5 => {
                let base = 5 * (at(0) / 5);
                (0..5).map(|i| at(i) - base).sum::<u64>() <= self.quintuple_excess
            }
            _ => false,
        }
    }
}

/// The default partition filter applied to an ascending integer instance.
/// Fractional elements make every group invalid.
pub fn partition_filter(list: &Instance, group: &[usize]) -> bool {
    match list.integers() {
        Ok(values) => {
            group.windows(2).all(|w| w[0] < w[1])
                && group.iter().all(|&i| i < values.len())
                && PartitionFilter::default().accepts(&values, group)
        }
        Err(_) => false,
    }
}

/// Disjoint groups of positions into an ascending instance. Positions outside
/// every group pass through unchanged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    pub fn empty() -> Self {
        Partition::default()
    }

    /// Groups are sorted internally and ordered by their first position.
    pub fn new(mut groups: Vec<Vec<usize>>) -> Self {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort();
        Partition { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Structural validity plus the filter on every group.
    pub fn validate(&self, values: &[u64], filter: &PartitionFilter) -> Result<()> {
        let mut seen = alloc::vec![false; values.len()];
        for g in &self.groups {
            if !matches!(g.len(), 2 | 3 | 5) {
                return Err(CoreError::InvalidPartition(format!("group {g:?} has unsupported size")));
            }
            for &i in g {
                if i >= values.len() {
                    return Err(CoreError::InvalidPartition(format!("position {i} out of range")));
                }
                if core::mem::replace(&mut seen[i], true) {
                    return Err(CoreError::InvalidPartition(format!("position {i} used twice")));
                }
            }
            if !g.windows(2).all(|w| w[0] < w[1]) {
                return Err(CoreError::InvalidPartition(format!("group {g:?} not ascending")));
            }
            if !filter.accepts(values, g) {
                return Err(CoreError::InvalidPartition(format!("group {g:?} rejected by the filter")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    /// `[[0,1],[2,3]]`; the empty partition is `[]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let inner: Vec<String> = g.iter().map(|x| format!("{x}")).collect();
            write!(f, "[{}]", inner.join(","))?;
        }
        f.write_str("]")
    }
}

/// Folds every group into one job of period `min / k` (k = 2, 3) or
/// `floor(min / 5)`, using the default filter.
pub fn fold_by_partition(instance: &Instance, partition: &Partition) -> Result<Folded> {
    fold_by_partition_with(instance, partition, &PartitionFilter::default())
}

pub fn fold_by_partition_with(
    instance: &Instance,
    partition: &Partition,
    filter: &PartitionFilter,
) -> Result<Folded> {
    let values = instance.integers()?;
    partition.validate(&values, filter)?;
    let origin = instance.len();
    let mut grouped = alloc::vec![false; origin];
    let mut steps = Vec::new();
    let mut entries: Vec<(Value, usize)> = Vec::with_capacity(origin);
    for g in partition.groups() {
        for &i in g {
            grouped[i] = true;
        }
        let value = group_value(Value::from_integer(values[g[0]]), g.len())?;
        entries.push((value, origin + steps.len()));
        steps.push(FoldStep::Group { members: g.clone() });
    }
    for (i, &v) in values.iter().enumerate() {
        if !grouped[i] {
            entries.push((Value::from_integer(v), i));
        }
    }
    entries.sort();
    let (values, terminals): (Vec<Value>, Vec<usize>) = entries.into_iter().unzip();
    Ok(Folded::new(values, FoldTrace::from_parts(origin, steps, terminals)?))
}

/// Folded instance for an integer instance and partition; group values always
/// have denominator 1, 2 or 3.
pub fn folded_instance(instance: &Instance, partition: &Partition, filter: &PartitionFilter) -> Result<(Instance, Folded)> {
    let folded = fold_by_partition_with(instance, partition, filter)?;
    let periods = folded
        .values()
        .iter()
        .map(|&v| Period::from_ratio(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((Instance::new(periods), folded))
}
