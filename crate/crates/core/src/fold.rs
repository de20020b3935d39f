//! The fold operation, its integer variant and the trace that records how
//! folded jobs map back onto the original jobs.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_rational::Ratio;

use crate::error::{CoreError, Result};
use crate::instance::Instance;
use crate::period::Period;
use crate::Rational;

/// Exact value of a folded job. Repeated halving can leave denominators that
/// [`Period`] cannot represent, so folding works on plain rationals.
pub type Value = Ratio<u64>;

/// The fold threshold: an even integer, at least 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FoldParameter(u64);

impl FoldParameter {
    pub fn new(theta: u64) -> Result<Self> {
        if theta < 4 || theta % 2 != 0 {
            return Err(CoreError::InvalidTheta(theta));
        }
        Ok(FoldParameter(theta))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn next(self) -> Self {
        FoldParameter(self.0 + 2)
    }
}

impl fmt::Display for FoldParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One merge recorded while folding. Nodes `0..origin` are the original
/// positions; step `i` creates node `origin + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldStep {
    /// The largest value was removed and the second largest halved; the new
    /// job serves both, alternating.
    Pair { removed: usize, halved: usize },
    /// The largest value was replaced by `theta`.
    ThetaReplace { removed: usize, theta: u64 },
    /// A partition group folded into one job served round-robin.
    Group { members: Vec<usize> },
}

impl FoldStep {
    /// Children in the order their turns come up when lifting a schedule.
    pub fn children(&self) -> Vec<usize> {
        match self {
            FoldStep::Pair { removed, halved } => {
                let (a, b) = if halved < removed { (*halved, *removed) } else { (*removed, *halved) };
                alloc::vec![a, b]
            }
            FoldStep::ThetaReplace { removed, .. } => alloc::vec![*removed],
            FoldStep::Group { members } => members.clone(),
        }
    }
}

/// Mapping metadata from a folded instance back to its original.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FoldTrace {
    origin: usize,
    steps: Vec<FoldStep>,
    terminals: Vec<usize>,
}

impl FoldTrace {
    /// The trivial trace over `n` untouched jobs.
    pub fn identity(n: usize) -> Self {
        FoldTrace {
            origin: n,
            steps: Vec::new(),
            terminals: (0..n).collect(),
        }
    }

    pub fn from_parts(origin: usize, steps: Vec<FoldStep>, terminals: Vec<usize>) -> Result<Self> {
        let trace = FoldTrace {
            origin,
            steps,
            terminals,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn origin_len(&self) -> usize {
        self.origin
    }

    pub fn steps(&self) -> &[FoldStep] {
        &self.steps
    }

    /// `terminals()[i]` is the node behind folded job `i`.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty() && self.terminals.iter().copied().eq(0..self.origin)
    }

    pub fn node_count(&self) -> usize {
        self.origin + self.steps.len()
    }

    /// Every node is consumed by at most one step, and every node is either
    /// consumed or terminal, exactly once.
    pub fn validate(&self) -> Result<()> {
        let total = self.node_count();
        let mut used = alloc::vec![false; total];
        let mut mark = |node: usize, created_before: usize| -> Result<()> {
            if node >= created_before {
                return Err(CoreError::InvalidTrace(format!("node {node} used before creation")));
            }
            if core::mem::replace(&mut used[node], true) {
                return Err(CoreError::InvalidTrace(format!("node {node} consumed twice")));
            }
            Ok(())
        };
        for (i, step) in self.steps.iter().enumerate() {
            let created = self.origin + i;
            if let FoldStep::Group { members } = step {
                if members.is_empty() {
                    return Err(CoreError::InvalidTrace("empty group".into()));
                }
            }
            for child in step.children() {
                mark(child, created)?;
            }
        }
        for &t in &self.terminals {
            mark(t, total)?;
        }
        if let Some(node) = used.iter().position(|u| !u) {
            return Err(CoreError::InvalidTrace(format!("node {node} is never mapped")));
        }
        Ok(())
    }

    /// Replays the steps on `original`, returning the value of every node.
    pub fn node_values(&self, original: &Instance) -> Result<Vec<Value>> {
        if original.len() != self.origin {
            return Err(CoreError::InvalidTrace(format!(
                "trace expects {} jobs, instance has {}",
                self.origin,
                original.len()
            )));
        }
        let mut values: Vec<Value> = original.iter().map(Period::to_ratio).collect();
        for step in &self.steps {
            let v = match step {
                FoldStep::Pair { halved, .. } => values[*halved] / 2,
                FoldStep::ThetaReplace { theta, .. } => Value::from_integer(*theta),
                FoldStep::Group { members } => {
                    let smallest = members.iter().map(|&m| values[m]).min().expect("non-empty group");
                    group_value(smallest, members.len())?
                }
            };
            values.push(v);
        }
        Ok(values)
    }

    /// The folded values (in terminal order) obtained by replaying the trace.
    pub fn replay(&self, original: &Instance) -> Result<Vec<Value>> {
        let values = self.node_values(original)?;
        Ok(self.terminals.iter().map(|&t| values[t]).collect())
    }
}

/// Folded value of a partition group: `min / k` for pairs and triples,
/// `floor(min / 5)` for groups of five.
pub(crate) fn group_value(smallest: Value, size: usize) -> Result<Value> {
    let v = match size {
        2 | 3 => smallest / size as u64,
        5 => Value::from_integer((smallest / 5).to_integer()),
        _ => return Err(CoreError::InvalidPartition(format!("group of size {size}"))),
    };
    if v < Value::from_integer(1) {
        return Err(CoreError::InvalidPartition(format!("group folds to {v} < 1")));
    }
    Ok(v)
}

impl fmt::Display for FoldTrace {
    /// One record per line: `origin:N`, `pair:i,j->k`, `theta-replace:i->theta`,
    /// `group:i,j,k->k'`, and finally `terminals:...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "origin:{}", self.origin)?;
        for (i, step) in self.steps.iter().enumerate() {
            let node = self.origin + i;
            match step {
                FoldStep::Pair { removed, halved } => writeln!(f, "pair:{removed},{halved}->{node}")?,
                FoldStep::ThetaReplace { removed, theta } => writeln!(f, "theta-replace:{removed}->{theta}")?,
                FoldStep::Group { members } => writeln!(f, "group:{}->{node}", join(members))?,
            }
        }
        write!(f, "terminals:{}", join(&self.terminals))
    }
}

fn join(items: &[usize]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl FromStr for FoldTrace {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |line: &str| CoreError::Parse(format!("invalid trace line `{line}`"));
        let nums = |text: &str, line: &str| -> Result<Vec<usize>> {
            if text.is_empty() {
                return Ok(Vec::new());
            }
            text.split(',').map(|t| t.trim().parse().map_err(|_| bad(line))).collect()
        };
        let mut origin = None;
        let mut steps = Vec::new();
        let mut terminals = None;
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (kind, rest) = line.split_once(':').ok_or_else(|| bad(line))?;
            match kind {
                "origin" => origin = Some(rest.parse().map_err(|_| bad(line))?),
                "terminals" => terminals = Some(nums(rest, line)?),
                "pair" | "group" | "theta-replace" => {
                    let (lhs, rhs) = rest.split_once("->").ok_or_else(|| bad(line))?;
                    let lhs = nums(lhs, line)?;
                    let rhs: u64 = rhs.trim().parse().map_err(|_| bad(line))?;
                    let node = origin.ok_or_else(|| bad(line))? + steps.len();
                    let step = match (kind, lhs.as_slice()) {
                        ("pair", &[removed, halved]) if rhs as usize == node => FoldStep::Pair { removed, halved },
                        ("theta-replace", &[removed]) => FoldStep::ThetaReplace { removed, theta: rhs },
                        ("group", _) if rhs as usize == node => FoldStep::Group { members: lhs },
                        _ => return Err(bad(line)),
                    };
                    steps.push(step);
                }
                _ => return Err(bad(line)),
            }
        }
        let origin = origin.ok_or_else(|| CoreError::Parse("missing origin line".into()))?;
        let terminals = terminals.ok_or_else(|| CoreError::Parse("missing terminals line".into()))?;
        FoldTrace::from_parts(origin, steps, terminals)
    }
}

/// A folded multiset (ascending) together with its trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folded {
    values: Vec<Value>,
    trace: FoldTrace,
}

impl Folded {
    pub(crate) fn new(values: Vec<Value>, trace: FoldTrace) -> Self {
        Folded { values, trace }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn trace(&self) -> &FoldTrace {
        &self.trace
    }

    pub fn into_parts(self) -> (Vec<Value>, FoldTrace) {
        (self.values, self.trace)
    }

    pub fn max(&self) -> Option<Value> {
        self.values.last().copied()
    }

    pub fn density(&self) -> Rational {
        let mut sum = Rational::from_integer(0.into());
        for v in &self.values {
            sum += Rational::new((*v.denom()).into(), (*v.numer()).into());
        }
        sum
    }

    /// The folded values as an [`Instance`], when every denominator is
    /// supported.
    pub fn to_instance(&self) -> Result<Instance> {
        self.values
            .iter()
            .map(|&v| Period::from_ratio(v))
            .collect::<Result<Vec<_>>>()
            .map(Instance::new)
    }
}

/// Folding: while the largest value exceeds `theta`, remove it; if the
/// second largest also exceeds `theta`, replace that one by its half,
/// otherwise insert `theta`.
pub fn fold(instance: &Instance, theta: FoldParameter) -> Result<Folded> {
    if instance.is_empty() {
        return Err(CoreError::EmptyInstance);
    }
    let theta_value = Value::from_integer(theta.get());
    let origin = instance.len();
    // (value, node) kept ascending; equal values ordered by node id
    let mut work: Vec<(Value, usize)> = instance.iter().map(Period::to_ratio).zip(0..).collect();
    let mut steps = Vec::new();
    while let Some(&(largest, removed)) = work.last() {
        if largest <= theta_value {
            break;
        }
        work.pop();
        let node = origin + steps.len();
        let entry = match work.last() {
            Some(&(second, halved)) if second > theta_value => {
                work.pop();
                steps.push(FoldStep::Pair { removed, halved });
                (second / 2, node)
            }
            _ => {
                steps.push(FoldStep::ThetaReplace {
                    removed,
                    theta: theta.get(),
                });
                (theta_value, node)
            }
        };
        let at = work.partition_point(|e| *e <= entry);
        work.insert(at, entry);
    }
    let (values, terminals) = work.into_iter().unzip();
    Ok(Folded::new(
        values,
        FoldTrace {
            origin,
            steps,
            terminals,
        },
    ))
}

/// Integer rounding applied after folding: non-integral values and values
/// equal to `theta` become `ceil(v) - 1`; everything else is kept.
pub fn integerize(value: Value, theta: FoldParameter) -> u64 {
    if !value.is_integer() || value == Value::from_integer(theta.get()) {
        value.ceil().to_integer() - 1
    } else {
        value.to_integer()
    }
}

/// `fold` followed by [`integerize`]: an integer instance with every element at
/// most `theta - 1`. The map is monotone, so folded position `i` stays
/// position `i`.
pub fn ffold(instance: &Instance, theta: FoldParameter) -> Result<Instance> {
    ffold_traced(instance, theta).map(|(i, _)| i)
}

/// Like [`ffold`], also returning the underlying fold.
pub fn ffold_traced(instance: &Instance, theta: FoldParameter) -> Result<(Instance, Folded)> {
    let folded = fold(instance, theta)?;
    let periods: Vec<Period> = folded
        .values()
        .iter()
        .map(|&v| Period::integer(integerize(v, theta)))
        .collect();
    debug_assert!(periods.windows(2).all(|w| w[0] <= w[1]));
    Ok((Instance::new(periods), folded))
}
