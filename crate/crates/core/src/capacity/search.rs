//! Breadth-first search over the quantization lattice.
//!
//! Capacity grows with every coordinate and schedulability is closed
//! downwards, so the best feasible vector sits on the boundary between the
//! schedulable and unschedulable regions. The search starts at the all-top
//! vector, expands only unschedulable vectors by stepping one coordinate
//! down, and scores the schedulable vectors it meets.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ergodic_capacity, CapacityError, ChannelEnsemble, QuantLadder, QuantNoiseModel, QuantizationVector};
use crate::time::TimePs;
use crate::topology::{e2e_schedulable_with_order, E2eReport, EdgeScheduler, FatTreeTopology, TopologyError};
use crate::traffic::{FlowId, RadioFlow, TrafficError};

pub const DEFAULT_ORACLE_CAP: u128 = 100_000;

/// Vectors one ladder step below `q` in exactly one coordinate.
pub fn enum_next(q: &QuantizationVector, ladder: &QuantLadder) -> Vec<QuantizationVector> {
    q.bits().iter().enumerate().filter_map(|(i, &b)| ladder.below(b).map(|lower| q.with(i, lower))).collect()
}

/// Re-quantizes every radio to `q` and runs the end-to-end test.
///
/// Fixed priorities are rate-monotonic at the radios' configured widths and
/// do not follow `q`. Re-ranking per candidate would let a lower width
/// promote a radio past one with a tighter deadline, and schedulability
/// would no longer be closed downwards.
pub fn e2e_under_q(
    q: &QuantizationVector,
    topology: &FatTreeTopology,
    radios: &[RadioFlow],
    policy: EdgeScheduler,
) -> Result<E2eReport, CapacityError> {
    if q.len() != radios.len() {
        return Err(CapacityError::Length { expected: radios.len(), found: q.len() });
    }
    let flows = radios.iter().zip(q.bits()).map(|(r, &b)| r.with_quantization(b)).collect::<Result<Vec<_>, _>>()?;
    let reference: HashMap<FlowId, (TimePs, FlowId)> =
        radios.iter().map(|r| Ok((r.id, (r.period()?, r.id)))).collect::<Result<_, TrafficError>>()?;
    let order = |members: &[&RadioFlow]| {
        let mut idx: Vec<usize> = (0..members.len()).collect();
        idx.sort_by_key(|&i| reference[&members[i].id]);
        Ok(idx)
    };
    Ok(e2e_schedulable_with_order(topology, &flows, policy, order)?)
}

/// [`e2e_under_q`] as a yes/no answer. A budget that already exceeds some
/// deadline does not depend on `q` and counts as unschedulable.
pub fn schedulable_under_q(
    q: &QuantizationVector,
    topology: &FatTreeTopology,
    radios: &[RadioFlow],
    policy: EdgeScheduler,
) -> Result<bool, CapacityError> {
    match e2e_under_q(q, topology, radios, policy) {
        Ok(report) => Ok(report.schedulable),
        Err(CapacityError::Topology(TopologyError::Infeasible { .. })) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Everything a search needs. Radio `i` pairs with row `i` of every channel
/// matrix.
#[derive(Clone, Copy, Debug)]
pub struct QuantSearch<'a> {
    pub topology: &'a FatTreeTopology,
    pub radios: &'a [RadioFlow],
    pub ladder: &'a QuantLadder,
    pub ensemble: &'a ChannelEnsemble,
    pub noise: QuantNoiseModel,
    pub policy: EdgeScheduler,
}

impl QuantSearch<'_> {
    fn check(&self) -> Result<(), CapacityError> {
        if self.ensemble.radios() != self.radios.len() {
            return Err(CapacityError::Length { expected: self.radios.len(), found: self.ensemble.radios() });
        }
        Ok(())
    }

    fn schedulable(&self, q: &QuantizationVector) -> Result<bool, CapacityError> {
        schedulable_under_q(q, self.topology, self.radios, self.policy)
    }

    fn capacity(&self, q: &QuantizationVector) -> Result<f64, CapacityError> {
        ergodic_capacity(q, self.ensemble, &self.noise)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploredNode {
    pub q: QuantizationVector,
    pub schedulable: bool,
    /// Set for every vector whose capacity was evaluated.
    pub capacity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// `None` when no vector on the ladder is schedulable.
    pub best: Option<QuantizationVector>,
    /// Capacity of `best` in b/s/Hz, zero without a feasible vector.
    pub capacity: f64,
    pub expanded: usize,
    pub evaluated: usize,
    pub wall_time_ms: f64,
    pub explored: Vec<ExploredNode>,
}

impl SearchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "schedulable", "capacity_bps_hz"])?;
        for node in &self.explored {
            w.write_record([
                node.q.to_string(),
                node.schedulable.to_string(),
                node.capacity.map(|c| c.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn consider(&mut self, q: &QuantizationVector, capacity: f64) {
        if self.best.is_none() || capacity > self.capacity {
            self.best = Some(q.clone());
            self.capacity = capacity;
        }
    }
}

/// Breadth-first search from the all-top vector. A visited set keeps each
/// vector from being queued through more than one parent.
pub fn bfs_search(s: &QuantSearch) -> Result<SearchReport, CapacityError> {
    s.check()?;
    let start = Instant::now();
    let mut report =
        SearchReport { best: None, capacity: 0.0, expanded: 0, evaluated: 0, wall_time_ms: 0.0, explored: Vec::new() };
    let root = QuantizationVector::uniform(s.radios.len(), s.ladder.highest(), s.ladder)?;
    let mut visited: HashSet<QuantizationVector> = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([root]);
    while let Some(q) = queue.pop_front() {
        if s.schedulable(&q)? {
            let c = s.capacity(&q)?;
            report.evaluated += 1;
            report.consider(&q, c);
            report.explored.push(ExploredNode { q, schedulable: true, capacity: Some(c) });
        } else {
            report.expanded += 1;
            for next in enum_next(&q, s.ladder) {
                if visited.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
            report.explored.push(ExploredNode { q, schedulable: false, capacity: None });
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Scores every schedulable vector of the lattice. Refuses lattices larger
/// than `cap`.
pub fn brute_force_oracle(s: &QuantSearch, cap: u128) -> Result<SearchReport, CapacityError> {
    s.check()?;
    let n = s.radios.len();
    let d = s.ladder.len() as u128;
    let size = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(d)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(CapacityError::OracleCap { size, cap });
    }
    let start = Instant::now();
    let mut report =
        SearchReport { best: None, capacity: 0.0, expanded: 0, evaluated: 0, wall_time_ms: 0.0, explored: Vec::new() };
    let levels = s.ladder.levels();
    let mut digits = vec![0usize; n];
    loop {
        let q = QuantizationVector::new(digits.iter().map(|&k| levels[k]).collect(), s.ladder)?;
        let schedulable = s.schedulable(&q)?;
        let capacity = if schedulable {
            let c = s.capacity(&q)?;
            report.evaluated += 1;
            report.consider(&q, c);
            Some(c)
        } else {
            None
        };
        report.explored.push(ExploredNode { q, schedulable, capacity });
        // odometer increment
        let mut i = 0;
        while i < n && digits[i] + 1 == levels.len() {
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        digits[i] += 1;
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
