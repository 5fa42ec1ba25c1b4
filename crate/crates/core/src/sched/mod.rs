//! Single-link schedulability tests for periodic packet flows that share one
//! transmission time.
//!
//! Two disciplines are covered, each with and without preemption:
//! deadline-driven ([`edf_test`]) and static-priority
//! ([`fixed_priority_test`]). The EDF conditions are exact; the
//! fixed-priority condition is sufficient only.
//!
//! All arithmetic is exact: times are integer picoseconds and ratios are
//! rational numbers over `i128`.

mod edf;
mod fixed;

pub use edf::{edf_demand_ratio, edf_test, edf_test_with};
pub use fixed::{fixed_priority_test, fixed_priority_test_with, fp_workload_ratio};

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{TimePs, PS_PER_SEC};
use crate::traffic::TrafficSpec;

/// Exact rational used for test expressions and witness instants.
pub type Exact = Ratio<i128>;

/// Utilization sums: the common denominator of many picosecond periods
/// overflows `i128`.
pub type BigExact = Ratio<BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedError {
    #[error("flow set is empty")]
    Empty,
    #[error("flow {0} has a zero period")]
    ZeroPeriod(usize),
    #[error("flow {0} has a zero deadline")]
    ZeroDeadline(usize),
    #[error("transmission time must be positive")]
    ZeroTxTime,
    #[error("flow {index} has transmission time {found}, expected the common {expected}")]
    MixedTxTime { index: usize, expected: TimePs, found: TimePs },
}

/// An ordered set of flows sharing one link and one transmission time.
///
/// For fixed-priority tests the order is the priority order, index 0 highest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSet {
    flows: Vec<TrafficSpec>,
    tx_time: TimePs,
    /// Additional non-preemptive blocking (e.g. one background packet) added
    /// to every workload expression. Zero for the plain tests.
    extra_blocking: TimePs,
}

impl FlowSet {
    pub fn new(flows: Vec<TrafficSpec>) -> Result<Self, SchedError> {
        let first = flows.first().ok_or(SchedError::Empty)?;
        let tx_time = first.tx_time;
        if tx_time.is_zero() {
            return Err(SchedError::ZeroTxTime);
        }
        for (index, f) in flows.iter().enumerate() {
            if f.period.is_zero() {
                return Err(SchedError::ZeroPeriod(index));
            }
            if f.deadline.is_zero() {
                return Err(SchedError::ZeroDeadline(index));
            }
            if f.tx_time != tx_time {
                return Err(SchedError::MixedTxTime { index, expected: tx_time, found: f.tx_time });
            }
        }
        Ok(FlowSet { flows, tx_time, extra_blocking: TimePs::ZERO })
    }

    /// Builds a set from `(period, deadline)` pairs sharing `tx_time`.
    pub fn uniform(tx_time: TimePs, pairs: &[(TimePs, TimePs)]) -> Result<Self, SchedError> {
        FlowSet::new(pairs.iter().map(|&(p, d)| TrafficSpec::new(p, d, tx_time)).collect())
    }

    pub fn with_extra_blocking(mut self, blocking: TimePs) -> Self {
        self.extra_blocking = blocking;
        self
    }

    pub fn flows(&self) -> &[TrafficSpec] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn tx_time(&self) -> TimePs {
        self.tx_time
    }

    pub fn extra_blocking(&self) -> TimePs {
        self.extra_blocking
    }

    pub fn utilization(&self) -> BigExact {
        self.prefix_utilization(self.flows.len())
    }

    /// Compares the utilization of the first `n` flows with one. A float
    /// sum settles clear cases; near one the exact sum decides.
    pub fn prefix_utilization_cmp(&self, n: usize) -> Ordering {
        let c = self.tx_time.as_ps() as f64;
        let approx: f64 = self.flows[..n].iter().map(|f| c / f.period.as_ps() as f64).sum();
        if approx < 1.0 - 1e-9 {
            Ordering::Less
        } else if approx > 1.0 + 1e-9 {
            Ordering::Greater
        } else {
            self.prefix_utilization(n).cmp(&BigExact::from_integer(BigInt::from(1)))
        }
    }

    /// Utilization of the first `n` flows.
    pub fn prefix_utilization(&self, n: usize) -> BigExact {
        let c = BigInt::from(self.tx_time.as_ps());
        self.flows[..n]
            .iter()
            .map(|f| BigExact::new(c.clone(), BigInt::from(f.period.as_ps())))
            .fold(BigExact::from_integer(BigInt::from(0)), |acc, u| acc + u)
    }

    /// Least common multiple of the periods, or `None` above `cap`.
    pub fn hyperperiod(&self, cap: TimePs) -> Option<TimePs> {
        hyperperiod(self.flows.iter().map(|f| f.period), cap)
    }

    pub fn max_deadline(&self) -> TimePs {
        self.flows.iter().map(|f| f.deadline).max().unwrap_or(TimePs::ZERO)
    }

    pub fn min_deadline(&self) -> TimePs {
        self.flows.iter().map(|f| f.deadline).min().unwrap_or(TimePs::ZERO)
    }
}

pub fn hyperperiod(periods: impl IntoIterator<Item = TimePs>, cap: TimePs) -> Option<TimePs> {
    let mut acc: u128 = 1;
    for p in periods {
        acc = acc.lcm(&u128::from(p.as_ps()));
        if acc > u128::from(cap.as_ps()) {
            return None;
        }
    }
    Some(TimePs::from_ps(acc as u64))
}

/// Stable re-ordering by ascending period: shortest period gets the highest
/// priority.
pub fn rate_monotonic_order(fs: &FlowSet) -> FlowSet {
    let order = rate_monotonic_permutation(fs.flows.iter().map(|f| f.period));
    FlowSet {
        flows: order.iter().map(|&i| fs.flows[i]).collect(),
        tx_time: fs.tx_time,
        extra_blocking: fs.extra_blocking,
    }
}

/// Indices sorted by ascending period, ties kept in input order.
pub fn rate_monotonic_permutation(periods: impl IntoIterator<Item = TimePs>) -> Vec<usize> {
    let periods: Vec<TimePs> = periods.into_iter().collect();
    let mut idx: Vec<usize> = (0..periods.len()).collect();
    idx.sort_by_key(|&i| periods[i]);
    idx
}

/// Limits that keep every test finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedLimits {
    /// Hyperperiods above this fall back to the busy-period horizon.
    pub hyperperiod_cap: TimePs,
    /// Jobs examined per flow when searching the level-m busy window.
    pub job_cap: u64,
    /// Test points examined by the EDF scan before giving up.
    pub point_cap: u64,
}

impl Default for SchedLimits {
    fn default() -> Self {
        SchedLimits { hyperperiod_cap: TimePs::from_ps(10 * PS_PER_SEC), job_cap: 10_000, point_cap: 20_000_000 }
    }
}

/// Which horizon bounded the EDF scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Hyperperiod(TimePs),
    BusyPeriod(TimePs),
    /// Utilization above one: the scan runs until the demand provably
    /// exceeds the elapsed time.
    Overload(TimePs),
}

/// Where a test failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// EDF: instant (in picoseconds, possibly fractional) at which the test
    /// expression exceeds one.
    Instant { t_ps: Exact },
    /// Fixed priority: flow index (0-based, priority order) and job number
    /// (1-based) whose workload condition fails.
    Job { flow: usize, job: u64 },
    /// Utilization above one (or exactly one without a bounded horizon).
    Overload { utilization: BigExact },
    /// Busy-window search for `flow` exceeded the job cap.
    JobCap { flow: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedVerdict {
    pub schedulable: bool,
    pub witness: Option<Witness>,
    pub horizon: Option<Horizon>,
}

impl SchedVerdict {
    pub(crate) fn pass(horizon: Option<Horizon>) -> Self {
        SchedVerdict { schedulable: true, witness: None, horizon }
    }

    pub(crate) fn fail(witness: Witness, horizon: Option<Horizon>) -> Self {
        SchedVerdict { schedulable: false, witness: Some(witness), horizon }
    }

    pub fn is_overload(&self) -> bool {
        matches!(self.witness, Some(Witness::Overload { .. }) | Some(Witness::JobCap { .. }))
    }
}

/// Link scheduling discipline analysed by the tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discipline {
    Edf,
    FixedPriority,
}

/// Runs the test for `discipline`.
pub fn schedulability_test(fs: &FlowSet, discipline: Discipline, preemptive: bool) -> SchedVerdict {
    match discipline {
        Discipline::Edf => edf_test(fs, preemptive),
        Discipline::FixedPriority => fixed_priority_test(fs, preemptive),
    }
}

/// Re-evaluates the test expression at `witness` and reports whether the
/// violation is reproduced.
pub fn confirm_witness(fs: &FlowSet, discipline: Discipline, preemptive: bool, witness: &Witness) -> bool {
    let one = Exact::from_integer(1);
    match (discipline, witness) {
        (Discipline::Edf, Witness::Instant { t_ps }) => {
            let in_domain = preemptive || *t_ps >= Exact::from_integer(i128::from(fs.min_deadline().as_ps()));
            in_domain && edf_demand_ratio(fs, preemptive, *t_ps) > one
        }
        (Discipline::FixedPriority, Witness::Job { flow, job }) => {
            let Some(spec) = fs.flows().get(*flow) else { return false };
            let x = spec.period.as_ps() * (job - 1) + spec.deadline.as_ps();
            fp_workload_ratio(fs, preemptive, *flow, *job, TimePs::from_ps(x)) > one
        }
        (_, Witness::Overload { utilization }) => {
            *utilization >= BigExact::from_integer(BigInt::from(1)) && fs.utilization() == *utilization
        }
        (Discipline::FixedPriority, Witness::JobCap { .. }) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn us(v: u64) -> TimePs {
        TimePs::from_us(v)
    }

    #[test]
    fn rate_monotonic_examples() {
        let c = TimePs::from_ns(800);
        let periods = [TimePs::from_us(8), TimePs::from_ns(3200), us(4), TimePs::from_ps(5_333_333)];
        let fs = FlowSet::uniform(c, &periods.map(|p| (p, p))).unwrap();
        let rm = rate_monotonic_order(&fs);
        let got: Vec<u64> = rm.flows().iter().map(|f| f.period.as_ps()).collect();
        assert_eq!(got, vec![3_200_000, 4_000_000, 5_333_333, 8_000_000]);
        assert_eq!(rate_monotonic_order(&rm), rm);

        let tied = FlowSet::uniform(c, &[(us(5), us(1)), (us(2), us(2)), (us(5), us(3))]).unwrap();
        let rm = rate_monotonic_order(&tied);
        let deadlines: Vec<TimePs> = rm.flows().iter().map(|f| f.deadline).collect();
        assert_eq!(deadlines, vec![us(2), us(1), us(3)]);
    }

    #[test]
    fn flow_set_validation() {
        assert_eq!(FlowSet::new(vec![]), Err(SchedError::Empty));
        assert_eq!(FlowSet::uniform(us(1), &[(TimePs::ZERO, us(1))]), Err(SchedError::ZeroPeriod(0)));
        assert_eq!(FlowSet::uniform(us(1), &[(us(1), TimePs::ZERO)]), Err(SchedError::ZeroDeadline(0)));
        assert_eq!(FlowSet::uniform(TimePs::ZERO, &[(us(1), us(1))]), Err(SchedError::ZeroTxTime));
        let mixed = vec![TrafficSpec::new(us(2), us(2), us(1)), TrafficSpec::new(us(2), us(2), us(2))];
        assert!(matches!(FlowSet::new(mixed), Err(SchedError::MixedTxTime { index: 1, .. })));
    }

    #[test]
    fn hyperperiod_cap() {
        let ps = |v| TimePs::from_ps(v);
        assert_eq!(hyperperiod([ps(4), ps(6)], ps(100)), Some(ps(12)));
        assert_eq!(hyperperiod([ps(7), ps(11), ps(13)], ps(1000)), None);
        // near-coprime rounded periods blow up quickly
        let reference = [3_200_000u64, 4_000_000, 5_333_333, 8_000_000].map(ps);
        assert_eq!(hyperperiod(reference, TimePs::from_ps(10 * PS_PER_SEC)), None);
    }
}
