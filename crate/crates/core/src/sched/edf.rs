//! Deadline-driven (EDF) schedulability on one link.
//!
//! The condition, for every `t > 0` (preemptive) or `t >= d_min`
//! (non-preemptive), is
//!
//! ```text
//! (C / t) · (β + Σ_i ⌈(t − d_i) / T_i⌉⁺) ≤ 1,      ⌈x⌉⁺ = max(0, ⌈x⌉)
//! ```
//!
//! with `β = 1` for the non-preemptive blocking term and `β = 0` otherwise.
//! The bracketed demand is a left-continuous step function of `t` that only
//! jumps just after instants `k·T_i + d_i`, and `C/t` decreases, so the
//! supremum over each step is the right-limit at its left end. The scan
//! therefore evaluates, at every such instant `a`, the demand counted just
//! after `a` (jobs with absolute deadline `<= a`). A violation at `a` is
//! reported at `a + ½ ps`, where the literal expression already carries the
//! right-limit demand and still exceeds one because all inputs are integral.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use num_bigint::BigInt;

use super::{BigExact, Exact, FlowSet, Horizon, SchedLimits, SchedVerdict, Witness};
use crate::time::TimePs;

/// Evaluates `(C·(β + Σ⌈(t − d_i)/T_i⌉⁺) + extra) / t` at an exact instant.
pub fn edf_demand_ratio(fs: &FlowSet, preemptive: bool, t_ps: Exact) -> Exact {
    let c = i128::from(fs.tx_time().as_ps());
    let beta = if preemptive { 0 } else { 1 };
    let jobs: i128 = fs
        .flows()
        .iter()
        .map(|f| {
            let x = (t_ps - Exact::from_integer(i128::from(f.deadline.as_ps())))
                / Exact::from_integer(i128::from(f.period.as_ps()));
            x.ceil().to_integer().max(0)
        })
        .sum();
    Exact::from_integer(c * (beta + jobs) + i128::from(fs.extra_blocking().as_ps())) / t_ps
}

pub fn edf_test(fs: &FlowSet, preemptive: bool) -> SchedVerdict {
    edf_test_with(fs, preemptive, &SchedLimits::default())
}

pub fn edf_test_with(fs: &FlowSet, preemptive: bool, limits: &SchedLimits) -> SchedVerdict {
    let c = u128::from(fs.tx_time().as_ps());
    let beta: u128 = if preemptive { 0 } else { 1 };
    let extra = u128::from(fs.extra_blocking().as_ps());
    let load = fs.prefix_utilization_cmp(fs.len());

    let horizon = if load == Ordering::Greater {
        let utilization = fs.utilization();
        let one = BigExact::from_integer(BigInt::from(1));
        // Right-limit demand exceeds U·t − C·Σ d_i/T_i, which overtakes t
        // beyond C·Σ(d_i/T_i) / (U − 1).
        let lag = fs
            .flows()
            .iter()
            .map(|f| BigExact::new(BigInt::from(c) * f.deadline.as_ps(), BigInt::from(f.period.as_ps())))
            .fold(BigExact::from_integer(BigInt::from(0)), |a, b| a + b);
        let bound = (lag / (&utilization - &one)).ceil().to_integer() + 1;
        let bound = u64::try_from(&bound).unwrap_or(u64::MAX).max(fs.max_deadline().as_ps());
        Horizon::Overload(TimePs::from_ps(bound))
    } else {
        let hyper = fs.hyperperiod(limits.hyperperiod_cap).and_then(|h| h.checked_add(fs.max_deadline()));
        let busy = busy_period(fs, beta, extra, limits.hyperperiod_cap);
        match (hyper, busy) {
            (Some(h), Some(b)) if b < h => Horizon::BusyPeriod(b),
            (Some(h), _) => Horizon::Hyperperiod(h),
            (None, Some(b)) => Horizon::BusyPeriod(b),
            (None, None) => return SchedVerdict::fail(Witness::Overload { utilization: fs.utilization() }, None),
        }
    };
    let limit = match horizon {
        Horizon::Hyperperiod(t) | Horizon::BusyPeriod(t) | Horizon::Overload(t) => u128::from(t.as_ps()),
    };

    // k-way merge over the deadline instants k·T_i + d_i, ascending.
    let mut heap: BinaryHeap<Reverse<(u128, usize)>> =
        fs.flows().iter().enumerate().map(|(i, f)| Reverse((u128::from(f.deadline.as_ps()), i))).collect();
    let mut last = None;
    let mut scanned = 0u64;
    while let Some(Reverse((a, i))) = heap.pop() {
        if a > limit {
            break;
        }
        let period = u128::from(fs.flows()[i].period.as_ps());
        heap.push(Reverse((a + period, i)));
        if last == Some(a) {
            continue;
        }
        last = Some(a);
        scanned += 1;
        if scanned > limits.point_cap {
            return SchedVerdict::fail(Witness::Overload { utilization: fs.utilization() }, Some(horizon));
        }
        let jobs: u128 = fs
            .flows()
            .iter()
            .map(|f| {
                let d = u128::from(f.deadline.as_ps());
                if a >= d {
                    (a - d) / u128::from(f.period.as_ps()) + 1
                } else {
                    0
                }
            })
            .sum();
        if c * (beta + jobs) + extra > a {
            let t_ps = Exact::new(2 * a as i128 + 1, 2);
            return SchedVerdict::fail(Witness::Instant { t_ps }, Some(horizon));
        }
    }
    SchedVerdict::pass(Some(horizon))
}

/// Length of the synchronous busy window, the least fixed point of
/// `W(t) = extra + C·(β + Σ⌈t/T_i⌉)`, or `None` if it exceeds `cap`.
fn busy_period(fs: &FlowSet, beta: u128, extra: u128, cap: TimePs) -> Option<TimePs> {
    let c = u128::from(fs.tx_time().as_ps());
    let cap = u128::from(cap.as_ps());
    let work = |t: u128| -> u128 {
        let jobs: u128 = fs.flows().iter().map(|f| t.div_ceil(u128::from(f.period.as_ps()))).sum();
        extra + c * (beta + jobs)
    };
    if fs.prefix_utilization_cmp(fs.len()) != Ordering::Less && beta + extra > 0 {
        return None;
    }
    let mut t = extra + c * (beta + fs.len() as u128);
    for _ in 0..1_000_000 {
        let next = work(t);
        if next == t {
            return Some(TimePs::from_ps(t as u64));
        }
        if next > cap {
            return None;
        }
        t = next;
    }
    None
}
