//! Static-priority schedulability on one link (sufficient test).
//!
//! For flow `m` (0-based, priority order) and its `k`-th job in the level-m
//! busy window the workload ratio is
//!
//! ```text
//! preemptive:      W_m(k, x) = min_{0<t≤x} (C/t)·(k     + Σ_{i<m} ⌈t/T_i⌉)
//! non-preemptive:  W_m(k, x) = min_{0<t≤x} (C/t)·(k + 1 + Σ_{i<m} (1 + ⌊(t−C)/T_i⌋))
//! ```
//!
//! and the set passes when `W_m(k, (k−1)·T_m + d_m) ≤ 1` for every `m` and
//! every `k ≤ N_m = min{k : W_m(k, k·T_m) ≤ 1}`.
//!
//! Between consecutive steps of the bracket the ratio decreases in `t`, so
//! the minimum sits at `x` or at the last picosecond of a step. The ceiling
//! form keeps its lower value at `j·T_i`; the floor form jumps up at
//! `C + j·T_i`, so both `C + j·T_i` and the picosecond before it are
//! candidates.

use std::cmp::Ordering;

use super::{Exact, FlowSet, SchedLimits, SchedVerdict, Witness};
use crate::time::TimePs;

pub fn fixed_priority_test(fs: &FlowSet, preemptive: bool) -> SchedVerdict {
    fixed_priority_test_with(fs, preemptive, &SchedLimits::default())
}

pub fn fixed_priority_test_with(fs: &FlowSet, preemptive: bool, limits: &SchedLimits) -> SchedVerdict {
    for (m, flow) in fs.flows().iter().enumerate() {
        let level = fs.prefix_utilization_cmp(m + 1);
        // Without preemption a level utilization of exactly one never closes
        // the window: the floor form's demand stays above t by C·(1 − U_hp).
        if level == Ordering::Greater || (!preemptive && level == Ordering::Equal) {
            return SchedVerdict::fail(Witness::Overload { utilization: fs.utilization() }, None);
        }
        let period = flow.period.as_ps();
        let deadline = flow.deadline.as_ps();
        let mut k = 1u64;
        loop {
            if k > limits.job_cap {
                return SchedVerdict::fail(Witness::JobCap { flow: m }, None);
            }
            let x = TimePs::from_ps(period * (k - 1) + deadline);
            if !fits(fs, preemptive, m, k, x) {
                return SchedVerdict::fail(Witness::Job { flow: m, job: k }, None);
            }
            if fits(fs, preemptive, m, k, TimePs::from_ps(period * k)) {
                break;
            }
            k += 1;
        }
    }
    SchedVerdict::pass(None)
}

/// `W_m(k, x)` as an exact ratio. `m` is 0-based; `k` is 1-based.
pub fn fp_workload_ratio(fs: &FlowSet, preemptive: bool, m: usize, k: u64, x: TimePs) -> Exact {
    let mut best: Option<Exact> = None;
    for_each_candidate(fs, preemptive, m, x, |t| {
        let r = Exact::new(workload(fs, preemptive, m, k, t), t);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
        false
    });
    best.expect("candidate set always contains x")
}

fn fits(fs: &FlowSet, preemptive: bool, m: usize, k: u64, x: TimePs) -> bool {
    let mut found = false;
    for_each_candidate(fs, preemptive, m, x, |t| {
        found = workload(fs, preemptive, m, k, t) <= t;
        found
    });
    found
}

/// `C·(bracket) + extra` at instant `t` (picoseconds).
fn workload(fs: &FlowSet, preemptive: bool, m: usize, k: u64, t: i128) -> i128 {
    let c = i128::from(fs.tx_time().as_ps());
    let hp = &fs.flows()[..m];
    let count: i128 = if preemptive {
        i128::from(k) + hp.iter().map(|f| ceil_div(t, i128::from(f.period.as_ps()))).sum::<i128>()
    } else {
        i128::from(k) + 1 + hp.iter().map(|f| 1 + (t - c).div_euclid(i128::from(f.period.as_ps()))).sum::<i128>()
    };
    c * count + i128::from(fs.extra_blocking().as_ps())
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// Calls `visit` on every candidate instant in `(0, x]` until it returns true.
fn for_each_candidate(fs: &FlowSet, preemptive: bool, m: usize, x: TimePs, mut visit: impl FnMut(i128) -> bool) {
    let x = i128::from(x.as_ps());
    if x <= 0 {
        return;
    }
    if visit(x) {
        return;
    }
    let c = i128::from(fs.tx_time().as_ps());
    for f in &fs.flows()[..m] {
        let period = i128::from(f.period.as_ps());
        if preemptive {
            let mut t = period;
            while t < x {
                if visit(t) {
                    return;
                }
                t += period;
            }
        } else {
            let mut step = c;
            while step - 1 < x {
                if step - 1 > 0 && visit(step - 1) {
                    return;
                }
                if step < x && visit(step) {
                    return;
                }
                step += period;
            }
        }
    }
}
