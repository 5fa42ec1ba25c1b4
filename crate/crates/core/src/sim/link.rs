//! Job-level simulation of one link, used to cross-check the single-link
//! schedulability tests.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::sched::{Discipline, FlowSet, SchedLimits};
use crate::time::TimePs;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSimResult {
    pub jobs: u64,
    pub misses: u64,
    /// Largest response time per flow.
    pub max_response: Vec<TimePs>,
    /// First job to miss, as `(flow, job)` with 1-based job numbers.
    pub first_miss: Option<(usize, u64)>,
}

// Ordered by priority key, then flow and job; `release` and `left` never
// decide the order because (flow, job) is unique.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Job {
    key: (u64, u64),
    flow: usize,
    job: u64,
    release: u64,
    left: u64,
}

/// Releases every flow synchronously at zero and simulates all jobs released
/// within one hyperperiod until they complete. Fixed priority follows the
/// set's order; EDF breaks deadline ties by flow index. In the
/// non-preemptive case the link starts busy for the set's extra blocking.
pub fn simulate_link(fs: &FlowSet, discipline: Discipline, preemptive: bool) -> Result<LinkSimResult, SimError> {
    let hyper = fs.hyperperiod(SchedLimits::default().hyperperiod_cap).ok_or(SimError::NoHyperperiod)?;
    let end = hyper.as_ps();
    let c = fs.tx_time().as_ps();
    let mut releases: BinaryHeap<Reverse<(u64, usize)>> = (0..fs.len()).map(|i| Reverse((0, i))).collect();
    let mut next_job = vec![0u64; fs.len()];
    let mut ready: BinaryHeap<Reverse<Job>> = BinaryHeap::new();
    let mut result = LinkSimResult { jobs: 0, misses: 0, max_response: vec![TimePs::ZERO; fs.len()], first_miss: None };

    let mut release_upto =
        |t: u64, releases: &mut BinaryHeap<Reverse<(u64, usize)>>, ready: &mut BinaryHeap<Reverse<Job>>| {
            while let Some(&Reverse((r, i))) = releases.peek() {
                if r > t {
                    break;
                }
                releases.pop();
                let f = &fs.flows()[i];
                let key = match discipline {
                    Discipline::Edf => (r + f.deadline.as_ps(), i as u64),
                    Discipline::FixedPriority => (i as u64, 0),
                };
                ready.push(Reverse(Job { key, flow: i, job: next_job[i], release: r, left: c }));
                next_job[i] += 1;
                if r + f.period.as_ps() < end {
                    releases.push(Reverse((r + f.period.as_ps(), i)));
                }
            }
        };

    let mut now = if preemptive { 0 } else { fs.extra_blocking().as_ps() };
    let mut running: Option<Job> = None;
    loop {
        release_upto(now, &mut releases, &mut ready);
        let mut job = match running.take().or_else(|| ready.pop().map(|Reverse(j)| j)) {
            Some(j) => j,
            None => match releases.peek() {
                Some(&Reverse((r, _))) => {
                    now = r;
                    continue;
                }
                None => break,
            },
        };
        let finish = now + job.left;
        match releases.peek() {
            Some(&Reverse((r, _))) if preemptive && r < finish => {
                job.left -= r - now;
                now = r;
                release_upto(now, &mut releases, &mut ready);
                match ready.peek() {
                    Some(Reverse(top)) if top.key < job.key => ready.push(Reverse(job)),
                    _ => running = Some(job),
                }
            }
            _ => {
                now = finish;
                let response = now - job.release;
                result.jobs += 1;
                let worst = &mut result.max_response[job.flow];
                *worst = (*worst).max(TimePs::from_ps(response));
                if response > fs.flows()[job.flow].deadline.as_ps() {
                    result.misses += 1;
                    result.first_miss.get_or_insert((job.flow, job.job + 1));
                }
            }
        }
    }
    Ok(result)
}
