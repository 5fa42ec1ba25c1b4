//! End-to-end reduction: the aggregation network is replaced by a fixed
//! delay budget, leaving one single-link test per edge switch.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregation_delay_bound, validate, AggregationBound, EdgeScheduler, FatTreeTopology, TopologyError};
use crate::sched::{edf_test, fixed_priority_test, FlowSet, SchedVerdict};
use crate::time::TimePs;
use crate::traffic::{FlowId, RadioFlow, TrafficSpec};

/// Everything subtracted from a flow's end-to-end deadline before the edge
/// test, term by term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayBudget {
    pub aggregation: AggregationBound,
    /// `(h+1)·(t_s + t_p)`: every hop including the edge switch.
    pub switching_propagation: TimePs,
    /// Transmission plus propagation on the radio access link, if modelled.
    pub source_link: TimePs,
    /// Total subtracted from each deadline.
    pub total: TimePs,
    /// `d_i'` per flow. Negative or zero values mark infeasible flows.
    pub edge_deadlines: BTreeMap<FlowId, i64>,
}

impl DelayBudget {
    pub fn new(topology: &FatTreeTopology, flows: &[RadioFlow]) -> Self {
        let aggregation = aggregation_delay_bound(topology);
        let switching_propagation =
            (topology.switching() + topology.propagation()) * (u64::from(topology.height()) + 1);
        let source_link = topology.source_tx_time().map_or(TimePs::ZERO, |c| c + topology.propagation());
        let total = aggregation.transmission_queuing + aggregation.background + switching_propagation + source_link;
        let edge_deadlines = flows.iter().map(|f| (f.id, f.deadline.as_ps() as i64 - total.as_ps() as i64)).collect();
        DelayBudget { aggregation, switching_propagation, source_link, total, edge_deadlines }
    }

    /// Maximum delay of a packet once it has left the edge queue.
    pub fn aggregation_bound(&self) -> TimePs {
        self.aggregation.total
    }

    pub fn infeasible(&self) -> Vec<(FlowId, i64)> {
        self.edge_deadlines.iter().filter(|(_, &d)| d <= 0).map(|(&id, &d)| (id, d)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub edge: usize,
    /// Flows on this edge in the order handed to the test (priority order for
    /// fixed priority).
    pub flows: Vec<FlowId>,
    /// `None` for an edge without radios.
    pub verdict: Option<SchedVerdict>,
}

impl EdgeReport {
    pub fn schedulable(&self) -> bool {
        self.verdict.as_ref().is_none_or(|v| v.schedulable)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct E2eReport {
    pub policy: EdgeScheduler,
    pub schedulable: bool,
    pub budget: DelayBudget,
    pub edges: Vec<EdgeReport>,
}

/// Rate-monotonic order of the flows on one edge: shorter period first, ties
/// broken by flow id. Returns indices into `flows`.
pub fn edge_priority_order(flows: &[&RadioFlow]) -> Result<Vec<usize>, TopologyError> {
    let keys: Vec<(TimePs, FlowId)> =
        flows.iter().map(|f| Ok((f.period()?, f.id))).collect::<Result<_, TopologyError>>()?;
    let mut idx: Vec<usize> = (0..flows.len()).collect();
    idx.sort_by_key(|&i| keys[i]);
    Ok(idx)
}

/// Checks every edge switch with its non-preemptive test against the reduced
/// deadlines. Edges are independent and run in parallel. Fixed priorities
/// are rate-monotonic.
pub fn e2e_schedulable(
    topology: &FatTreeTopology,
    flows: &[RadioFlow],
    policy: EdgeScheduler,
) -> Result<E2eReport, TopologyError> {
    e2e_schedulable_with_order(topology, flows, policy, edge_priority_order)
}

/// As [`e2e_schedulable`], with fixed priorities on each edge given by
/// `order` (indices into the edge's flows, highest priority first).
pub fn e2e_schedulable_with_order<F>(
    topology: &FatTreeTopology,
    flows: &[RadioFlow],
    policy: EdgeScheduler,
    order: F,
) -> Result<E2eReport, TopologyError>
where
    F: Fn(&[&RadioFlow]) -> Result<Vec<usize>, TopologyError> + Sync,
{
    if policy == EdgeScheduler::Fifo {
        return Err(TopologyError::UnsupportedPolicy(policy));
    }
    let violations = validate(topology, flows);
    if !violations.is_empty() {
        return Err(TopologyError::Invalid(violations));
    }
    let budget = DelayBudget::new(topology, flows);
    let infeasible = budget.infeasible();
    if !infeasible.is_empty() {
        return Err(TopologyError::Infeasible { flows: infeasible, budget: Box::new(budget) });
    }

    let mut by_edge: Vec<Vec<&RadioFlow>> = vec![Vec::new(); topology.edge_count()];
    for f in flows {
        by_edge[f.edge].push(f);
    }
    let c1 = topology.tx_time(1);
    let blocking = topology.background_tx_time(1);
    let edges = by_edge
        .par_iter()
        .enumerate()
        .map(|(edge, members)| -> Result<EdgeReport, TopologyError> {
            if members.is_empty() {
                return Ok(EdgeReport { edge, flows: Vec::new(), verdict: None });
            }
            let order = match policy {
                EdgeScheduler::FixedPriority => order(members)?,
                _ => (0..members.len()).collect(),
            };
            let specs = order
                .iter()
                .map(|&i| {
                    let f = members[i];
                    let d = TimePs::from_ps(budget.edge_deadlines[&f.id] as u64);
                    Ok(TrafficSpec::new(f.period()?, d, c1))
                })
                .collect::<Result<Vec<_>, TopologyError>>()?;
            let fs = FlowSet::new(specs)?.with_extra_blocking(blocking);
            let verdict = match policy {
                EdgeScheduler::Edf => edf_test(&fs, false),
                _ => fixed_priority_test(&fs, false),
            };
            Ok(EdgeReport { edge, flows: order.iter().map(|&i| members[i].id).collect(), verdict: Some(verdict) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let schedulable = edges.iter().all(EdgeReport::schedulable);
    Ok(E2eReport { policy, schedulable, budget, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GBPS: u64 = 1_000_000_000;

    fn reference() -> FatTreeTopology {
        FatTreeTopology::new(
            3,
            2,
            vec![10 * GBPS, 40 * GBPS, 200 * GBPS],
            TimePs::from_ns(50),
            TimePs::from_ns(10),
            8000,
        )
        .unwrap()
    }

    fn reference_flows(deadline: impl Fn(TimePs) -> TimePs) -> Vec<RadioFlow> {
        let rates = [1000, 1500, 2000, 2500].map(|m| m * 1_000_000);
        let mut flows = Vec::new();
        for edge in 0..9 {
            for (j, &r) in rates.iter().enumerate() {
                let id = (edge * 4 + j) as u32;
                let probe = RadioFlow::fixed_rate(id, r, 8000, TimePs::from_us(1), edge).unwrap();
                let d = deadline(probe.period().unwrap());
                flows.push(RadioFlow { deadline: d, ..probe });
            }
        }
        flows
    }

    #[test]
    fn reference_fixed_priority_is_schedulable() {
        let flows = reference_flows(|t| t);
        let r = e2e_schedulable(&reference(), &flows, EdgeScheduler::FixedPriority).unwrap();
        assert!(r.schedulable);
        assert_eq!(r.budget.total, TimePs::from_ps(1_246_667));
        assert_eq!(r.budget.aggregation_bound(), TimePs::from_ps(1_186_667));
        for f in &flows {
            assert_eq!(r.budget.edge_deadlines[&f.id], f.deadline.as_ps() as i64 - 1_246_667);
        }
        // rate-monotonic: 2.5 Gb/s first
        assert_eq!(r.edges[0].flows, vec![FlowId(3), FlowId(2), FlowId(1), FlowId(0)]);
        assert!(e2e_schedulable(&reference(), &flows, EdgeScheduler::Edf).unwrap().schedulable);
    }

    #[test]
    fn short_deadlines_are_infeasible() {
        let flows = reference_flows(|_| TimePs::from_us(1));
        match e2e_schedulable(&reference(), &flows, EdgeScheduler::FixedPriority) {
            Err(TopologyError::Infeasible { flows: bad, .. }) => {
                assert_eq!(bad.len(), 36);
                assert!(bad.iter().all(|&(_, d)| d == -246_667));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_flow_is_schedulable() {
        let f = RadioFlow::fixed_rate(0, GBPS, 8000, TimePs::from_ms(1), 4).unwrap();
        let r = e2e_schedulable(&reference(), &[f], EdgeScheduler::FixedPriority).unwrap();
        assert!(r.schedulable);
        assert_eq!(r.edges.iter().filter(|e| e.verdict.is_some()).count(), 1);
    }

    #[test]
    fn fifo_and_invalid_topologies_are_rejected() {
        let flows = reference_flows(|t| t);
        assert!(matches!(
            e2e_schedulable(&reference(), &flows, EdgeScheduler::Fifo),
            Err(TopologyError::UnsupportedPolicy(_))
        ));
        let thin = FatTreeTopology::new(3, 2, vec![10 * GBPS; 3], TimePs::ZERO, TimePs::ZERO, 8000).unwrap();
        assert!(matches!(e2e_schedulable(&thin, &flows, EdgeScheduler::Edf), Err(TopologyError::Invalid(_))));
    }

    #[test]
    fn adding_radios_only_changes_their_edge() {
        let base = reference_flows(|t| t);
        let mut more = base.clone();
        for k in 0..6 {
            more.push(RadioFlow::fixed_rate(100 + k, 2_500_000_000, 8000, TimePs::from_ps(3_200_000), 2).unwrap());
        }
        let a = e2e_schedulable(&reference(), &base, EdgeScheduler::FixedPriority).unwrap();
        let b = e2e_schedulable(&reference(), &more, EdgeScheduler::FixedPriority).unwrap();
        assert!(!b.edges[2].schedulable());
        for k in (0..9).filter(|&k| k != 2) {
            assert_eq!(a.edges[k], b.edges[k]);
        }
    }

    #[test]
    fn source_link_and_background_enter_budget() {
        let t = reference()
            .with_source_link(10 * GBPS)
            .unwrap()
            .with_background(super::super::Background { packet_bits: 8000, levels: [1, 2, 3].into_iter().collect() })
            .unwrap();
        let b = DelayBudget::new(&t, &[]);
        // 0.8 us + 10 ns access link, one background packet at levels 2 and 3
        assert_eq!(b.source_link, TimePs::from_ns(810));
        assert_eq!(b.aggregation.background, TimePs::from_ns(240));
        assert_eq!(b.total, TimePs::from_ps(1_246_667 + 810_000 + 240_000));
    }
}
