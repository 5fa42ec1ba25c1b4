//! Discrete-event simulation: the full aggregation tree and a single-link
//! job simulator.

mod link;
mod network;

pub use link::{simulate_link, LinkSimResult};
pub use network::{run_simulation, Phases, SimConfig};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::time::TimePs;
use crate::topology::{FatTreeTopology, TopologyError};
use crate::traffic::{FlowId, RadioFlow, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation horizon must be positive")]
    ZeroHorizon,
    #[error("expected {expected} phases, found {found}")]
    PhaseCount { expected: usize, found: usize },
    #[error("queue on {} (node {node}) reached {queued} packets at {at}", describe_level(*.level))]
    Overload { level: Option<usize>, node: usize, queued: usize, at: TimePs },
    #[error("flow set has no hyperperiod within the cap")]
    NoHyperperiod,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn describe_level(level: Option<usize>) -> String {
    match level {
        Some(0) => "an edge uplink".into(),
        Some(l) => format!("a level-{} link", l + 1),
        None => "a radio access link".into(),
    }
}

/// Delivery statistics of one flow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowStats {
    pub flow: FlowId,
    pub rate_bps: u128,
    pub deadline: TimePs,
    pub generated: u64,
    pub delivered: u64,
    pub max_delay: TimePs,
    pub min_delay: TimePs,
    pub misses: u64,
    /// Largest delay from arrival at the first aggregation switch to delivery.
    pub max_post_edge: TimePs,
}

impl FlowStats {
    fn new(f: &RadioFlow) -> Result<Self, TrafficError> {
        Ok(FlowStats {
            flow: f.id,
            rate_bps: f.rate_bps()?,
            deadline: f.deadline,
            generated: 0,
            delivered: 0,
            max_delay: TimePs::ZERO,
            min_delay: TimePs::MAX,
            misses: 0,
            max_post_edge: TimePs::ZERO,
        })
    }

    fn record(&mut self, delay: TimePs, post_edge: TimePs, deadline: TimePs) {
        self.delivered += 1;
        self.max_delay = self.max_delay.max(delay);
        self.min_delay = self.min_delay.min(delay);
        self.max_post_edge = self.max_post_edge.max(post_edge);
        if delay > deadline {
            self.misses += 1;
        }
    }

    /// Spread of end-to-end delays, `max − min`. Zero before any delivery.
    pub fn jitter(&self) -> TimePs {
        if self.delivered == 0 {
            TimePs::ZERO
        } else {
            self.max_delay - self.min_delay
        }
    }

    pub fn in_flight(&self) -> u64 {
        self.generated - self.delivered
    }
}

/// One delivered packet, recorded when the packet log is enabled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub flow: FlowId,
    pub seq: u64,
    pub gen: TimePs,
    /// End of transmission on the edge uplink.
    pub edge_departure: TimePs,
    pub agg_arrival: TimePs,
    pub delivery: TimePs,
    /// Queuing time at each switch on the path, edge first.
    pub waits: SmallVec<[TimePs; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTrace {
    pub policy: crate::topology::EdgeScheduler,
    pub horizon: TimePs,
    pub seed: u64,
    /// Time of the last processed event.
    pub end_time: TimePs,
    pub flows: Vec<FlowStats>,
    /// Longest queuing time seen at each switch level, edge first.
    pub level_max_wait: Vec<TimePs>,
    pub warnings: Vec<String>,
    pub packets: Option<Vec<PacketRecord>>,
}

pub const FLOW_CSV_SCHEMA: &str = "# schema: flow_id,rate_bps,max_delay_ps,min_delay_ps,jitter_ps,misses,packets";

impl SimTrace {
    pub fn total_misses(&self) -> u64 {
        self.flows.iter().map(|f| f.misses).sum()
    }

    pub fn max_delay(&self) -> TimePs {
        self.flows.iter().map(|f| f.max_delay).max().unwrap_or(TimePs::ZERO)
    }

    pub fn max_post_edge(&self) -> TimePs {
        self.flows.iter().map(|f| f.max_post_edge).max().unwrap_or(TimePs::ZERO)
    }

    pub fn flow(&self, id: FlowId) -> Option<&FlowStats> {
        self.flows.iter().find(|f| f.flow == id)
    }

    /// Per-flow CSV preceded by a one-line schema comment. Flows without a
    /// delivered packet report zero delays.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        writeln!(out, "{FLOW_CSV_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["flow_id", "rate_bps", "max_delay_ps", "min_delay_ps", "jitter_ps", "misses", "packets"])?;
        for f in &self.flows {
            let min = if f.delivered == 0 { TimePs::ZERO } else { f.min_delay };
            w.write_record([
                f.flow.to_string(),
                f.rate_bps.to_string(),
                f.max_delay.as_ps().to_string(),
                min.as_ps().to_string(),
                f.jitter().as_ps().to_string(),
                f.misses.to_string(),
                f.delivered.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Result of one arity in a scale sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub arity: u32,
    pub radios: usize,
    pub max_delay: TimePs,
    pub trace: SimTrace,
}

/// Replicates `per_edge` on every edge switch of the tree at each arity in
/// `arities`, keeping link capacities fixed, and simulates each tree. Runs
/// are independent and execute in parallel.
pub fn sweep_scale(
    base: &FatTreeTopology,
    arities: &[u32],
    per_edge: &[RadioFlow],
    cfg: &SimConfig,
) -> Result<Vec<ScalePoint>, SimError> {
    arities
        .par_iter()
        .map(|&q| {
            let topo = base.with_arity(q)?;
            let flows = replicate_per_edge(&topo, per_edge);
            let trace = run_simulation(&topo, &flows, cfg)?;
            Ok(ScalePoint { arity: q, radios: flows.len(), max_delay: trace.max_delay(), trace })
        })
        .collect()
}

/// Copies the template onto every edge switch, numbering flows edge by edge.
pub fn replicate_per_edge(topology: &FatTreeTopology, per_edge: &[RadioFlow]) -> Vec<RadioFlow> {
    let mut flows = Vec::with_capacity(per_edge.len() * topology.edge_count());
    for edge in 0..topology.edge_count() {
        for f in per_edge {
            let id = FlowId((flows.len()) as u32);
            flows.push(RadioFlow { id, edge, ..f.clone() });
        }
    }
    flows
}
