//! Symmetric q-ary aggregation trees.
//!
//! Radios attach to edge switches; edge uplinks (level 1) feed the first
//! aggregation level, and so on up to the root, whose link (level `h + 1`)
//! reaches the destination. Every switch above the edge has exactly `q`
//! children, so there are `q^h` edge switches and `q^(h−ℓ)` switches at
//! aggregation level `ℓ`. All links of one level share a capacity.

mod e2e;

pub use e2e::{e2e_schedulable, e2e_schedulable_with_order, edge_priority_order, DelayBudget, E2eReport, EdgeReport};

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sched::Exact;
use crate::time::TimePs;
use crate::traffic::{FlowId, RadioFlow, TrafficError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("tree arity must be at least 1")]
    ZeroArity,
    #[error("aggregation height must be at least 1")]
    ZeroHeight,
    #[error("expected {expected} link capacities (levels 1..=h+1), found {found}")]
    LinkLevels { expected: usize, found: usize },
    #[error("link capacity at level {0} must be positive")]
    ZeroCapacity(usize),
    #[error("packet size must be positive")]
    ZeroPayload,
    #[error("tree with arity {arity} and height {height} is too large")]
    TooLarge { arity: u32, height: u32 },
    #[error("level {level} is outside 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("topology violates design requirements: {}", list_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("edge scheduler {0:?} has no schedulability test")]
    UnsupportedPolicy(EdgeScheduler),
    #[error("aggregation budget exceeds the deadline of flows {}", list_infeasible(.flows))]
    Infeasible { flows: Vec<(FlowId, i64)>, budget: Box<DelayBudget> },
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Sched(#[from] crate::sched::SchedError),
}

fn list_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn list_infeasible(v: &[(FlowId, i64)]) -> String {
    v.iter().map(|(id, d)| format!("{id} (d'={d}ps)")).collect::<Vec<_>>().join(", ")
}

/// Scheduler run on the edge-switch uplinks. Aggregation switches are FIFO.
/// All variants are non-preemptive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeScheduler {
    Fifo,
    FixedPriority,
    Edf,
}

/// A saturating low-priority source on selected link levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Background {
    pub packet_bits: u64,
    /// Link levels (1..=h+1) whose egress queues carry background traffic.
    pub levels: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FatTreeTopology {
    arity: u32,
    height: u32,
    link_caps: Vec<u64>,
    switching: TimePs,
    propagation: TimePs,
    payload_bits: u64,
    source_link: Option<u64>,
    background: Option<Background>,
}

impl FatTreeTopology {
    pub fn new(
        arity: u32,
        height: u32,
        link_caps: Vec<u64>,
        switching: TimePs,
        propagation: TimePs,
        payload_bits: u64,
    ) -> Result<Self, TopologyError> {
        if arity == 0 {
            return Err(TopologyError::ZeroArity);
        }
        if height == 0 {
            return Err(TopologyError::ZeroHeight);
        }
        let expected = height as usize + 1;
        if link_caps.len() != expected {
            return Err(TopologyError::LinkLevels { expected, found: link_caps.len() });
        }
        if let Some(level) = link_caps.iter().position(|&c| c == 0) {
            return Err(TopologyError::ZeroCapacity(level + 1));
        }
        if payload_bits == 0 {
            return Err(TopologyError::ZeroPayload);
        }
        if u64::from(arity).checked_pow(height).is_none_or(|k| k > 1 << 20) {
            return Err(TopologyError::TooLarge { arity, height });
        }
        let topo = FatTreeTopology {
            arity,
            height,
            link_caps,
            switching,
            propagation,
            payload_bits,
            source_link: None,
            background: None,
        };
        for level in 1..=expected {
            topo.try_tx_time(level)?;
        }
        Ok(topo)
    }

    /// Gives each radio a dedicated access link of `capacity_bps` to its edge
    /// switch. Without it radios feed the edge switch instantaneously.
    pub fn with_source_link(mut self, capacity_bps: u64) -> Result<Self, TopologyError> {
        if capacity_bps == 0 {
            return Err(TopologyError::ZeroCapacity(0));
        }
        self.source_link = Some(capacity_bps);
        Ok(self)
    }

    pub fn with_background(mut self, bg: Background) -> Result<Self, TopologyError> {
        if bg.packet_bits == 0 {
            return Err(TopologyError::ZeroPayload);
        }
        let max = self.height as usize + 1;
        if let Some(&level) = bg.levels.iter().find(|&&l| l == 0 || l > max) {
            return Err(TopologyError::LevelOutOfRange { level, max });
        }
        self.background = Some(bg);
        Ok(self)
    }

    /// Same tree with a different arity (used by scale sweeps).
    pub fn with_arity(&self, arity: u32) -> Result<Self, TopologyError> {
        let mut t = FatTreeTopology::new(
            arity,
            self.height,
            self.link_caps.clone(),
            self.switching,
            self.propagation,
            self.payload_bits,
        )?;
        t.source_link = self.source_link;
        t.background = self.background.clone();
        Ok(t)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn link_caps(&self) -> &[u64] {
        &self.link_caps
    }

    pub fn switching(&self) -> TimePs {
        self.switching
    }

    pub fn propagation(&self) -> TimePs {
        self.propagation
    }

    pub fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    pub fn source_link(&self) -> Option<u64> {
        self.source_link
    }

    pub fn background(&self) -> Option<&Background> {
        self.background.as_ref()
    }

    pub fn edge_count(&self) -> usize {
        (self.arity as usize).pow(self.height)
    }

    /// Number of switches at `level` (0 = edge, `h` = root).
    pub fn switches_at(&self, level: usize) -> usize {
        (self.arity as usize).pow(self.height - level as u32)
    }

    fn try_tx_time(&self, level: usize) -> Result<TimePs, TopologyError> {
        let cap = self.capacity(level)?;
        crate::traffic::inter_arrival(self.payload_bits, u128::from(cap)).map_err(Into::into)
    }

    fn capacity(&self, level: usize) -> Result<u64, TopologyError> {
        let max = self.link_caps.len();
        if level == 0 || level > max {
            return Err(TopologyError::LevelOutOfRange { level, max });
        }
        Ok(self.link_caps[level - 1])
    }

    /// Packet transmission time `C_level` on a link of the given level
    /// (1 = edge uplink, `h+1` = root to destination).
    pub fn tx_time(&self, level: usize) -> TimePs {
        self.try_tx_time(level).expect("levels validated at construction")
    }

    /// Transmission time on the radio access link, if one is modelled.
    pub fn source_tx_time(&self) -> Option<TimePs> {
        self.source_link.map(|cap| crate::traffic::inter_arrival(self.payload_bits, u128::from(cap)).expect("positive"))
    }

    /// Longest background packet transmission on a link of `level`, zero if
    /// that level carries no background traffic.
    pub fn background_tx_time(&self, level: usize) -> TimePs {
        match &self.background {
            Some(bg) if bg.levels.contains(&level) => {
                let cap = self.link_caps[level - 1];
                crate::traffic::inter_arrival(bg.packet_bits, u128::from(cap)).expect("positive")
            }
            _ => TimePs::ZERO,
        }
    }
}

/// One of the four design requirements, plus the edge-assignment partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Requirement {
    FatTree,
    Symmetric,
    NonPreemptive,
    EqualPacketSizes,
    EdgeAssignment,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Requirement::FatTree => "Fat-Tree",
            Requirement::Symmetric => "Symmetric",
            Requirement::NonPreemptive => "Non-preemptive",
            Requirement::EqualPacketSizes => "Equal packet sizes",
            Requirement::EdgeAssignment => "Edge assignment",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// `q·C_level > C_(level−1)`: the uplink at `level` is thinner than the
    /// sum of the `q` links feeding it.
    FatTree {
        level: usize,
        tx_time: TimePs,
        feeding_tx_time: TimePs,
        arity: u32,
    },
    UnequalPacketSize {
        flow: FlowId,
        payload_bits: u64,
        expected: u64,
    },
    EdgeOutOfRange {
        flow: FlowId,
        edge: usize,
        edge_count: usize,
    },
    DuplicateFlow {
        flow: FlowId,
    },
}

impl Violation {
    pub fn requirement(&self) -> Requirement {
        match self {
            Violation::FatTree { .. } => Requirement::FatTree,
            Violation::UnequalPacketSize { .. } => Requirement::EqualPacketSizes,
            Violation::EdgeOutOfRange { .. } | Violation::DuplicateFlow { .. } => Requirement::EdgeAssignment,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FatTree { level, tx_time, feeding_tx_time, arity } => write!(
                f,
                "{}: level {level} transmission time {tx_time} exceeds {feeding_tx_time}/{arity}",
                self.requirement()
            ),
            Violation::UnequalPacketSize { flow, payload_bits, expected } => write!(
                f,
                "{}: flow {flow} uses {payload_bits}-bit packets, network uses {expected}",
                self.requirement()
            ),
            Violation::EdgeOutOfRange { flow, edge, edge_count } => {
                write!(f, "{}: flow {flow} attached to edge switch {edge}, tree has {edge_count}", self.requirement())
            }
            Violation::DuplicateFlow { flow } => write!(f, "{}: flow id {flow} used twice", self.requirement()),
        }
    }
}

/// Checks the design requirements. Symmetry and non-preemption hold by
/// construction (one capacity per level, non-preemptive schedulers only), so
/// violations concern fatness, packet sizes and the radio-to-edge partition.
pub fn validate(topology: &FatTreeTopology, flows: &[RadioFlow]) -> Vec<Violation> {
    let mut out = Vec::new();
    let q = u64::from(topology.arity);
    for level in 2..=topology.height as usize + 1 {
        let feeding = topology.tx_time(level - 1);
        let tx = topology.tx_time(level);
        if tx.as_ps() * q > feeding.as_ps() {
            out.push(Violation::FatTree { level, tx_time: tx, feeding_tx_time: feeding, arity: topology.arity });
        }
    }
    let mut seen = BTreeSet::new();
    let edges = topology.edge_count();
    for f in flows {
        if f.payload_bits != topology.payload_bits {
            out.push(Violation::UnequalPacketSize {
                flow: f.id,
                payload_bits: f.payload_bits,
                expected: topology.payload_bits,
            });
        }
        if f.edge >= edges {
            out.push(Violation::EdgeOutOfRange { flow: f.id, edge: f.edge, edge_count: edges });
        }
        if !seen.insert(f.id) {
            out.push(Violation::DuplicateFlow { flow: f.id });
        }
    }
    out
}

/// Worst-case FIFO queuing at aggregation level `level` (1..=h):
/// `(q−1)·C_(level+1)`, plus one background packet when that uplink carries
/// background traffic.
pub fn max_queuing_per_hop(topology: &FatTreeTopology, level: usize) -> Result<TimePs, TopologyError> {
    let h = topology.height as usize;
    if level == 0 || level > h {
        return Err(TopologyError::LevelOutOfRange { level, max: h });
    }
    let c_next = topology.tx_time(level + 1);
    Ok(c_next * u64::from(topology.arity - 1) + topology.background_tx_time(level + 1))
}

/// Term-by-term aggregation delay bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationBound {
    /// `h·(t_s + t_p)`.
    pub switching_propagation: TimePs,
    /// `C_1·(1 − q^−h)/(1 − q^−1)`, rounded up once.
    pub transmission_queuing: TimePs,
    /// One background packet per aggregation hop that carries background.
    pub background: TimePs,
    pub total: TimePs,
    /// Whether the background-free bound stays below `h·(t_s+t_p) + 2·C_1`.
    pub below_scalability_limit: bool,
}

/// Maximum delay of any packet from its arrival at the first aggregation
/// switch to delivery at the destination.
pub fn aggregation_delay_bound(topology: &FatTreeTopology) -> AggregationBound {
    let h = topology.height;
    let q = i128::from(topology.arity);
    let c1 = i128::from(topology.tx_time(1).as_ps());
    // Σ_{j=0}^{h−1} q^−j = (1 − q^−h)/(1 − q^−1)
    let geometric = (0..h).fold(Exact::from_integer(0), |acc, j| acc + Ratio::new(1, q.pow(j)));
    let exact = geometric * Exact::from_integer(c1);
    let transmission_queuing = TimePs::from_ps(exact.ceil().to_integer() as u64);
    let switching_propagation = (topology.switching + topology.propagation) * u64::from(h);
    let background: TimePs = (2..=h as usize + 1).map(|l| topology.background_tx_time(l)).sum();
    AggregationBound {
        switching_propagation,
        transmission_queuing,
        background,
        total: switching_propagation + transmission_queuing + background,
        below_scalability_limit: exact < Exact::from_integer(2 * c1),
    }
}
