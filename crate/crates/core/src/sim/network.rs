//! Packet-level simulation of the aggregation tree.
//!
//! Every hop applies switching delay, queuing, transmission and propagation
//! in that order. Edge uplinks run the configured non-preemptive scheduler;
//! every switch above the edge is FIFO. Events sharing a timestamp are
//! handled as one batch: arrivals and completions first, then idle links
//! pick their next packet, so a packet arriving at `t` competes for a link
//! freed at `t`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{FlowStats, PacketRecord, SimError, SimTrace};
use crate::time::TimePs;
use crate::topology::{edge_priority_order, validate, EdgeScheduler, FatTreeTopology, TopologyError};
use crate::traffic::RadioFlow;

/// Release offsets of the flows' first packets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phases {
    /// Every flow releases at time zero.
    #[default]
    Synchronous,
    /// One offset per flow, in input order.
    Fixed(Vec<TimePs>),
    /// Uniform in `[0, T_i)`, drawn from the run's seed.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub policy: EdgeScheduler,
    /// Packets are generated strictly before this instant.
    pub horizon: TimePs,
    pub phases: Phases,
    pub seed: u64,
    /// Keep running after the horizon until every packet is delivered.
    pub drain: bool,
    /// Largest queue length tolerated on any link before the run aborts.
    pub queue_cap: usize,
    pub record_packets: bool,
}

impl SimConfig {
    pub fn new(policy: EdgeScheduler, horizon: TimePs) -> Self {
        SimConfig {
            policy,
            horizon,
            phases: Phases::Synchronous,
            seed: 0,
            drain: false,
            queue_cap: 1 << 20,
            record_packets: false,
        }
    }

    pub fn with_phases(mut self, phases: Phases) -> Self {
        self.phases = phases;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_drain(mut self, drain: bool) -> Self {
        self.drain = drain;
        self
    }

    pub fn with_queue_cap(mut self, cap: usize) -> Self {
        self.queue_cap = cap;
        self
    }

    pub fn with_packet_log(mut self, on: bool) -> Self {
        self.record_packets = on;
        self
    }
}

type QueueKey = (u64, u64, u64, u64);

const NO_PACKET: u32 = u32::MAX;

struct Node {
    /// 0 = edge switch, `h` = root; `None` for a radio access link.
    level: Option<usize>,
    parent: Option<(usize, u64)>,
    tx_time: TimePs,
    background: Option<TimePs>,
    queue: BinaryHeap<Reverse<(QueueKey, u32)>>,
    busy: bool,
    in_tx: u32,
}

struct Packet {
    flow: u32,
    seq: u64,
    gen: TimePs,
    enqueued: TimePs,
    agg_arrival: TimePs,
    edge_departure: TimePs,
    waits: SmallVec<[TimePs; 4]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Generate { flow: u32 },
    Arrive { node: u32, port: u32, packet: u32 },
    Deliver { packet: u32 },
    TxDone { node: u32 },
}

struct FlowInfo {
    period: TimePs,
    deadline: TimePs,
    first_node: usize,
    port: u64,
    rank: u64,
    next_seq: u64,
}

pub(crate) struct Engine<'a> {
    topo: &'a FatTreeTopology,
    cfg: &'a SimConfig,
    nodes: Vec<Node>,
    flows: Vec<FlowInfo>,
    stats: Vec<FlowStats>,
    packets: Vec<Packet>,
    free: Vec<u32>,
    calendar: BinaryHeap<Reverse<(TimePs, u64, Event)>>,
    counter: u64,
    dirty: Vec<usize>,
    level_max_wait: Vec<TimePs>,
    log: Vec<PacketRecord>,
    now: TimePs,
}

/// Runs the network simulation and returns per-flow statistics.
pub fn run_simulation(topology: &FatTreeTopology, flows: &[RadioFlow], cfg: &SimConfig) -> Result<SimTrace, SimError> {
    let violations = validate(topology, flows);
    if !violations.is_empty() {
        return Err(TopologyError::Invalid(violations).into());
    }
    if cfg.horizon.is_zero() {
        return Err(SimError::ZeroHorizon);
    }
    let mut engine = Engine::new(topology, flows, cfg)?;
    engine.run()?;
    Ok(engine.finish(flows))
}

impl<'a> Engine<'a> {
    fn new(topo: &'a FatTreeTopology, radio: &[RadioFlow], cfg: &'a SimConfig) -> Result<Self, SimError> {
        let q = topo.arity() as usize;
        let h = topo.height() as usize;
        let mut nodes = Vec::new();
        let mut level_start = Vec::new();
        for level in 0..=h {
            level_start.push(nodes.len());
            let bg = topo.background_tx_time(level + 1);
            for i in 0..topo.switches_at(level) {
                nodes.push(Node {
                    level: Some(level),
                    parent: (level < h).then(|| (i / q, (i % q) as u64)),
                    tx_time: topo.tx_time(level + 1),
                    background: (!bg.is_zero()).then_some(bg),
                    queue: BinaryHeap::new(),
                    busy: false,
                    in_tx: NO_PACKET,
                });
            }
        }
        // parents were stored level-relative
        for n in nodes.iter_mut() {
            if let (Some(level), Some((i, port))) = (n.level, n.parent) {
                n.parent = Some((level_start[level + 1] + i, port));
            }
        }

        let phases: Vec<TimePs> = match &cfg.phases {
            Phases::Synchronous => vec![TimePs::ZERO; radio.len()],
            Phases::Fixed(p) if p.len() == radio.len() => p.clone(),
            Phases::Fixed(p) => return Err(SimError::PhaseCount { expected: radio.len(), found: p.len() }),
            Phases::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                radio.iter().map(|f| Ok(TimePs::from_ps(rng.random_range(0..f.period()?.as_ps())))).collect::<Result<
                    _,
                    SimError,
                >>(
                )?
            }
        };

        // edge-local ports and rate-monotonic ranks
        let mut per_edge: Vec<Vec<usize>> = vec![Vec::new(); topo.edge_count()];
        for (i, f) in radio.iter().enumerate() {
            per_edge[f.edge].push(i);
        }
        let mut port = vec![0u64; radio.len()];
        let mut rank = vec![0u64; radio.len()];
        for members in &per_edge {
            let refs: Vec<&RadioFlow> = members.iter().map(|&i| &radio[i]).collect();
            for (p, &i) in members.iter().enumerate() {
                port[i] = p as u64;
            }
            for (r, &j) in edge_priority_order(&refs)?.iter().enumerate() {
                rank[members[j]] = r as u64;
            }
        }

        let src_tx = topo.source_tx_time();
        let mut flows = Vec::with_capacity(radio.len());
        for (i, f) in radio.iter().enumerate() {
            let first_node = match src_tx {
                Some(tx) => {
                    nodes.push(Node {
                        level: None,
                        parent: Some((f.edge, port[i])),
                        tx_time: tx,
                        background: None,
                        queue: BinaryHeap::new(),
                        busy: false,
                        in_tx: NO_PACKET,
                    });
                    nodes.len() - 1
                }
                None => f.edge,
            };
            flows.push(FlowInfo {
                period: f.period()?,
                deadline: f.deadline,
                first_node,
                port: port[i],
                rank: rank[i],
                next_seq: 0,
            });
        }

        let stats = radio.iter().map(FlowStats::new).collect::<Result<Vec<_>, _>>()?;
        let mut engine = Engine {
            topo,
            cfg,
            nodes,
            flows,
            stats,
            packets: Vec::new(),
            free: Vec::new(),
            calendar: BinaryHeap::new(),
            counter: 0,
            dirty: Vec::new(),
            level_max_wait: vec![TimePs::ZERO; h + 1],
            log: Vec::new(),
            now: TimePs::ZERO,
        };
        for (i, &phase) in phases.iter().enumerate() {
            if phase < cfg.horizon {
                engine.schedule(phase, Event::Generate { flow: i as u32 });
            }
        }
        // saturating background sources start with the run
        for n in 0..engine.nodes.len() {
            if engine.nodes[n].background.is_some() {
                engine.dirty.push(n);
            }
        }
        Ok(engine)
    }

    fn schedule(&mut self, at: TimePs, ev: Event) {
        self.counter += 1;
        self.calendar.push(Reverse((at, self.counter, ev)));
    }

    fn run(&mut self) -> Result<(), SimError> {
        self.start_idle_links()?;
        while let Some(&Reverse((t, _, _))) = self.calendar.peek() {
            if !self.cfg.drain && t > self.cfg.horizon {
                break;
            }
            self.now = t;
            while let Some(&Reverse((t2, _, ev))) = self.calendar.peek() {
                if t2 != t {
                    break;
                }
                self.calendar.pop();
                self.handle(ev)?;
            }
            self.start_idle_links()?;
        }
        Ok(())
    }

    fn handle(&mut self, ev: Event) -> Result<(), SimError> {
        let ts = self.topo.switching();
        let tp = self.topo.propagation();
        match ev {
            Event::Generate { flow } => {
                let f = &mut self.flows[flow as usize];
                let seq = f.next_seq;
                f.next_seq += 1;
                let gen = self.now;
                let next = gen + f.period;
                let (node, port) = (f.first_node, f.port);
                self.stats[flow as usize].generated += 1;
                let packet = self.alloc(Packet {
                    flow,
                    seq,
                    gen,
                    enqueued: gen,
                    agg_arrival: TimePs::ZERO,
                    edge_departure: TimePs::ZERO,
                    waits: SmallVec::new(),
                });
                // the radio's own link has no switching stage
                let at = if self.nodes[node].level.is_some() { gen + ts } else { gen };
                self.schedule(at, Event::Arrive { node: node as u32, port: port as u32, packet });
                if next < self.cfg.horizon {
                    self.schedule(next, Event::Generate { flow });
                }
            }
            Event::Arrive { node, port, packet } => self.enqueue(node as usize, u64::from(port), packet)?,
            Event::TxDone { node } => {
                let n = node as usize;
                let packet = std::mem::replace(&mut self.nodes[n].in_tx, NO_PACKET);
                self.nodes[n].busy = false;
                self.dirty.push(n);
                if packet != NO_PACKET {
                    let level = self.nodes[n].level;
                    if level == Some(0) {
                        self.packets[packet as usize].edge_departure = self.now;
                    }
                    match self.nodes[n].parent {
                        Some((parent, port)) => {
                            let arrival = self.now + tp;
                            if level == Some(0) {
                                self.packets[packet as usize].agg_arrival = arrival;
                            }
                            self.schedule(
                                arrival + ts,
                                Event::Arrive { node: parent as u32, port: port as u32, packet },
                            );
                        }
                        None => self.schedule(self.now + tp, Event::Deliver { packet }),
                    }
                }
            }
            Event::Deliver { packet } => self.deliver(packet),
        }
        Ok(())
    }

    fn alloc(&mut self, p: Packet) -> u32 {
        match self.free.pop() {
            Some(i) => {
                self.packets[i as usize] = p;
                i
            }
            None => {
                self.packets.push(p);
                (self.packets.len() - 1) as u32
            }
        }
    }

    fn enqueue(&mut self, n: usize, port: u64, packet: u32) -> Result<(), SimError> {
        let p = &mut self.packets[packet as usize];
        p.enqueued = self.now;
        let flow = p.flow as usize;
        let t = self.now.as_ps();
        let key = match (self.nodes[n].level, self.cfg.policy) {
            (Some(0), EdgeScheduler::FixedPriority) => (self.flows[flow].rank, t, p.seq, 0),
            (Some(0), EdgeScheduler::Edf) => ((p.gen + self.flows[flow].deadline).as_ps(), flow as u64, p.seq, 0),
            _ => (t, port, flow as u64, p.seq),
        };
        let node = &mut self.nodes[n];
        node.queue.push(Reverse((key, packet)));
        if node.queue.len() > self.cfg.queue_cap {
            return Err(SimError::Overload { level: node.level, node: n, queued: node.queue.len(), at: self.now });
        }
        if !node.busy {
            self.dirty.push(n);
        }
        Ok(())
    }

    fn start_idle_links(&mut self) -> Result<(), SimError> {
        let mut dirty = std::mem::take(&mut self.dirty);
        dirty.sort_unstable();
        dirty.dedup();
        for &n in &dirty {
            if self.nodes[n].busy {
                continue;
            }
            if let Some(Reverse((_, packet))) = self.nodes[n].queue.pop() {
                let node = &mut self.nodes[n];
                node.busy = true;
                node.in_tx = packet;
                let done = self.now + node.tx_time;
                let wait = self.now.saturating_sub(self.packets[packet as usize].enqueued);
                if let Some(level) = node.level {
                    if wait > self.level_max_wait[level] {
                        self.level_max_wait[level] = wait;
                    }
                    if self.cfg.record_packets {
                        self.packets[packet as usize].waits.push(wait);
                    }
                }
                self.schedule(done, Event::TxDone { node: n as u32 });
            } else if let Some(bg) = self.nodes[n].background {
                // background keeps the link busy while nothing real is queued,
                // and stops with packet generation
                if self.now < self.cfg.horizon {
                    self.nodes[n].busy = true;
                    self.schedule(self.now + bg, Event::TxDone { node: n as u32 });
                }
            }
        }
        dirty.clear();
        self.dirty = dirty;
        Ok(())
    }

    fn deliver(&mut self, packet: u32) {
        let p = &self.packets[packet as usize];
        let flow = p.flow as usize;
        let delay = self.now - p.gen;
        let post_edge = self.now - p.agg_arrival;
        self.stats[flow].record(delay, post_edge, self.flows[flow].deadline);
        if self.cfg.record_packets {
            self.log.push(PacketRecord {
                flow: self.stats[flow].flow,
                seq: p.seq,
                gen: p.gen,
                edge_departure: p.edge_departure,
                agg_arrival: p.agg_arrival,
                delivery: self.now,
                waits: p.waits.clone(),
            });
        }
        self.free.push(packet);
    }

    fn finish(self, radio: &[RadioFlow]) -> SimTrace {
        let mut warnings = Vec::new();
        for (f, info) in radio.iter().zip(&self.flows) {
            if info.period > self.cfg.horizon {
                warnings.push(format!(
                    "horizon {} is shorter than the period {} of flow {}",
                    self.cfg.horizon, info.period, f.id
                ));
            }
        }
        let mut log = self.log;
        log.sort_by_key(|r| (r.delivery, r.flow, r.seq));
        SimTrace {
            policy: self.cfg.policy,
            horizon: self.cfg.horizon,
            seed: self.cfg.seed,
            end_time: self.now,
            flows: self.stats,
            level_max_wait: self.level_max_wait,
            warnings,
            packets: self.cfg.record_packets.then_some(log),
        }
    }
}
