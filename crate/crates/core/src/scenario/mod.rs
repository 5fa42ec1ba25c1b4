//! Scenario files: one TOML document describing the tree, the radios, and
//! optional simulation and optimization settings.
//!
//! Every physical quantity carries its unit as a string. Flow entries may be
//! templates (`edges = "all"` places one radio on every edge switch, and
//! `deadline = "period"` ties the deadline to the packet period); the
//! canonical export keeps templates as written so it re-parses to the same
//! model.

pub mod units;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::capacity::{ChannelEnsemble, QuantLadder, QuantNoiseModel};
use crate::sim::{Phases, SimConfig};
use crate::time::TimePs;
use crate::topology::{validate, Background, EdgeScheduler, FatTreeTopology, Violation};
use crate::traffic::{FlowId, RadioFlow};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("scenario syntax: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("scenario violates design requirements: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

fn field(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Field { path: path.into(), message: message.to_string() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub arity: u32,
    pub height: u32,
    pub link_capacities: Vec<String>,
    pub switching_delay: String,
    pub propagation_delay: String,
    pub packet_size: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_link: Option<String>,
    #[serde(default = "default_scheduler")]
    pub edge_scheduler: EdgeScheduler,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<BackgroundSection>,
}

fn default_scheduler() -> EdgeScheduler {
    EdgeScheduler::FixedPriority
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSection {
    pub packet_size: String,
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeSpec {
    One(usize),
    Many(Vec<usize>),
    /// Only `"all"` is accepted.
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    /// A fixed transport rate, e.g. "2.5Gbps". Excludes `sampling`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    /// ADC sampling frequency, e.g. "25MHz". Requires `quantization`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    /// ADC width in bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization: Option<u32>,
    /// A duration, or "period".
    pub deadline: String,
    pub edges: EdgeSpec,
    /// Packet size if different from the network's (reported as a violation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_size: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    /// "synchronous" or "random".
    Mode(String),
    Offsets(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<EdgeScheduler>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhaseSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: u32,
    #[serde(default)]
    pub drain: bool,
    /// Arity sweep: the per-edge radio mix of edge 0 is replicated on every
    /// edge switch of each tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arities: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_cap: Option<usize>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationSection {
    pub ladder: Vec<u32>,
    pub antennas: usize,
    pub tx_power: String,
    pub noise_power: String,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<EdgeScheduler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    #[serde(default)]
    pub oracle: bool,
}

fn default_realizations() -> usize {
    1000
}

/// The file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub topology: TopologySection,
    pub flows: Vec<FlowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationSection>,
}

/// A parsed scenario: the file plus the model it describes.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub topology: FatTreeTopology,
    pub flows: Vec<RadioFlow>,
    /// SHA-256 of the canonical export, hex.
    pub hash: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Read { path: path.display().to_string(), source })?;
        Scenario::parse(&text)
    }

    /// Parses and builds the model. Design-requirement violations are
    /// reported as [`ScenarioError::Invalid`].
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s = Scenario::parse_unvalidated(text)?;
        let violations = validate(&s.topology, &s.flows);
        if !violations.is_empty() {
            return Err(ScenarioError::Invalid(violations));
        }
        Ok(s)
    }

    /// Parses and builds the model without checking design requirements.
    pub fn parse_unvalidated(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        Scenario::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let topology = build_topology(&file.topology)?;
        let flows = build_flows(&file.flows, &topology)?;
        if let Some(sim) = &file.simulation {
            check_simulation(sim, &topology, flows.len())?;
        }
        if let Some(opt) = &file.optimization {
            check_optimization(opt)?;
        }
        let hash = hex(&Sha256::digest(canonical(&file)?.as_bytes()));
        Ok(Scenario { file, topology, flows, hash })
    }

    /// Canonical TOML text. Re-parsing it gives the same model and hash.
    pub fn export(&self) -> Result<String, ScenarioError> {
        canonical(&self.file)
    }

    pub fn policy(&self) -> EdgeScheduler {
        self.file.topology.edge_scheduler
    }

    /// Simulation settings, with defaults when the section is absent.
    pub fn sim_config(&self, policy: EdgeScheduler) -> Result<SimConfig, ScenarioError> {
        let Some(sim) = &self.file.simulation else {
            return Ok(SimConfig::new(policy, TimePs::from_ms(10)));
        };
        let horizon = units::parse_duration(&sim.horizon).map_err(|e| field("simulation.horizon", e))?;
        let phases = match &sim.phases {
            None => Phases::Synchronous,
            Some(PhaseSpec::Mode(m)) if m == "synchronous" => Phases::Synchronous,
            Some(PhaseSpec::Mode(m)) if m == "random" => Phases::Random,
            Some(PhaseSpec::Mode(m)) => {
                return Err(field("simulation.phases", format!("unknown mode \"{m}\"")));
            }
            Some(PhaseSpec::Offsets(v)) => Phases::Fixed(
                v.iter()
                    .enumerate()
                    .map(|(i, s)| units::parse_duration(s).map_err(|e| field(format!("simulation.phases[{i}]"), e)))
                    .collect::<Result<_, _>>()?,
            ),
        };
        let mut cfg = SimConfig::new(policy, horizon).with_phases(phases).with_seed(sim.seed).with_drain(sim.drain);
        if let Some(cap) = sim.queue_cap {
            cfg = cfg.with_queue_cap(cap);
        }
        Ok(cfg)
    }

    pub fn sim_policies(&self) -> Vec<EdgeScheduler> {
        self.file.simulation.as_ref().and_then(|s| s.policies.clone()).unwrap_or_else(|| vec![self.policy()])
    }

    /// Radios placed on edge 0, the template for arity sweeps.
    pub fn per_edge_template(&self) -> Vec<RadioFlow> {
        self.flows.iter().filter(|f| f.edge == 0).cloned().collect()
    }

    /// Optimization inputs: ladder, channel ensemble, noise model and policy.
    pub fn optimization(
        &self,
    ) -> Result<Option<(QuantLadder, ChannelEnsemble, QuantNoiseModel, EdgeScheduler)>, ScenarioError> {
        let Some(opt) = &self.file.optimization else { return Ok(None) };
        let ladder = QuantLadder::new(opt.ladder.clone()).map_err(|e| field("optimization.ladder", e))?;
        let rho = units::parse_power(&opt.tx_power).map_err(|e| field("optimization.tx_power", e))?;
        let sigma2 = units::parse_power(&opt.noise_power).map_err(|e| field("optimization.noise_power", e))?;
        let ensemble =
            ChannelEnsemble::rayleigh(self.flows.len(), opt.antennas, opt.realizations, rho, sigma2, opt.seed)
                .map_err(|e| field("optimization", e))?;
        let noise = match opt.noise_scale {
            Some(s) => QuantNoiseModel::new(s).map_err(|e| field("optimization.noise_scale", e))?,
            None => QuantNoiseModel::default(),
        };
        Ok(Some((ladder, ensemble, noise, opt.policy.unwrap_or(self.policy()))))
    }
}

fn canonical(file: &ScenarioFile) -> Result<String, ScenarioError> {
    toml::to_string(file).map_err(|e| ScenarioError::Syntax(e.to_string()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn build_topology(t: &TopologySection) -> Result<FatTreeTopology, ScenarioError> {
    let caps = t
        .link_capacities
        .iter()
        .enumerate()
        .map(|(i, s)| units::parse_rate(s).map_err(|e| field(format!("topology.link_capacities[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let ts = units::parse_duration(&t.switching_delay).map_err(|e| field("topology.switching_delay", e))?;
    let tp = units::parse_duration(&t.propagation_delay).map_err(|e| field("topology.propagation_delay", e))?;
    let b = units::parse_size(&t.packet_size).map_err(|e| field("topology.packet_size", e))?;
    let mut topo = FatTreeTopology::new(t.arity, t.height, caps, ts, tp, b).map_err(|e| field("topology", e))?;
    if let Some(src) = &t.source_link {
        let cap = units::parse_rate(src).map_err(|e| field("topology.source_link", e))?;
        topo = topo.with_source_link(cap).map_err(|e| field("topology.source_link", e))?;
    }
    if let Some(bg) = &t.background {
        let bits = units::parse_size(&bg.packet_size).map_err(|e| field("topology.background.packet_size", e))?;
        let levels: BTreeSet<usize> = bg.levels.iter().copied().collect();
        topo = topo
            .with_background(Background { packet_bits: bits, levels })
            .map_err(|e| field("topology.background", e))?;
    }
    Ok(topo)
}

fn build_flows(sections: &[FlowSection], topo: &FatTreeTopology) -> Result<Vec<RadioFlow>, ScenarioError> {
    let mut flows = Vec::new();
    for (i, f) in sections.iter().enumerate() {
        let path = |k: &str| format!("flows[{i}].{k}");
        let edges: Vec<usize> = match &f.edges {
            EdgeSpec::One(e) => vec![*e],
            EdgeSpec::Many(v) if !v.is_empty() => v.clone(),
            EdgeSpec::Many(_) => return Err(field(path("edges"), "empty edge list")),
            EdgeSpec::Keyword(k) if k == "all" => (0..topo.edge_count()).collect(),
            EdgeSpec::Keyword(k) => {
                return Err(field(path("edges"), format!("expected an index, a list or \"all\", got \"{k}\"")))
            }
        };
        let payload = match &f.packet_size {
            Some(s) => units::parse_size(s).map_err(|e| field(path("packet_size"), e))?,
            None => topo.payload_bits(),
        };
        for edge in edges {
            let id = flows.len() as u32;
            let placeholder = TimePs::from_ps(1);
            let flow = match (&f.rate, &f.sampling, f.quantization) {
                (Some(r), None, None) => {
                    let rate = units::parse_rate(r).map_err(|e| field(path("rate"), e))?;
                    RadioFlow::fixed_rate(id, rate, payload, placeholder, edge).map_err(|e| field(path("rate"), e))?
                }
                (None, Some(s), Some(q)) => {
                    let hz = units::parse_frequency(s).map_err(|e| field(path("sampling"), e))?;
                    RadioFlow::adc(id, hz, q, payload, placeholder, edge).map_err(|e| field(path("sampling"), e))?
                }
                (None, Some(_), None) => return Err(field(path("quantization"), "required with sampling")),
                (None, None, Some(_)) => return Err(field(path("sampling"), "required with quantization")),
                (None, None, None) => return Err(field(path("rate"), "give either rate or sampling and quantization")),
                (Some(_), _, _) => return Err(field(path("rate"), "rate excludes sampling and quantization")),
            };
            let deadline = if f.deadline == "period" {
                flow.period().map_err(|e| field(path("deadline"), e))?
            } else {
                units::parse_duration(&f.deadline).map_err(|e| field(path("deadline"), e))?
            };
            if deadline.is_zero() {
                return Err(field(path("deadline"), "must be positive"));
            }
            flows.push(RadioFlow { id: FlowId(id), deadline, ..flow });
        }
    }
    if flows.is_empty() {
        return Err(field("flows", "no radios defined"));
    }
    Ok(flows)
}

fn check_simulation(sim: &SimulationSection, topo: &FatTreeTopology, n: usize) -> Result<(), ScenarioError> {
    let h = units::parse_duration(&sim.horizon).map_err(|e| field("simulation.horizon", e))?;
    if h.is_zero() {
        return Err(field("simulation.horizon", "must be positive"));
    }
    if sim.repetitions == 0 {
        return Err(field("simulation.repetitions", "must be at least 1"));
    }
    if let Some(PhaseSpec::Offsets(v)) = &sim.phases {
        if v.len() != n {
            return Err(field("simulation.phases", format!("{} offsets for {n} radios", v.len())));
        }
    }
    if let Some(arities) = &sim.arities {
        for (i, &q) in arities.iter().enumerate() {
            topo.with_arity(q).map_err(|e| field(format!("simulation.arities[{i}]"), e))?;
        }
    }
    Ok(())
}

fn check_optimization(opt: &OptimizationSection) -> Result<(), ScenarioError> {
    QuantLadder::new(opt.ladder.clone()).map_err(|e| field("optimization.ladder", e))?;
    units::parse_power(&opt.tx_power).map_err(|e| field("optimization.tx_power", e))?;
    units::parse_power(&opt.noise_power).map_err(|e| field("optimization.noise_power", e))?;
    if opt.antennas == 0 {
        return Err(field("optimization.antennas", "must be at least 1"));
    }
    if opt.realizations == 0 {
        return Err(field("optimization.realizations", "must be at least 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
name = "reference"

[topology]
arity = 3
height = 2
link_capacities = ["10Gbps", "40Gbps", "200Gbps"]
switching_delay = "50ns"
propagation_delay = "10ns"
packet_size = "1KB"

[[flows]]
rate = "1Gbps"
deadline = "period"
edges = "all"

[[flows]]
rate = "1.5Gbps"
deadline = "period"
edges = "all"

[[flows]]
rate = "2Gbps"
deadline = "period"
edges = "all"

[[flows]]
rate = "2.5Gbps"
deadline = "period"
edges = "all"

[simulation]
horizon = "10ms"
"#;

    #[test]
    fn reference_parses() {
        let s = Scenario::parse(REFERENCE).unwrap();
        assert_eq!(s.flows.len(), 36);
        assert_eq!(s.topology.tx_time(1), TimePs::from_ns(800));
        // templates expand in order, one radio per edge each
        assert_eq!(s.flows[27].deadline, TimePs::from_ps(3_200_000));
        assert_eq!(s.flows[27].edge, 0);
        assert_eq!(s.flows[1].edge, 1);
        assert_eq!(s.flows[10].edge, 1);
        assert_eq!(s.hash.len(), 64);
        assert_eq!(s.per_edge_template().len(), 4);
    }

    #[test]
    fn export_round_trips() {
        let s = Scenario::parse(REFERENCE).unwrap();
        let text = s.export().unwrap();
        let again = Scenario::parse(&text).unwrap();
        assert_eq!(again.topology, s.topology);
        assert_eq!(again.flows, s.flows);
        assert_eq!(again.hash, s.hash);
        assert_eq!(again.export().unwrap(), text);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = REFERENCE.replace("\"40Gbps\"", "\"40Gbit\"");
        match Scenario::parse(&bad) {
            Err(ScenarioError::Field { path, .. }) => assert_eq!(path, "topology.link_capacities[1]"),
            other => panic!("{other:?}"),
        }
        let bad = REFERENCE.replace("rate = \"2Gbps\"", "rate = \"2\"");
        match Scenario::parse(&bad) {
            Err(ScenarioError::Field { path, message }) => {
                assert_eq!(path, "flows[2].rate");
                assert!(message.contains("no unit"));
            }
            other => panic!("{other:?}"),
        }
        let bad = REFERENCE.replace("arity = 3", "arity = 3\ncolour = 1");
        assert!(matches!(Scenario::parse(&bad), Err(ScenarioError::Syntax(_))));
        let thin = REFERENCE.replace("\"40Gbps\"", "\"10Gbps\"");
        assert!(matches!(Scenario::parse(&thin), Err(ScenarioError::Invalid(_))));
        assert!(Scenario::parse_unvalidated(&thin).is_ok());
    }

    #[test]
    fn adc_flows_and_offsets() {
        let text = r#"
[topology]
arity = 2
height = 1
link_capacities = ["10Gbps", "20Gbps"]
switching_delay = "0ns"
propagation_delay = "0ns"
packet_size = "1492B"

[[flows]]
sampling = "25MHz"
quantization = 8
deadline = "600us"
edges = [0, 1]

[simulation]
horizon = "1ms"
phases = ["0ns", "12.5ns"]
"#;
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.flows[0].period().unwrap(), TimePs::from_ps(29_840_000));
        let cfg = s.sim_config(EdgeScheduler::Edf).unwrap();
        assert_eq!(cfg.phases, Phases::Fixed(vec![TimePs::ZERO, TimePs::from_ps(12_500)]));
        let wrong = text.replace("[\"0ns\", \"12.5ns\"]", "[\"0ns\"]");
        assert!(matches!(Scenario::parse(&wrong), Err(ScenarioError::Field { .. })));
    }
}
