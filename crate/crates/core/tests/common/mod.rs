// Random scenario generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;

use fronthaul::sched::FlowSet;
use fronthaul::time::TimePs;
use fronthaul::topology::{validate, Background, EdgeScheduler, FatTreeTopology};
use fronthaul::traffic::RadioFlow;

pub const GBPS: u64 = 1_000_000_000;
pub const PAYLOAD: u64 = 8000;

/// Reference tree at arity `q`: 10/40/200 Gb/s, 50 ns switching, 10 ns
/// propagation, 1000-byte packets.
pub fn reference_tree(q: u32) -> FatTreeTopology {
    FatTreeTopology::new(
        q,
        2,
        vec![10 * GBPS, 40 * GBPS, 200 * GBPS],
        TimePs::from_ns(50),
        TimePs::from_ns(10),
        PAYLOAD,
    )
    .unwrap()
}

/// One radio of each reference rate on every edge, deadline equal to period,
/// numbered edge by edge.
pub fn reference_flows(topo: &FatTreeTopology) -> Vec<RadioFlow> {
    let mut flows = Vec::new();
    for edge in 0..topo.edge_count() {
        for rate in [GBPS, 1_500_000_000, 2 * GBPS, 2_500_000_000] {
            let f = RadioFlow::fixed_rate(flows.len() as u32, rate, PAYLOAD, TimePs::from_ps(1), edge).unwrap();
            flows.push(RadioFlow { deadline: f.period().unwrap(), ..f });
        }
    }
    flows
}

/// A fat tree with random arity 2..=4, height 1..=3, capacities that grow by
/// at least the arity per level, and optional source link and background.
pub fn random_tree(rng: &mut impl Rng) -> FatTreeTopology {
    loop {
        let topo = draw_tree(rng);
        // rounding of transmission times can break fatness by a picosecond
        if validate(&topo, &[]).is_empty() {
            return topo;
        }
    }
}

fn draw_tree(rng: &mut impl Rng) -> FatTreeTopology {
    let q = rng.random_range(2..=4u32);
    let h = rng.random_range(1..=3u32);
    let mut caps = vec![[5, 10, 20][rng.random_range(0..3)] * GBPS];
    for _ in 0..h {
        let last = *caps.last().unwrap();
        caps.push(last * u64::from(q + rng.random_range(0..=1)));
    }
    let ts = TimePs::from_ns(10 * rng.random_range(0..=10));
    let tp = TimePs::from_ns(5 * rng.random_range(0..=10));
    let mut topo = FatTreeTopology::new(q, h, caps, ts, tp, PAYLOAD).unwrap();
    if rng.random_bool(0.25) {
        topo = topo.with_source_link([25, 40][rng.random_range(0..2)] * GBPS).unwrap();
    }
    if rng.random_bool(0.25) {
        let levels: BTreeSet<usize> = (1..=h as usize + 1).filter(|_| rng.random_bool(0.5)).collect();
        if !levels.is_empty() {
            let bits = 1000 * rng.random_range(4..=12);
            topo = topo.with_background(Background { packet_bits: bits, levels }).unwrap();
        }
    }
    topo
}

/// 1..=4 radios per edge with a random edge-uplink utilization up to
/// `max_util`, deadlines `factor · period` with `factor` drawn from
/// `deadline_factor`.
pub fn random_flows(
    rng: &mut impl Rng,
    topo: &FatTreeTopology,
    max_util: f64,
    deadline_factor: (f64, f64),
) -> Vec<RadioFlow> {
    let cap = topo.link_caps()[0] as f64;
    let mut flows = Vec::new();
    for edge in 0..topo.edge_count() {
        let n = rng.random_range(1..=4);
        let total = rng.random_range(0.2..max_util);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
        let sum: f64 = weights.iter().sum();
        for w in weights {
            // whole megabits per second
            let rate = ((cap * total * w / sum) / 1e6).floor().max(1.0) as u64 * 1_000_000;
            let f = RadioFlow::fixed_rate(flows.len() as u32, rate, PAYLOAD, TimePs::from_ps(1), edge).unwrap();
            let period = f.period().unwrap().as_ps() as f64;
            let factor = rng.random_range(deadline_factor.0..=deadline_factor.1);
            let deadline = TimePs::from_ps((period * factor).round().max(1.0) as u64);
            flows.push(RadioFlow { deadline, ..f });
        }
    }
    flows
}

pub fn random_policy(rng: &mut impl Rng, with_fifo: bool) -> EdgeScheduler {
    let options: &[EdgeScheduler] = if with_fifo {
        &[EdgeScheduler::Fifo, EdgeScheduler::FixedPriority, EdgeScheduler::Edf]
    } else {
        &[EdgeScheduler::FixedPriority, EdgeScheduler::Edf]
    };
    options[rng.random_range(0..options.len())]
}

/// n ≤ 5 flows on a microsecond grid: C in 1..=2, T in 2..=12, d in 1..=T+2.
pub fn random_small_set(rng: &mut impl Rng) -> FlowSet {
    let us = TimePs::from_us;
    let c = rng.random_range(1..=2u64);
    let n = rng.random_range(1..=5);
    let pairs: Vec<(TimePs, TimePs)> = (0..n)
        .map(|_| {
            let t = rng.random_range(2..=12u64);
            let d = rng.random_range(1..=t + 2);
            (us(t), us(d))
        })
        .collect();
    let fs = FlowSet::uniform(us(c), &pairs).unwrap();
    if rng.random_bool(0.3) {
        fs.with_extra_blocking(TimePs::from_ns(100 * rng.random_range(1..=5)))
    } else {
        fs
    }
}

/// Single-edge-per-switch tree of ADC radios for quantization tests: arity
/// 1..=2, height 1..=2, 1..=`max_radios` radios sampling at 100..=400 MHz.
pub fn random_adc_scenario(rng: &mut impl Rng, max_radios: usize) -> (FatTreeTopology, Vec<RadioFlow>) {
    let q = rng.random_range(1..=2u32);
    let h = rng.random_range(1..=2u32);
    let mut caps = vec![10 * GBPS];
    for _ in 0..h {
        let last = *caps.last().unwrap();
        caps.push(last * u64::from(q.max(2)));
    }
    let topo = FatTreeTopology::new(q, h, caps, TimePs::from_ns(20), TimePs::from_ns(10), PAYLOAD).unwrap();
    let n = rng.random_range(1..=max_radios);
    let radios = (0..n)
        .map(|i| {
            let fs = 50_000_000 * rng.random_range(2..=8u64);
            let deadline = TimePs::from_ns(250 * rng.random_range(6..=24));
            let edge = rng.random_range(0..topo.edge_count());
            RadioFlow::adc(i as u32, fs, 8, PAYLOAD, deadline, edge).unwrap()
        })
        .collect();
    (topo, radios)
}
