//! Chooses per-radio ADC widths that maximize uplink capacity while every
//! edge switch stays schedulable, and checks the answer by brute force.

use fronthaul::capacity::{
    bfs_search, brute_force_oracle, ChannelEnsemble, QuantLadder, QuantNoiseModel, QuantSearch, DEFAULT_ORACLE_CAP,
};
use fronthaul::time::TimePs;
use fronthaul::topology::{EdgeScheduler, FatTreeTopology};
use fronthaul::traffic::RadioFlow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const GBPS: u64 = 1_000_000_000;
    let topo = FatTreeTopology::new(2, 1, vec![10 * GBPS, 20 * GBPS], TimePs::from_ns(20), TimePs::from_ns(10), 8000)?;
    // two radios per edge switch sampling at 400 MHz
    let mut radios = Vec::new();
    for edge in 0..topo.edge_count() {
        for deadline in [3, 4] {
            radios.push(RadioFlow::adc(radios.len() as u32, 400_000_000, 8, 8000, TimePs::from_us(deadline), edge)?);
        }
    }
    let ladder = QuantLadder::new(vec![2, 4, 6, 8, 10, 12])?;
    let ensemble = ChannelEnsemble::rayleigh(radios.len(), 8, 200, 10.0, 1.0, 7)?;
    let search = QuantSearch {
        topology: &topo,
        radios: &radios,
        ladder: &ladder,
        ensemble: &ensemble,
        noise: QuantNoiseModel::default(),
        policy: EdgeScheduler::Edf,
    };
    let report = bfs_search(&search)?;
    let oracle = brute_force_oracle(&search, DEFAULT_ORACLE_CAP)?;
    match &report.best {
        Some(q) => println!("best widths {q}: {:.4} b/s/Hz", report.capacity),
        None => println!("no width assignment is schedulable"),
    }
    println!("expanded {} vectors, evaluated capacity for {}", report.expanded, report.evaluated);
    println!("brute force over {} vectors agrees: {}", oracle.explored.len(), oracle.capacity == report.capacity);
    Ok(())
}
