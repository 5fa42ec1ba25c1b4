//! Two periodic radios behind one FIFO uplink: the 3 us radio leaves the
//! edge switch with gaps of 2, 4 and 2 us instead of a fixed spacing.

use fronthaul::sim::{run_simulation, Phases, SimConfig};
use fronthaul::time::TimePs;
use fronthaul::topology::{EdgeScheduler, FatTreeTopology};
use fronthaul::traffic::RadioFlow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const GBPS: u64 = 1_000_000_000;
    // 8000-bit packets on an 8 Gb/s uplink take 1 us each
    let topo = FatTreeTopology::new(1, 1, vec![8 * GBPS, 8 * GBPS], TimePs::ZERO, TimePs::ZERO, 8000)?;
    let flows = vec![
        RadioFlow::fixed_rate(0, 4 * GBPS, 8000, TimePs::from_us(2), 0)?,
        RadioFlow::fixed_rate(1, 2_666_666_667, 8000, TimePs::from_us(3), 0)?,
    ];
    let cfg = SimConfig::new(EdgeScheduler::Fifo, TimePs::from_us(12))
        .with_phases(Phases::Fixed(vec![TimePs::ZERO, TimePs::ZERO]))
        .with_packet_log(true);
    let trace = run_simulation(&topo, &flows, &cfg)?;

    for f in &flows {
        let times: Vec<TimePs> =
            trace.packets.iter().flatten().filter(|p| p.flow == f.id).map(|p| p.edge_departure).collect();
        let gaps: Vec<String> = times.windows(2).map(|w| format!("{:.0}", (w[1] - w[0]).as_us_f64())).collect();
        let at: Vec<String> = times.iter().map(|t| format!("{:.0}", t.as_us_f64())).collect();
        println!("flow {} leaves the edge at [{}] us, gaps [{}] us", f.id.0, at.join(", "), gaps.join(", "));
    }
    for f in &trace.flows {
        println!("flow {}: max delay {}, jitter {}", f.flow.0, f.max_delay, f.jitter());
    }
    Ok(())
}
