//! The aggregation delay bound and the deadline budget it leaves to the
//! edge switches, with and without a source link and background traffic.

use std::collections::BTreeSet;

use fronthaul::time::TimePs;
use fronthaul::topology::{aggregation_delay_bound, max_queuing_per_hop, Background, DelayBudget, FatTreeTopology};
use fronthaul::traffic::RadioFlow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const GBPS: u64 = 1_000_000_000;
    let plain = FatTreeTopology::new(
        3,
        2,
        vec![10 * GBPS, 40 * GBPS, 200 * GBPS],
        TimePs::from_ns(50),
        TimePs::from_ns(10),
        8000,
    )?;
    let loaded = plain
        .clone()
        .with_source_link(25 * GBPS)?
        .with_background(Background { packet_bits: 12_000, levels: BTreeSet::from([2, 3]) })?;
    let radio = RadioFlow::fixed_rate(0, GBPS, 8000, TimePs::from_us(8), 0)?;

    for (name, topo) in [("plain", &plain), ("source link + background", &loaded)] {
        let b = aggregation_delay_bound(topo);
        println!("{name}:");
        for level in 1..=topo.height() as usize {
            println!("  queuing at level {level}: at most {}", max_queuing_per_hop(topo, level)?);
        }
        println!(
            "  bound {} = {} switching/propagation + {} transmission/queuing + {} background",
            b.total, b.switching_propagation, b.transmission_queuing, b.background
        );
        let budget = DelayBudget::new(topo, std::slice::from_ref(&radio));
        println!(
            "  edge deadline for an 8 us radio: {} ps (budget {})",
            budget.edge_deadlines.values().next().unwrap(),
            budget.total
        );
    }
    Ok(())
}
