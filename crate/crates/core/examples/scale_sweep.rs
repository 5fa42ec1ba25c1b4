//! Grows the tree by raising the switch arity while link capacities stay
//! fixed, and reports how the worst end-to-end delay moves.

use fronthaul::sim::{sweep_scale, SimConfig};
use fronthaul::time::TimePs;
use fronthaul::topology::{aggregation_delay_bound, EdgeScheduler, FatTreeTopology};
use fronthaul::traffic::RadioFlow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const GBPS: u64 = 1_000_000_000;
    let base = FatTreeTopology::new(
        2,
        2,
        vec![10 * GBPS, 40 * GBPS, 200 * GBPS],
        TimePs::from_ns(50),
        TimePs::from_ns(10),
        8000,
    )?;
    let per_edge = [GBPS, 1_500_000_000, 2 * GBPS, 2_500_000_000]
        .iter()
        .map(|&r| {
            let f = RadioFlow::fixed_rate(0, r, 8000, TimePs::from_ps(1), 0)?;
            Ok(RadioFlow { deadline: f.period()?, ..f })
        })
        .collect::<Result<Vec<_>, fronthaul::traffic::TrafficError>>()?;

    let cfg = SimConfig::new(EdgeScheduler::FixedPriority, TimePs::from_ms(10));
    let points = sweep_scale(&base, &[2, 3, 4], &per_edge, &cfg)?;
    println!("{:>5} {:>7} {:>12} {:>12}", "arity", "radios", "max delay", "agg. bound");
    for p in &points {
        let bound = aggregation_delay_bound(&base.with_arity(p.arity)?).total;
        println!("{:>5} {:>7} {:>10.3}us {:>10.3}us", p.arity, p.radios, p.max_delay.as_us_f64(), bound.as_us_f64());
    }
    let spread = points.iter().map(|p| p.max_delay).max().unwrap() - points.iter().map(|p| p.max_delay).min().unwrap();
    println!("spread across arities: {spread}");
    Ok(())
}
