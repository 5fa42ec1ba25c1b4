//! The single-link tests on a few packet flow sets, checked against a
//! job-level simulation of one hyperperiod.

use fronthaul::sched::{confirm_witness, rate_monotonic_order, schedulability_test, Discipline, FlowSet};
use fronthaul::sim::simulate_link;
use fronthaul::time::TimePs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let us = TimePs::from_us;
    let sets = [
        ("light", FlowSet::uniform(us(1), &[(us(4), us(4)), (us(6), us(5)), (us(12), us(12))])?),
        ("tight deadlines", FlowSet::uniform(us(1), &[(us(3), us(1)), (us(4), us(2)), (us(6), us(2))])?),
        ("full link", FlowSet::uniform(us(1), &[(us(2), us(2)), (us(4), us(4)), (us(4), us(4))])?),
    ];
    for (name, fs) in &sets {
        let fs = rate_monotonic_order(fs);
        println!("{name}: utilization {}", fs.utilization());
        for discipline in [Discipline::Edf, Discipline::FixedPriority] {
            for preemptive in [true, false] {
                let v = schedulability_test(&fs, discipline, preemptive);
                let sim = simulate_link(&fs, discipline, preemptive)?;
                let witness = match &v.witness {
                    Some(w) => {
                        format!(", witness {w:?} confirmed = {}", confirm_witness(&fs, discipline, preemptive, w))
                    }
                    None => String::new(),
                };
                println!(
                    "  {discipline:?} {}: test {}, simulated misses {}{witness}",
                    if preemptive { "preemptive" } else { "non-preemptive" },
                    if v.schedulable { "pass" } else { "fail" },
                    sim.misses
                );
            }
        }
    }
    Ok(())
}
