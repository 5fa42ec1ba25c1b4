//! Loads a scenario file, prints the model it describes, and shows that the
//! canonical export re-parses to the same hash.

use std::path::PathBuf;

use fronthaul::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.toml"));
    let s = Scenario::load(&path)?;
    println!("{}: {}", path.display(), s.hash);
    println!(
        "arity {}, height {}, {} radios, edge scheduler {:?}",
        s.topology.arity(),
        s.topology.height(),
        s.flows.len(),
        s.policy()
    );
    for f in s.flows.iter().take(4) {
        println!("  radio {} on edge {}: period {}, deadline {}", f.id.0, f.edge, f.period()?, f.deadline);
    }
    let text = s.export()?;
    let again = Scenario::parse(&text)?;
    println!("canonical export re-parses to the same hash: {}", again.hash == s.hash);
    Ok(())
}
