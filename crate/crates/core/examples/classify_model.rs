//! Structural verdicts for the model coupling and a few neighbours.

use nlslab::classify::classify;
use nlslab::CubicSystem;

fn main() -> nlslab::Result<()> {
    let systems = [
        ("model", CubicSystem::model()),
        ("zero", CubicSystem::zero()),
        ("single focusing", CubicSystem::single(-1.0)),
        ("mixed", CubicSystem::new([0.3, 0.0, -1.0, 0.2, 0.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.1, 0.0])?),
    ];
    for (name, sys) in systems {
        let r = classify(&sys, 2024);
        println!("{name}");
        println!("  eigenplane assumption: {} (k = {:?})", r.assumption.holds, r.assumption.k);
        println!("  S1: {}  H0: {}  rank: {}", r.s1, r.h0, r.rank);
        println!("  dissipative probe refuted: {}", r.d0_probe.refuted());
        println!("  family: {}", serde_json::to_string(&r.family).unwrap());
    }
    Ok(())
}
