//! Searches for a state where the flux of a positive Hermitian weight has the
//! wrong sign.

use nlslab::classify::{check_d0_candidate, D0Verdict, HermitianCandidate};
use nlslab::CubicSystem;

fn main() -> nlslab::Result<()> {
    let candidates = [
        HermitianCandidate::new(1.0, 0.0, 0.0, 1.0),
        HermitianCandidate::new(2.0, 0.3, -0.1, 1.0),
        HermitianCandidate::new(1.0, 0.0, 0.0, 5.0),
    ];
    for (name, sys) in [("model", CubicSystem::model()), ("single", CubicSystem::single(-1.0))] {
        for h in &candidates {
            match check_d0_candidate(&sys, h, 20_000, 7)? {
                D0Verdict::RefutedWithWitness { state, value, .. } => {
                    println!("{name} {h:?}: refuted at ({}, {}), flux {value:.4}", state.a1, state.a2)
                }
                D0Verdict::UndecidedAfterSearch => println!("{name} {h:?}: no counterexample found"),
            }
        }
    }
    Ok(())
}
