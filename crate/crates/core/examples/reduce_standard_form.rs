//! Scrambles a standard-form system by a change of unknowns and reduces it back.

use nlslab::standard::{build_standard, reduce, StandardFormParams};
use nlslab::LinearChange;

fn main() -> nlslab::Result<()> {
    let p = StandardFormParams::new(1.0, 0.4, 0.3, -0.6, 0.8).with_potential(0.1, -0.2, 0.3);
    let (_, rep) = build_standard(&p);
    let ch = LinearChange::from_entries(1.3, 0.2, -0.1, 0.9)?;
    let scrambled = rep.apply_change(&ch);
    println!("scrambled A:\n{}", scrambled.a);

    let cert = reduce(&scrambled)?;
    for step in &cert.steps {
        println!("{:>12}: {:?}", step.name, step.matrix);
    }
    println!("recovered {:?}", cert.params);
    println!("parameter error {:.2e}", cert.params.max_diff(&p));
    println!("transport residual {:.2e}", cert.transport_residual);
    println!("eigenvector residual {:.2e}", cert.eigenvector_residual);
    Ok(())
}
