//! Closed-form solution of the model ODE against the integrator, and the
//! rotation number of the phase.

use nlslab::ode::{best_rationals, integrate_grid, model_explicit_series, model_params, periodicity_ratio, uniform_grid};
use nlslab::{CubicSystem, C64};

fn main() -> nlslab::Result<()> {
    let (psi1, psi2) = (C64::new(0.6, 0.2), C64::new(-0.3, 0.7));
    let p = model_params(psi1, psi2)?;
    println!("alpha {:.6}  R0 {:.6}  m {:.6}", p.alpha, p.r0, p.m);

    let grid = uniform_grid(20.0, 0.05);
    let exact = model_explicit_series(&p, &grid);
    let traj = integrate_grid(&CubicSystem::model(), nlslab::PairState::new(psi1, psi2), &grid, 1e-12)?;
    let dev = exact
        .iter()
        .zip(&traj.states)
        .map(|(a, b)| (a.a1 - b.a1).norm().max((a.a2 - b.a2).norm()))
        .fold(0.0, f64::max);
    println!("max |closed form - dopri5| on [0, 20]: {dev:.2e}");

    if !p.is_balanced() && p.m > 0.0 {
        let ratio = periodicity_ratio(&p)?;
        println!("periodicity ratio {ratio:.12}");
        for (a, b) in best_rationals(ratio, 1000) {
            println!("  {a}/{b}");
        }
    }
    Ok(())
}
