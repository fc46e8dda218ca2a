//! Builds the quartic invariant of the model and watches it along the ODE.

use nlslab::ode::integrate;
use nlslab::quartic::{build_quartic, coercivity_bounds};
use nlslab::{CubicSystem, PairState, C64};

fn main() -> nlslab::Result<()> {
    let sys = CubicSystem::model();
    let q = build_quartic(&sys.to_matrix_vector())?;
    let (lo, hi) = coercivity_bounds(&q);
    println!("k = {}, Gamma = {:?}, GammaTilde = {:?}", q.k, q.gamma, q.gamma_tilde);
    println!("{lo:.6} <= Q / |A|^4 <= {hi:.6}");

    let s0 = PairState::new(C64::new(0.8, 0.1), C64::new(-0.2, 0.5));
    let traj = integrate(&sys, s0, 50.0, 1e-11)?;
    let vals = traj.quartic.as_ref().unwrap();
    for i in (0..traj.tau.len()).step_by(traj.tau.len() / 10) {
        let s = traj.states[i];
        println!("tau {:6.2}  |A|^2 {:.6}  Q {:.12}", traj.tau[i], s.norm_sqr(), vals[i]);
    }
    println!("relative drift {:.2e}", traj.quartic_drift().unwrap());
    Ok(())
}
