//! One-component equation: the profile modulus freezes and the phase follows
//! a logarithmic law.

use nlslab::pde::{extract_scattering_state, run, Datum, Grid, Schedule};
use nlslab::{CubicSystem, C64};

fn main() -> nlslab::Result<()> {
    let grid = Grid::new(600.0 * std::f64::consts::PI, 1 << 13)?;
    let datum = Datum::new(0.5, C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    for lambda in [1.0, -1.0] {
        let sys = CubicSystem::single(lambda);
        let out = run(&sys, grid, &datum, &Schedule { dt: 5e-3, snapshots: vec![10.0, 40.0], fields: vec![] })?;
        let (a, b) = (out.profile_at(10.0).unwrap(), out.profile_at(40.0).unwrap());
        // compare modulus and phase at the spatial frequency carrying the most mass
        let n = (0..grid.n).max_by(|&i, &j| a.w1[i].norm().total_cmp(&a.w1[j].norm())).unwrap();
        let dphase = (b.w1[n] / a.w1[n]).arg();
        let predicted = -lambda * a.w1[n].norm_sqr() * 0.5 * (40.0f64 / 10.0).ln();
        println!("lambda {lambda:+}: |w| {:.6} -> {:.6}", a.w1[n].norm(), b.w1[n].norm());
        println!("  phase change {dphase:+.6}, logarithmic law {predicted:+.6}");
        let (s1, _) = extract_scattering_state(&sys, b, 1e-10)?;
        println!("  extracted scattering datum at that frequency {:.6}", s1[n]);
    }
    Ok(())
}
