//! Small-data run of the model PDE: decay, profile, remainders, and matching
//! with the limit ODE.

use nlslab::pde::{asymptotic_match, loglog_slope, run, Datum, Grid, Schedule};
use nlslab::{CubicSystem, C64};

fn main() -> nlslab::Result<()> {
    let sys = CubicSystem::model();
    let grid = Grid::new(400.0 * std::f64::consts::PI, 1 << 12)?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let datum = Datum::new(0.5, C64::new(c, 0.0), C64::new(0.0, c))?;
    let snapshots = vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0];
    let out = run(&sys, grid, &datum, &Schedule { dt: 5e-3, snapshots, fields: vec![] })?;

    println!("{:>6} {:>11} {:>11} {:>11} {:>11}", "t", "sup u1", "sup u2", "r sup", "Q drift");
    for r in &out.rows {
        let drift = r.quartic_drift.map_or(String::from("-"), |d| format!("{d:.3e}"));
        println!("{:6.1} {:11.4e} {:11.4e} {:11.4e} {:>11}", r.t, r.sup[0], r.sup[1], r.r_sup[0] + r.r_sup[1], drift);
    }
    let late: Vec<_> = out.rows.iter().filter(|r| r.t >= 5.0).collect();
    let t: Vec<f64> = late.iter().map(|r| r.t).collect();
    let s: Vec<f64> = late.iter().map(|r| r.sup[0] + r.sup[1]).collect();
    println!("sup-norm decay exponent {:.3}", loglog_slope(&t, &s));

    let (p1, p2) = (out.profile_at(10.0).unwrap(), out.profile_at(40.0).unwrap());
    let m = asymptotic_match(&sys, &grid, p1, p2, 1e-10)?;
    println!("profile at t=40 vs ODE flow from t=10: L2 {:.3e}, sup {:.3e}", m.l2, m.sup);
    Ok(())
}
