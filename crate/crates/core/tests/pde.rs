use nlslab::pde::*;
use nlslab::{CubicSystem, C64};

fn datum(eps: f64) -> Datum {
    Datum::new(eps, C64::new(0.8, 0.0), C64::new(0.6, 0.0)).unwrap()
}

/// Free evolution of `e^{−x²}`.
fn free_gaussian(t: f64, x: f64) -> C64 {
    let d = C64::new(1.0, 4.0 * t);
    (-x * x / d).exp() / d.sqrt()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn free_flow_matches_closed_form() {
    let g = Grid::new(400.0, 1 << 13).unwrap();
    let mut s = Solver::new(CubicSystem::zero(), g);
    let mut st = Datum::new(1.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap().state(&g);
    s.advance(&mut st, 0.25, 8).unwrap();
    let exact: Vec<C64> = g.xs().iter().map(|&x| free_gaussian(2.0, x)).collect();
    assert!(max_diff(&st.u1, &exact) < 1e-12);
    assert!(st.u2.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn linear_flow_keeps_spectral_modulus() {
    let g = Grid::new(100.0, 1 << 10).unwrap();
    let mut s = Solver::new(CubicSystem::zero(), g);
    let mut st = datum(1.0).state(&g);
    let before: Vec<f64> = s.forward_ft(&st.u1).iter().map(|z| z.norm()).collect();
    s.advance(&mut st, 0.3, 3).unwrap();
    let after: Vec<f64> = s.forward_ft(&st.u1).iter().map(|z| z.norm()).collect();
    assert!(before.iter().zip(&after).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn profile_frame_and_norms() {
    let g = Grid::new(200.0 * std::f64::consts::PI, 1 << 12).unwrap();
    let mut free = Solver::new(CubicSystem::zero(), g);
    let mut st = datum(0.5).state(&g);
    let p0 = free.profile(&st);
    free.advance(&mut st, 0.5, 6).unwrap();
    let p1 = free.profile(&st);
    assert!(max_diff(&p0.w1, &p1.w1) < 1e-12 && max_diff(&p0.w2, &p1.w2) < 1e-12);
    // back to the field
    let back = free.field_from_profile(&p1);
    assert!(max_diff(&back.u1, &st.u1) < 1e-13);

    let mut model = Solver::new(CubicSystem::model(), g);
    let mut st = datum(0.5).state(&g);
    model.advance(&mut st, 0.01, 300).unwrap();
    let p = model.profile(&st);
    assert!((model.l2_x(&st.u1) - model.l2_xi(&p.w1)).abs() < 1e-12);
    assert!((model.l2_x(&st.u2) - model.l2_xi(&p.w2)).abs() < 1e-12);
}

#[test]
fn j_norm_at_zero_and_under_free_flow() {
    let g = Grid::new(200.0 * std::f64::consts::PI, 1 << 12).unwrap();
    let mut s = Solver::new(CubicSystem::zero(), g);
    let d = Datum::new(1.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
    let mut st = d.state(&g);
    // ‖x e^{−x²}‖² = √π / (2 · 2^{3/2})
    let exact = (std::f64::consts::PI.sqrt() / (2.0 * 2f64.powf(1.5))).sqrt();
    let j0 = s.j_norm(&st);
    assert!((j0[0] - exact).abs() < 1e-12 && j0[1] == 0.0);
    assert!((s.j_norm_direct(&st)[0] - j0[0]).abs() < 1e-10);
    s.advance(&mut st, 0.5, 10).unwrap();
    let j1 = s.j_norm(&st);
    assert!((j1[0] - exact).abs() < 1e-10);
    assert!((s.j_norm_direct(&st)[0] - j1[0]).abs() < 1e-10);
}

#[test]
fn chirped_profile_sup_relation() {
    let g = Grid::new(4096.0, 1 << 14).unwrap();
    let mut s = Solver::new(CubicSystem::zero(), g);
    let d = Datum::new(1.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
    for t in [1.0, 10.0, 100.0] {
        let mut st = d.state(&g);
        s.advance(&mut st, t, 1).unwrap();
        let p = s.profile(&st);
        let (uw, _) = s.chirped_profile(&p);
        let lhs = uw.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let rhs = (2.0 * t).sqrt() * st.u1.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!((lhs - rhs).abs() < 1e-10, "t = {t}: {lhs} vs {rhs}");
    }
}

#[test]
fn remainders_vanish_without_coupling_and_split_for_the_model() {
    let g = Grid::new(400.0 * std::f64::consts::PI, 1 << 13).unwrap();
    let mut s = Solver::new(CubicSystem::zero(), g);
    let mut st = datum(0.3).state(&g);
    s.advance(&mut st, 0.5, 4).unwrap();
    let (r1, r2) = s.remainders(&st);
    assert!(r1.iter().chain(&r2).all(|z| z.norm() == 0.0));

    let mut s = Solver::new(CubicSystem::model(), g);
    let mut st = datum(0.3).state(&g);
    s.advance(&mut st, 0.01, 300).unwrap();
    let (r1, r2) = s.remainders(&st);
    let [(i1, ii1), (i2, ii2)] = s.remainder_parts(&st);
    let sum1: Vec<C64> = i1.iter().zip(&ii1).map(|(a, b)| a + b).collect();
    let sum2: Vec<C64> = i2.iter().zip(&ii2).map(|(a, b)| a + b).collect();
    let scale = r1.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(scale > 0.0);
    assert!(max_diff(&r1, &sum1) < 1e-9 * scale.max(1e-3) && max_diff(&r2, &sum2) < 1e-9 * scale.max(1e-3));
}

fn distance(a: &FieldState, b: &FieldState) -> f64 {
    max_diff(&a.u1, &b.u1).max(max_diff(&a.u2, &b.u2))
}

#[test]
fn splitting_is_second_order() {
    let g = Grid::new(100.0 * std::f64::consts::PI, 1 << 11).unwrap();
    let mut s = Solver::new(CubicSystem::model(), g);
    let d = datum(0.05);
    let run = |s: &mut Solver, dt: f64| {
        let mut st = d.state(&g);
        s.advance_to(&mut st, dt, 10.0).unwrap();
        st
    };
    let (a, b, c) = (run(&mut s, 0.2), run(&mut s, 0.1), run(&mut s, 0.05));
    let order = (distance(&a, &b) / distance(&b, &c)).log2();
    assert!(order >= 1.8, "measured order {order}");

    // one step against two half steps: the gap shrinks like dt³
    let gap = |s: &mut Solver, dt: f64| {
        let mut one = d.state(&g);
        let mut two = one.clone();
        s.step(&mut one, dt).unwrap();
        s.advance(&mut two, 0.5 * dt, 2).unwrap();
        distance(&one, &two)
    };
    let ratio = gap(&mut s, 0.08) / gap(&mut s, 0.04);
    assert!(ratio > 6.0, "step-halving ratio {ratio}");
}

#[test]
fn model_integrals_are_conserved() {
    let g = Grid::new(100.0 * std::f64::consts::PI, 1 << 11).unwrap();
    let d = datum(0.5);
    let drift = |dt: f64| {
        let sched = Schedule { dt, snapshots: vec![1.0, 2.0, 3.0, 4.0], fields: vec![1.0, 2.0, 3.0, 4.0] };
        let out = run(&CubicSystem::model(), g, &d, &sched).unwrap();
        model_conserved_checks(&CubicSystem::model(), g, &out.fields).unwrap()
    };
    let (a, b) = (drift(0.04), drift(0.02));
    assert!(a.mass_drift < 1e-10 && b.mass_drift < 1e-10);
    assert!(a.energy_drift < 1e-4);
    let ratio = a.energy_drift / b.energy_drift;
    assert!(ratio > 3.0 && ratio < 5.0, "energy drift ratio {ratio}");
    let st = d.state(&g);
    assert!(matches!(
        model_conserved_checks(&CubicSystem::single(1.0), g, &[st]),
        Err(nlslab::Error::WrongSystem(_))
    ));
}

#[test]
fn free_run_diagnostics_and_matching() {
    let g = Grid::new(200.0 * std::f64::consts::PI, 1 << 12).unwrap();
    let sys = CubicSystem::zero();
    let sched = Schedule { dt: 0.1, snapshots: vec![1.0, 2.0, 4.0], fields: vec![] };
    let out = run(&sys, g, &datum(0.3), &sched).unwrap();
    for r in &out.rows {
        assert_eq!(r.r_sup, [0.0, 0.0]);
        assert!(r.quartic_drift.is_none());
    }
    let m = asymptotic_match(&sys, &g, &out.profiles[0], &out.profiles[2], 1e-10).unwrap();
    assert!(m.sup < 1e-12);
    assert!(asymptotic_match(&sys, &g, &out.profiles[2], &out.profiles[0], 1e-10).is_err());
}

#[test]
fn extraction_round_trip() {
    let g = Grid::new(100.0 * std::f64::consts::PI, 1 << 10).unwrap();
    let sys = CubicSystem::model();
    let sched = Schedule { dt: 0.05, snapshots: vec![10.0], fields: vec![] };
    let out = run(&sys, g, &datum(0.3), &sched).unwrap();
    let p = &out.profiles[0];
    let (psi1, psi2) = extract_scattering_state(&sys, p, 1e-12).unwrap();
    let back = ProfileState { w1: psi1, w2: psi2, t: 1.0 };
    let (w1, w2) = flow_profile(&sys, &back, 0.5 * 10f64.ln(), 1e-12).unwrap();
    assert!(max_diff(&w1, &p.w1) < 1e-10 && max_diff(&w2, &p.w2) < 1e-10);
    let early = ProfileState { t: 5.0, ..p.clone() };
    assert!(extract_scattering_state(&sys, &early, 1e-12).is_err());
}

#[test]
fn bad_inputs() {
    assert!(Grid::new(-1.0, 64).is_err());
    assert!(Datum::new(0.1, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).is_err());
    let g = Grid::new(50.0, 256).unwrap();
    let sched = Schedule { dt: 0.1, snapshots: vec![2.0, 1.0], fields: vec![] };
    assert!(run(&CubicSystem::model(), g, &datum(0.1), &sched).is_err());
}
