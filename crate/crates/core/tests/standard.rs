use nlslab::standard::*;
use nlslab::{CubicSystem, LinearChange, PairState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> StandardFormParams {
    let sigma = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mut u = |a: f64| rng.gen_range(-a..a);
    StandardFormParams::new(sigma, u(1.5), u(1.5), u(1.5), u(1.5)).with_potential(u(1.0), u(1.0), u(1.0))
}

fn near_identity(rng: &mut ChaCha8Rng) -> LinearChange {
    let s = rng.gen_range(0.6..1.8);
    let mut e = || rng.gen_range(-0.3..0.3);
    LinearChange::from_entries(s * (1.0 + e()), s * e(), s * e(), s * (1.0 + e())).unwrap()
}

fn rk4_path(sys: &CubicSystem, s: PairState, h: f64, n: usize) -> Vec<PairState> {
    let f = |s: PairState| {
        let (f1, f2) = sys.eval_nonlinearity(s);
        PairState::new(-C64::i() * f1, -C64::i() * f2)
    };
    let add = |a: PairState, b: PairState, c: f64| PairState::new(a.a1 + b.a1 * c, a.a2 + b.a2 * c);
    let mut y = s;
    let mut out = vec![y];
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f(add(y, k1, 0.5 * h));
        let k3 = f(add(y, k2, 0.5 * h));
        let k4 = f(add(y, k3, h));
        y = add(add(add(add(y, k1, h / 6.0), k2, h / 3.0), k3, h / 3.0), k4, h / 6.0);
        out.push(y);
    }
    out
}

#[test]
fn reduction_recovers_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let p = random_params(&mut rng);
        let rep = build_standard(&p).1.apply_change(&near_identity(&mut rng));
        let cert = reduce(&rep).unwrap();
        worst = worst.max(cert.params.max_diff(&p));
        assert!(cert.transport_residual < 1e-9 && cert.eigenvector_residual < 1e-9);
        let again = rep.apply_change(&cert.change);
        assert!((again.a - build_standard(&cert.params).1.a).amax() < 1e-9);
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn model_is_its_own_standard_form() {
    let cert = reduce(&CubicSystem::model().to_matrix_vector()).unwrap();
    assert!(cert.params.max_diff(&StandardFormParams::model()) < 1e-12);
    let (sys, _) = build_standard(&StandardFormParams::model());
    assert_eq!(sys, CubicSystem::model());
}

#[test]
fn reduction_needs_the_assumption() {
    let rep = CubicSystem::single(1.0).to_matrix_vector();
    assert!(matches!(reduce(&rep), Err(nlslab::Error::AssumptionFails(_))));
    assert!(StandardFormParams::new(0.5, 0.0, 0.0, 0.0, 0.0).validate().is_err());
    assert!(StandardFormParams::new(1.0, f64::NAN, 0.0, 0.0, 0.0).validate().is_err());
}

#[test]
fn standard_quartic_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let p = random_params(&mut rng);
        let (sys, _) = build_standard(&p);
        let q = standard_quartic(&p);
        let s0 = PairState::new(C64::new(0.4, -0.2), C64::new(0.1, 0.5));
        let path = rk4_path(&sys, s0, 1e-3, 3000);
        let q0 = q.eval(&s0);
        assert!(path.iter().all(|s| (q.eval(s) - q0).abs() < 1e-10 * q0));
        // coercive for every η₁
        assert!(q0 >= (1.0 - p.eta1.tanh().abs()) * 0.5 * s0.norm_sqr().powi(2) - 1e-15);
    }
}

#[test]
fn energy_like_density_is_conserved_by_constant_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let mut p = random_params(&mut rng);
        p.lambda0 = 0.0;
        let q = rng.gen_range(-1.0..1.0);
        p = p.with_potential(q * p.eta2, q, q * p.eta3);
        let e = energy_like_condition(&p).unwrap();
        let (sys, _) = build_standard(&p);
        let s0 = PairState::new(C64::new(0.3, 0.4), C64::new(-0.5, 0.1));
        let d0 = e.density(&s0);
        let path = rk4_path(&sys, s0, 1e-3, 3000);
        let drift = path.iter().map(|s| (e.density(s) - d0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10 * (1.0 + d0.abs()), "{drift}");
    }
    let p = StandardFormParams::new(1.0, 0.2, 0.1, 0.3, 0.5);
    assert!(energy_like_condition(&p).is_none());
    let p = StandardFormParams::new(1.0, 0.2, 0.1, 0.3, 0.0).with_potential(0.0, 1.0, 0.0);
    assert!(energy_like_condition(&p).is_none());
}
