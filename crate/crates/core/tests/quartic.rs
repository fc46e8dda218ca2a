use nlslab::classify::{cone_value, hyperbolic_template};
use nlslab::quartic::*;
use nlslab::{CubicSystem, LinearChange, Mat3, MatrixVectorRep, PairState, Vec3, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rk4(sys: &CubicSystem, s: PairState, h: f64, n: usize) -> Vec<PairState> {
    let f = |s: PairState| {
        let (f1, f2) = sys.eval_nonlinearity(s);
        PairState::new(-C64::i() * f1, -C64::i() * f2)
    };
    let add = |a: PairState, b: PairState, c: f64| PairState::new(a.a1 + b.a1 * c, a.a2 + b.a2 * c);
    let mut out = vec![s];
    let mut y = s;
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

fn random_state(rng: &mut ChaCha8Rng) -> PairState {
    PairState::new(
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    )
}

#[test]
fn model_invariant_and_bounds() {
    let q = build_quartic(&CubicSystem::model().to_matrix_vector()).unwrap();
    assert!((q.gamma() - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-12);
    assert!((q.gamma_tilde() - Vec3::new(-1.0, 0.0, 1.0)).norm() < 1e-12);
    let (lo, hi) = coercivity_bounds(&q);
    assert!((lo - 1.0).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let s = random_state(&mut rng);
        let (r1, r2) = (s.a1.norm_sqr(), s.a2.norm_sqr());
        assert!((eval_quartic(&q, &s) - 2.0 * (r1 * r1 + r2 * r2)).abs() < 1e-12);
    }
}

#[test]
fn conserved_along_reference_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = CubicSystem::model().to_matrix_vector();
    for _ in 0..10 {
        let ch = loop {
            let m: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
            if let Ok(c) = LinearChange::from_entries(m[0], m[1], m[2], m[3]) {
                if c.det().abs() > 0.4 {
                    break c;
                }
            }
        };
        let rep = MatrixVectorRep { v: Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)), ..model.apply_change(&ch) };
        let sys = rep.to_system();
        let q = build_quartic(&rep).unwrap();
        assert!(q.structure_residual(&rep.a) < 1e-10);
        assert!((cone_value(&q.gamma()) - 1.0).abs() < 1e-12);
        let s0 = random_state(&mut rng).scale(0.5);
        let path = rk4(&sys, s0, 1e-3, 5000);
        let q0 = q.eval(&s0);
        let drift = path.iter().map(|s| (q.eval(s) - q0).abs()).fold(0.0, f64::max) / q0;
        assert!(drift < 1e-9, "drift {drift}");
        let (lo, hi) = coercivity_bounds(&q);
        for s in &path[..50] {
            let n2 = s.norm_sqr().powi(2);
            assert!(q.eval(s) >= lo * n2 * (1.0 - 1e-9) && q.eval(s) <= hi * n2 * (1.0 + 1e-9));
        }
    }
}

#[test]
fn failing_assumption_is_reported() {
    let rep = CubicSystem::single(1.0).to_matrix_vector();
    assert!(matches!(build_quartic(&rep), Err(nlslab::Error::AssumptionFails(_))));
}

/// `ρ` of a zero state is orthogonal to the whole eigenplane.
fn check_zero(a: Mat3, k: f64) {
    let rep = MatrixVectorRep::new(a, Vec3::zeros()).unwrap();
    let s = nontrivial_zero(&rep, k).unwrap();
    assert!(s.norm_sqr() > 1e-6);
    let m = a * a + Mat3::identity() * (k * k);
    let row = s.quad().row() / s.norm_sqr();
    // ρ ⊥ Ker(𝒜² + k²) ⇔ ρ ∈ Range((𝒜² + k²)ᵀ)
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    for i in 0..3 {
        if svd.singular_values[i] < 1e-8 {
            assert!(row.dot(&vt.row(i).transpose()).abs() < 1e-9, "{a}");
        }
    }
}

#[test]
fn zero_when_plane_touches_the_cone() {
    // 1 + 4 a₂₁ a₂₃ = 0
    check_zero(hyperbolic_template(0.0, 1.0, -0.25, 0.0), 1.0);
    check_zero(hyperbolic_template(0.0, 0.5, -0.5, 0.0), 1.0);
}

#[test]
fn zero_when_plane_misses_the_cone() {
    check_zero(hyperbolic_template(0.0, 1.0, -1.0, 0.0), 1.0);
    check_zero(hyperbolic_template(0.5, 2.0, -1.5, -0.5), 0.75f64.sqrt());
    let ch = LinearChange::from_entries(0.3, 1.0, 2.0, -0.5).unwrap();
    let rep = MatrixVectorRep::new(hyperbolic_template(0.0, 1.0, -1.0, 0.0), Vec3::zeros()).unwrap().apply_change(&ch);
    let k = nlslab::classify::eigen3(&rep.a).k.unwrap();
    assert!((k - 1.0 / ch.det().abs()).abs() < 1e-10);
    check_zero(rep.a, k);
}

#[test]
fn zero_requires_missing_plane() {
    let rep = CubicSystem::model().to_matrix_vector();
    assert!(matches!(nontrivial_zero(&rep, 1.0), Err(nlslab::Error::PreconditionViolated(_))));
    assert!(nontrivial_zero(&rep, 2.0).is_err());
}
