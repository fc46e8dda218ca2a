use nlslab::classify::*;
use nlslab::{CubicSystem, LinearChange, Mat3, MatrixVectorRep, PairState, Vec3, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force maximum of `ac − b²` on the unit circle of a plane.
fn circle_max(u: Vec3, v: Vec3) -> f64 {
    let (u, v) = (u.normalize(), (v - u.normalize() * u.normalize().dot(&v)).normalize());
    (0..20000)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 20000.0;
            let w = u * t.cos() + v * t.sin();
            w[0] * w[2] - w[1] * w[1]
        })
        .fold(f64::MIN, f64::max)
}

/// Kernel of `𝒜² + k²I` from the general eigen-solver.
fn oracle_plane(a: &Mat3) -> Option<(f64, Vec3, Vec3)> {
    let ev = a.complex_eigenvalues();
    let z = ev.iter().find(|z| z.im > 1e-6 && z.re.abs() < 1e-9)?;
    let m = a * a + Mat3::identity() * (z.im * z.im);
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut idx = [0, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    Some((z.im, vt.row(idx[0]).transpose(), vt.row(idx[1]).transpose()))
}

/// `S · diag-block(rotation k, r) · S⁻¹`.
fn with_imaginary_pair(rng: &mut ChaCha8Rng) -> Mat3 {
    let k: f64 = rng.gen_range(0.3..3.0);
    let r: f64 = rng.gen_range(-2.0..2.0);
    let b = Mat3::new(0.0, -k, 0.0, k, 0.0, 0.0, 0.0, 0.0, r);
    loop {
        let s = Mat3::from_fn(|_, _| rng.gen_range(-1.5..1.5));
        if s.determinant().abs() > 0.3 {
            return s * b * s.try_inverse().unwrap();
        }
    }
}

#[test]
fn model_verdicts() {
    let r = classify(&CubicSystem::model(), 1);
    assert!(r.assumption.holds);
    assert!((r.assumption.k.unwrap() - 1.0).abs() < 1e-12);
    let g = Vec3::from(r.assumption.gamma.unwrap());
    assert!((g.normalize() - Vec3::new(1.0, 0.0, 1.0).normalize()).norm() < 1e-9);
    assert!(!r.s1 && !r.h0);
    assert_eq!(r.rank, 2);
    assert!(r.d0_probe.refuted());
    assert_eq!(r.family.holds(), Some(true));
    assert!(matches!(r.family, FamilyReport::Hyperbolic { .. }));
}

#[test]
fn zero_system_verdicts() {
    let r = classify(&CubicSystem::zero(), 1);
    assert!(!r.assumption.holds && r.assumption.k.is_none());
    assert!(r.s1 && r.h0);
    assert_eq!(r.rank, 0);
    assert!(!r.d0_probe.refuted());
}

#[test]
fn assumption_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [0usize; 2];
    for _ in 0..300 {
        let a = with_imaginary_pair(&mut rng);
        let (k, u, v) = oracle_plane(&a).unwrap();
        let best = circle_max(u, v);
        if best.abs() < 1e-4 {
            continue;
        }
        let rep = MatrixVectorRep::new(a, Vec3::zeros()).unwrap();
        let r = check_assumption(&rep);
        assert!((r.k.unwrap() - k).abs() < 1e-8);
        assert_eq!(r.holds, best > 0.0, "A = {a}");
        seen[r.holds as usize] += 1;
        if let Some((k, g)) = r.witness() {
            assert!((a * a * g + g * k * k).norm() < 1e-8 * (1.0 + a.norm().powi(2)));
            assert!(cone_value(&g) > 0.0);
        }
    }
    assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
}

#[test]
fn no_imaginary_pair() {
    let a = Mat3::from_diagonal(&Vec3::new(1.0, -2.0, 0.5));
    let r = check_assumption(&MatrixVectorRep::new(a, Vec3::zeros()).unwrap());
    assert!(!r.holds && r.k.is_none() && r.witness().is_none());
}

#[test]
fn normal_criterion_matches_plane_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let u = n.cross(&Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)));
        let v = n.cross(&u);
        let c = normal_criterion(&n);
        if c.abs() < 1e-6 {
            continue;
        }
        assert_eq!(subspace_meets_pplus(&[u, v]).unwrap().meets(), c > 0.0);
    }
}

#[test]
fn cone_test_edges() {
    assert!(subspace_meets_pplus(&[]).is_err());
    let e = Vec3::new(1.0, 0.0, 0.0);
    assert!(matches!(subspace_meets_pplus(&[e, e * 2.0]), Err(nlslab::Error::DegenerateBasis { .. })));
    assert_eq!(subspace_meets_pplus(&[e]).unwrap().verdict, ConeVerdict::Boundary);
    assert_eq!(subspace_meets_pplus(&[Vec3::new(1.0, 0.0, 1.0)]).unwrap().verdict, ConeVerdict::Meets);
    assert_eq!(subspace_meets_pplus(&[Vec3::y()]).unwrap().verdict, ConeVerdict::Misses);
    let all = subspace_meets_pplus(&[Vec3::x(), Vec3::y(), Vec3::z()]).unwrap();
    assert!(all.meets() && (all.max_value - 0.5).abs() < 1e-12);
}

#[test]
fn weak_null_gauge_condition() {
    // kernel spanned by (1, 0, 1) meets the cone, (0, 1, 0) does not
    let s = Mat3::new(1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
    let a = s * Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -1.0)) * s.try_inverse().unwrap();
    assert!(check_s1(&MatrixVectorRep::new(a, Vec3::zeros()).unwrap()));
    assert_eq!(matrix_rank(&a), 2);
    let s = Mat3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let a = s * Mat3::from_diagonal(&Vec3::new(0.0, 2.0, -1.0)) * s.try_inverse().unwrap();
    assert!(!check_s1(&MatrixVectorRep::new(a, Vec3::zeros()).unwrap()));
    // invariant under changes of unknowns
    let rep = MatrixVectorRep::new(a, Vec3::zeros()).unwrap();
    let ch = LinearChange::from_entries(1.0, 0.3, -0.2, 2.0).unwrap();
    assert_eq!(check_s1(&rep.apply_change(&ch)), check_s1(&rep));
}

#[test]
fn d0_probe_witnesses_are_genuine() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..50 {
        let l: [f64; 12] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let sys = CubicSystem::new(l).unwrap();
        let h = HermitianCandidate::new(2.0, 0.3, -0.4, 1.0);
        if let D0Verdict::RefutedWithWitness { state, value, .. } = check_d0_candidate(&sys, &h, 500, seed).unwrap() {
            let (f1, f2) = sys.eval_nonlinearity(state);
            let q = C64::new(0.3, -0.4);
            let direct = (state.a1.conj() * (f1 * 2.0 + f2 * q) + state.a2.conj() * (f1 * q.conj() + f2)).im;
            assert!(value > 0.0 && (direct - value).abs() < 1e-12 * (1.0 + value));
        }
    }
    let single = CubicSystem::single(1.0);
    let h = HermitianCandidate::new(1.0, 0.0, 0.0, 1.0);
    assert!(!check_d0_candidate(&single, &h, 100, 0).unwrap().refuted());
    let bad = HermitianCandidate::new(1.0, 2.0, 0.0, 1.0);
    assert!(matches!(check_d0_candidate(&single, &bad, 10, 0), Err(nlslab::Error::NotPositive)));
    let _ = PairState::zero();
}

#[test]
fn templates_agree_with_the_general_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    for _ in 0..400 {
        let a = match rng.gen_range(0..3) {
            0 => elliptic_template([0.0, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]),
            1 => {
                let s1 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                parabolic_template(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), s1, -s1)
            }
            _ => {
                let a11 = rng.gen_range(-0.9..0.9);
                let a23 = rng.gen_range(-2.0..2.0);
                hyperbolic_template(a11, -a23 + rng.gen_range(0.0..2.0), a23, -a11)
            }
        };
        let fam = classify_standard_family(&a);
        let Some(holds) = fam.holds() else { continue };
        let Some((_, u, v)) = oracle_plane(&a) else {
            assert!(!holds);
            continue;
        };
        let best = circle_max(u, v);
        if best.abs() < 1e-4 {
            continue;
        }
        assert_eq!(holds, best > 0.0, "{fam:?}");
        assert_eq!(holds, check_assumption(&MatrixVectorRep::new(a, Vec3::zeros()).unwrap()).holds);
        agree += 1;
    }
    assert!(agree > 200, "{agree}");
    // outside the normalization the template does not apply
    assert_eq!(classify_standard_family(&hyperbolic_template(0.0, -1.0, 0.5, 0.0)), FamilyReport::None);
}

#[test]
fn eigenvalues_match_general_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let a = Mat3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let mut mine: Vec<C64> = eigenvalues3(&a).to_vec();
        let mut theirs: Vec<C64> = a.complex_eigenvalues().iter().map(|z| C64::new(z.re, z.im)).collect();
        let key = |z: &C64| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e3).round() as i64;
        mine.sort_by_key(key);
        theirs.sort_by_key(key);
        for (x, y) in mine.iter().zip(&theirs) {
            assert!((x - y).norm() < 1e-7, "{a}");
        }
    }
}
