use nlslab::elliptic::*;

/// `(sn, cn, dn)` by integrating their differential system with small RK4 steps.
fn reference(u: f64, m: f64) -> (f64, f64, f64) {
    let f = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -m * y[0] * y[1]];
    let n = (u.abs() / 1e-3).ceil().max(1.0) as usize;
    let h = u / n as f64;
    let mut y = [0.0, 1.0, 1.0];
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
        let k3 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
        let k4 = f(std::array::from_fn(|i| y[i] + h * k3[i]));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    (y[0], y[1], y[2])
}

/// Composite Simpson rule with `n` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let s: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + s) * h / 3.0
}

#[test]
fn agrees_with_differential_system() {
    for m in [0.0, 0.1, 0.3, 0.5, 0.7, 0.95] {
        for u in [-7.3, -1.0, 0.25, 1.9, 4.4, 11.0] {
            let e = jacobi(u, m).unwrap();
            let (sn, cn, dn) = reference(u, m);
            assert!((e.sn - sn).abs() < 1e-10 && (e.cn - cn).abs() < 1e-10 && (e.dn - dn).abs() < 1e-10, "u {u} m {m}");
        }
    }
}

#[test]
fn complete_integral_against_quadrature() {
    for m in [0.0, 0.2, 0.5, 0.8, 0.99] {
        let q = simpson(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 20000);
        assert!((complete_k(m).unwrap() - q).abs() < 1e-11, "m {m}");
    }
}

#[test]
fn amplitude_inverts_incomplete_integral() {
    for m in [0.05, 0.5, 0.9] {
        for phi in [-5.0, -0.3, 0.0, 1.2, 3.5, 9.0] {
            let u = incomplete_f(phi, m).unwrap();
            assert!((amplitude(u, m).unwrap() - phi).abs() < 1e-12);
            let q = simpson(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, phi, 20000);
            assert!((u - q).abs() < 1e-10);
        }
    }
}

#[test]
fn identities_and_periods() {
    for m in [0.2, 0.5, 0.8] {
        let k = complete_k(m).unwrap();
        for u in [-2.0, 0.3, 1.7, 6.1] {
            let e = jacobi(u, m).unwrap();
            assert!((e.sn * e.sn + e.cn * e.cn - 1.0).abs() < 1e-14);
            assert!((e.dn * e.dn + m * e.sn * e.sn - 1.0).abs() < 1e-14);
            let p = jacobi(u + 4.0 * k, m).unwrap();
            assert!((p.sn - e.sn).abs() < 1e-12 && (p.cn - e.cn).abs() < 1e-12);
            let h = jacobi(u + 2.0 * k, m).unwrap();
            assert!((h.sn + e.sn).abs() < 1e-12 && (h.dn - e.dn).abs() < 1e-12);
            // d sn / du = cn dn
            let d = 1e-5;
            let fd = (jacobi(u + d, m).unwrap().sn - jacobi(u - d, m).unwrap().sn) / (2.0 * d);
            assert!((fd - e.cn * e.dn).abs() < 1e-9);
            assert!((e.cd() - e.cn / e.dn).abs() < 1e-15 && (e.sd() * e.dn - e.sn).abs() < 1e-15);
        }
    }
}

#[test]
fn parameter_range() {
    assert!(complete_k(1.0).is_err());
    assert!(complete_k(-0.5).is_err());
    assert!(jacobi(1.0, 1.5).is_err());
    assert!(amplitude(1.0, f64::NAN).is_err());
    assert!((agm(1.0, 2f64.sqrt().recip()) - 0.847_213_084_793_979).abs() < 1e-14);
}
