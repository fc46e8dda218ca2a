//! Adaptive Gauss–Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// `(Kronrod estimate, |Kronrod − Gauss|, Kronrod estimate of ∫|f|)` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (fl, fr) = (f(c - x), f(c + x));
        let s = fl + fr;
        k += WGK[j] * s;
        abs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), (abs * h).abs())
}

/// Interval budget of [`integrate`].
pub const MAX_INTERVALS: usize = 4000;

/// `∫ₐᵇ f` to absolute tolerance `tol`, bisecting the interval with the
/// largest error estimate. Stops at the tolerance, at the rounding level of
/// `∫|f|`, or after [`MAX_INTERVALS`] intervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (v, err, abs) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, err, abs)];
    let (mut total_err, mut total_abs) = (err, abs);
    while total_err > tol && total_err > 50.0 * f64::EPSILON * total_abs && parts.len() < MAX_INTERVALS {
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, pv, pe, pa) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            // the interval no longer splits in floating point
            parts.push((lo, hi, pv, 0.0, pa));
            total_err -= pe;
            continue;
        }
        let (v1, e1, a1) = gk15(&f, lo, mid);
        let (v2, e2, a2) = gk15(&f, mid, hi);
        total_err += e1 + e2 - pe;
        total_abs += a1 + a2 - pa;
        parts.push((lo, mid, v1, e1, a1));
        parts.push((mid, hi, v2, e2, a2));
    }
    parts.iter().map(|p| p.2).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(integrate(f64::exp, 1.0, 1.0, 1e-12), 0.0);
        let v = integrate(f64::exp, 1.0, 0.0, 1e-13);
        assert!((v - (1.0 - std::f64::consts::E)).abs() < 1e-12);
    }
}
