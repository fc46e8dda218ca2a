//! Jacobi elliptic functions and the complete elliptic integral of the first
//! kind. `m` is the parameter (the square of the modulus).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EllipticEval {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl EllipticEval {
    pub fn cd(&self) -> f64 {
        self.cn / self.dn
    }

    pub fn sd(&self) -> f64 {
        self.sn / self.dn
    }

    pub fn nd(&self) -> f64 {
        1.0 / self.dn
    }
}

fn check_m(m: f64) -> Result<()> {
    if (0.0..1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::ModulusOutOfRange(m))
    }
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// `K(m) = ∫₀^{π/2} (1 − m sin²θ)^{−1/2} dθ`.
pub fn complete_k(m: f64) -> Result<f64> {
    check_m(m)?;
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, (1.0 - m).sqrt()))
}

/// Amplitude on `[−2K, 2K]` by descending Landen transformation.
fn am_reduced(u: f64, m: f64) -> f64 {
    if m == 0.0 {
        return u;
    }
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-16 && a.len() < 40 {
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = (2f64).powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    phi
}

/// Continuous amplitude `am(u | m)`, with `am(u + 2K) = am(u) + π`.
pub fn amplitude(u: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    let k4 = 4.0 * complete_k(m)?;
    let turns = (u / k4).round();
    Ok(am_reduced(u - turns * k4, m) + turns * std::f64::consts::TAU)
}

/// Incomplete integral `F(φ | m) = ∫₀^φ (1 − m sin²θ)^{−1/2} dθ`, the inverse
/// of [`amplitude`].
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    let k = complete_k(m)?;
    let turns = (phi / std::f64::consts::PI).round();
    let rest = phi - turns * std::f64::consts::PI;
    let part = crate::quadrature::integrate(|t| (1.0 - m * t.sin().powi(2)).sqrt().recip(), 0.0, rest, 1e-15);
    Ok(2.0 * turns * k + part)
}

/// `(sn, cn, dn)(u | m)`.
pub fn jacobi(u: f64, m: f64) -> Result<EllipticEval> {
    let phi = amplitude(u, m)?;
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    Ok(EllipticEval { sn, cn, dn })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_circular_limit() {
        for m in [0.0, 0.3, 0.9] {
            let e = jacobi(0.0, m).unwrap();
            assert_eq!((e.sn, e.cn, e.dn), (0.0, 1.0, 1.0));
        }
        for u in [-3.0, 0.4, 7.5] {
            let e = jacobi(u, 0.0).unwrap();
            assert!((e.sn - f64::sin(u)).abs() < 1e-15);
            assert!((e.cn - f64::cos(u)).abs() < 1e-15);
            assert_eq!(e.dn, 1.0);
        }
    }

    #[test]
    fn quarter_period() {
        let k = complete_k(0.5).unwrap();
        let e = jacobi(k, 0.5).unwrap();
        assert!((e.sn - 1.0).abs() < 1e-13);
        assert!(e.cn.abs() < 1e-7);
        assert!((e.dn - 0.5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn k_values() {
        assert_eq!(complete_k(0.0).unwrap(), std::f64::consts::FRAC_PI_2);
        assert!((complete_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
        assert!(complete_k(0.25).unwrap() < complete_k(0.5).unwrap());
        assert!(complete_k(0.5).unwrap() < complete_k(0.75).unwrap());
        assert!(matches!(complete_k(1.0), Err(Error::ModulusOutOfRange(_))));
        assert!(jacobi(0.1, -0.1).is_err());
    }
}
