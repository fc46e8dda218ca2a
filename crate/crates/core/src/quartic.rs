//! The quartic conserved quantity of the limit ODE system.
//!
//! For `Γ` in the eigenplane `W(−k², 𝒜²)` and `Γ̃ = k⁻¹𝒜Γ`,
//! `𝒬 = (ρ·Γ)² + (ρ·Γ̃)²` with `ρ = (ρ₁, ℛ, ρ₂)` is conserved by
//! `i dAⱼ/dτ = Fⱼ(A₁, A₂)`.

use serde::Serialize;

use crate::classify::{self, ConeVerdict};
use crate::error::{Error, Result};
use crate::system::{LinearChange, Mat2, Mat3, MatrixVectorRep, PairState, Vec3, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuarticInvariant {
    pub k: f64,
    #[serde(rename = "Gamma")]
    pub gamma: [f64; 3],
    #[serde(rename = "GammaTilde")]
    pub gamma_tilde: [f64; 3],
}

impl QuarticInvariant {
    /// `𝒬` for an arbitrary nonzero `Γ` in the eigenplane.
    pub fn from_gamma(a: &Mat3, k: f64, gamma: Vec3) -> Self {
        let gt = a * gamma / k;
        Self { k, gamma: gamma.into(), gamma_tilde: gt.into() }
    }

    pub fn gamma(&self) -> Vec3 {
        Vec3::from(self.gamma)
    }

    pub fn gamma_tilde(&self) -> Vec3 {
        Vec3::from(self.gamma_tilde)
    }

    /// `(ρ·Γ, ρ·Γ̃)` at `s`.
    pub fn rows(&self, s: &PairState) -> (f64, f64) {
        let row = s.quad().row();
        (row.dot(&self.gamma()), row.dot(&self.gamma_tilde()))
    }

    pub fn eval(&self, s: &PairState) -> f64 {
        let (x, y) = self.rows(s);
        x * x + y * y
    }

    /// `max(‖𝒜Γ − kΓ̃‖, ‖𝒜Γ̃ + kΓ‖)`, relative to `|Γ|`.
    pub fn structure_residual(&self, a: &Mat3) -> f64 {
        let g = self.gamma();
        let gt = self.gamma_tilde();
        let r1 = (a * g - gt * self.k).norm();
        let r2 = (a * gt + g * self.k).norm();
        r1.max(r2) / g.norm()
    }
}

/// Builds `𝒬` with the witness `Γ` from the assumption check, rescaled to
/// `γ₁γ₃ − γ₂² = 1`.
pub fn build_quartic(rep: &MatrixVectorRep) -> Result<QuarticInvariant> {
    let report = classify::check_assumption(rep);
    let (k, g) = report.witness().ok_or_else(|| {
        let why = match report.k {
            None => "no pure-imaginary eigenvalue pair".to_string(),
            Some(k) if report.boundary => format!("eigenplane for k = {k} touches the cone boundary only"),
            Some(k) => format!("eigenplane for k = {k} misses the positive cone"),
        };
        Error::AssumptionFails(why)
    })?;
    let g = g / classify::cone_value(&g).sqrt();
    Ok(QuarticInvariant::from_gamma(&rep.a, k, g))
}

pub fn eval_quartic(q: &QuarticInvariant, s: &PairState) -> f64 {
    q.eval(s)
}

/// `𝒬` on the unit sphere, in the coordinates `ρ₁ = (1+x)/2`,
/// `ρ₂ = (1−x)/2`, `ℛ = y`, `x² + y² ≤ 1`.
fn on_disk(q: &QuarticInvariant, x: f64, y: f64) -> f64 {
    let row = Vec3::new(0.5 * (1.0 + x), y, 0.5 * (1.0 - x));
    let a = row.dot(&q.gamma());
    let b = row.dot(&q.gamma_tilde());
    a * a + b * b
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Extremes of `f` on the circle, by a 2001-point scan and golden-section
/// refinement around the best sample.
fn circle_extreme<F: Fn(f64) -> f64>(f: F, maximize: bool) -> f64 {
    const N: usize = 2001;
    let sgn = if maximize { -1.0 } else { 1.0 };
    let g = |t: f64| sgn * f(t);
    let h = std::f64::consts::TAU / (N - 1) as f64;
    let best = (0..N).map(|i| i as f64 * h).min_by(|&a, &b| g(a).total_cmp(&g(b))).unwrap();
    let (_, v) = golden_section(g, best - h, best + h, 1e-12);
    sgn * v.min(g(best))
}

/// `(min, max)` of `𝒬` over `|A₁|² + |A₂|² = 1`.
pub fn coercivity_bounds(q: &QuarticInvariant) -> (f64, f64) {
    let f = |t: f64| on_disk(q, t.cos(), t.sin());
    let hi = circle_extreme(f, true);
    let mut lo = circle_extreme(f, false);
    // 𝒬 is a sum of two squares of affine functions of (x, y); the
    // unconstrained minimizer solves a 2×2 linear system.
    let (g, gt) = (q.gamma(), q.gamma_tilde());
    let m = Mat2::new(0.5 * (g[0] - g[2]), g[1], 0.5 * (gt[0] - gt[2]), gt[1]);
    let c = nalgebra::Vector2::new(0.5 * (g[0] + g[2]), 0.5 * (gt[0] + gt[2]));
    if let Some(z) = m.svd(true, true).solve(&(-c), 1e-14).ok() {
        if z.norm() <= 1.0 {
            lo = lo.min(on_disk(q, z[0], z[1]));
        }
    }
    (lo.max(0.0), hi)
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn swap_state(s: PairState) -> PairState {
    PairState::new(s.a2, s.a1)
}

/// Reverses the roles of `A₁` and `A₂` in a `Γ`-vector.
fn swap_gamma(g: Vec3) -> Vec3 {
    Vec3::new(g[2], g[1], g[0])
}

/// Subcase with `Γ` on the cone boundary, `γ₁ > 0`.
fn zero_on_boundary(g: Vec3) -> Result<PairState> {
    let m = LinearChange::new(Mat2::new(g[0].sqrt(), sgn(g[1]) * g[2].max(0.0).sqrt(), 0.0, 1.0 / g[0].sqrt()))?;
    Ok(PairState::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).transform(&m.inverse().m))
}

/// Subcase with `W` strictly outside the closed cone, `γ₁ > 0`.
fn zero_off_cone(rep: &MatrixVectorRep, g: Vec3) -> Result<PairState> {
    let d = (g[1] * g[1] - g[0] * g[2]).max(0.0).sqrt();
    let s = sgn(g[1]);
    let ch = LinearChange::new(Mat2::new(g[0], g[1] - s * d, g[0], g[1] + s * d))?;
    let gt = rep.apply_change(&ch).a * Vec3::y();
    let b = PairState::new(C64::new(gt[2].abs().sqrt(), 0.0), C64::new(0.0, gt[0].abs().sqrt()));
    Ok(b.transform(&ch.inverse().m))
}

fn swapped_rep(rep: &MatrixVectorRep) -> MatrixVectorRep {
    rep.apply_change(&LinearChange::swap())
}

/// A nonzero state with `𝒬 = 0`, for systems whose eigenplane
/// `W(−k², 𝒜²)` misses the open cone `𝒫₊`.
pub fn nontrivial_zero(rep: &MatrixVectorRep, k: f64) -> Result<PairState> {
    let m = rep.a * rep.a + Mat3::identity() * (k * k);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let scale = 1.0 + rep.a.norm().powi(2);
    if svd.singular_values[idx[1]] > 1e-8 * scale {
        return Err(Error::PreconditionViolated(format!("−{}² is not a double eigenvalue of 𝒜²", k)));
    }
    let plane = [vt.row(idx[0]).transpose(), vt.row(idx[1]).transpose()];
    let test = classify::subspace_meets_pplus(&plane)?;
    let g = test.maximizer;
    match test.verdict {
        ConeVerdict::Meets => Err(Error::PreconditionViolated("eigenplane meets the positive cone".into())),
        ConeVerdict::Boundary => {
            // γ₁γ₃ = γ₂² ≥ 0 and the first nonzero entry is positive.
            if g[0] >= g[2] {
                zero_on_boundary(g)
            } else {
                zero_on_boundary(swap_gamma(g)).map(swap_state)
            }
        }
        ConeVerdict::Misses => {
            if g[0].abs().max(g[2].abs()) <= 1e-14 {
                let gt = rep.a * Vec3::y();
                return Ok(PairState::new(C64::new(gt[2].abs().sqrt(), 0.0), C64::new(0.0, gt[0].abs().sqrt())));
            }
            if g[0].abs() >= g[2].abs() {
                zero_off_cone(rep, g * sgn(g[0]))
            } else {
                let g = swap_gamma(g);
                zero_off_cone(&swapped_rep(rep), g * sgn(g[0])).map(swap_state)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::CubicSystem;

    fn model_q() -> QuarticInvariant {
        build_quartic(&CubicSystem::model().to_matrix_vector()).unwrap()
    }

    #[test]
    fn model_quartic_vectors() {
        let q = model_q();
        assert!((q.gamma() - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((q.gamma_tilde() - Vec3::new(-1.0, 0.0, 1.0)).norm() < 1e-12);
        assert!(q.structure_residual(&CubicSystem::model().to_matrix_vector().a) < 1e-12);
    }

    #[test]
    fn model_quartic_values() {
        let q = model_q();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(q.eval(&PairState::zero()), 0.0);
        assert!((q.eval(&PairState::new(one, zero)) - 2.0).abs() < 1e-12);
        assert!((q.eval(&PairState::new(one, one)) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn model_coercivity() {
        let (lo, hi) = coercivity_bounds(&model_q());
        assert!((lo - 1.0).abs() < 1e-9, "{lo}");
        assert!((hi - 2.0).abs() < 1e-9, "{hi}");
    }

    #[test]
    fn zero_rep_fails() {
        assert!(matches!(
            build_quartic(&MatrixVectorRep::from_matrix(Mat3::zeros())),
            Err(Error::AssumptionFails(_))
        ));
    }

    #[test]
    fn nontrivial_zero_rejects_model() {
        let rep = CubicSystem::model().to_matrix_vector();
        assert!(matches!(nontrivial_zero(&rep, 1.0), Err(Error::PreconditionViolated(_))));
    }
}
