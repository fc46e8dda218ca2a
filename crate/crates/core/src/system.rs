//! Coefficient encoding of two-component cubic systems and its
//! matrix-vector representation.
//!
//! A system is given by twelve real coefficients `λ₁ … λ₁₂` multiplying the
//! gauge-invariant cubic monomials
//!
//! ```text
//! F₁ = λ₁|u₁|²u₁ + λ₂|u₁|²u₂ + λ₃u₁²ū₂ + λ₄|u₂|²u₁ + λ₅u₂²ū₁ + λ₆|u₂|²u₂
//! F₂ = λ₇|u₁|²u₁ + λ₈|u₁|²u₂ + λ₉u₁²ū₂ + λ₁₀|u₂|²u₁ + λ₁₁u₂²ū₁ + λ₁₂|u₂|²u₂
//! ```
//!
//! The same data is carried, bijectively, by a real 3×3 matrix `𝒜` and a
//! real 3-vector `𝒱`. The quadratic quantities `(ρ₁, ℛ, ρ₂)` of a state
//! evolve through `𝒜`, and real changes of the unknowns act on `(𝒜, 𝒱)` by
//! a twisted similarity.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat2 = Matrix2<f64>;

/// The twelve real coupling coefficients, stored in printed order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSystem {
    pub lambda: [f64; 12],
}

impl CubicSystem {
    pub fn new(lambda: [f64; 12]) -> Result<Self> {
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { lambda })
    }

    pub fn zero() -> Self {
        Self { lambda: [0.0; 12] }
    }

    /// `(i∂ₜ + ∂ₓ²)u₁ = |u₂|²u₂`, `(i∂ₜ + ∂ₓ²)u₂ = |u₁|²u₁`.
    pub fn model() -> Self {
        let mut lambda = [0.0; 12];
        lambda[5] = 1.0;
        lambda[6] = 1.0;
        Self { lambda }
    }

    /// The scalar equation `λ|u₁|²u₁` embedded as the first component.
    pub fn single(lambda1: f64) -> Self {
        let mut lambda = [0.0; 12];
        lambda[0] = lambda1;
        Self { lambda }
    }

    /// λ with 1-based index, as printed.
    #[inline]
    pub fn l(&self, i: usize) -> f64 {
        self.lambda[i - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(F₁, F₂)` at `(u₁, u₂)`.
    #[inline]
    pub fn nonlinearity(&self, u1: C64, u2: C64) -> (C64, C64) {
        let l = &self.lambda;
        let n1 = u1.norm_sqr();
        let n2 = u2.norm_sqr();
        let m112 = u1 * u1 * u2.conj();
        let m221 = u2 * u2 * u1.conj();
        let f1 = u1 * (l[0] * n1 + l[3] * n2) + u2 * (l[1] * n1 + l[5] * n2) + m112 * l[2] + m221 * l[4];
        let f2 = u1 * (l[6] * n1 + l[9] * n2) + u2 * (l[7] * n1 + l[11] * n2) + m112 * l[8] + m221 * l[10];
        (f1, f2)
    }

    pub fn eval_nonlinearity(&self, s: PairState) -> (C64, C64) {
        self.nonlinearity(s.a1, s.a2)
    }

    pub fn to_matrix_vector(&self) -> MatrixVectorRep {
        let l = |i| self.l(i);
        let a = Mat3::new(
            l(2) - l(3),
            -l(1) + l(8) - l(9),
            -l(7),
            l(5),
            -l(3) + l(11),
            -l(9),
            l(6),
            -l(4) + l(5) + l(12),
            -l(10) + l(11),
        );
        let v = Vec3::new(
            l(8) - 2.0 * l(9),
            0.5 * (-l(2) + 2.0 * l(3) - l(10) + 2.0 * l(11)),
            l(4) - 2.0 * l(5),
        );
        MatrixVectorRep { a, v }
    }

    pub fn from_matrix_vector(rep: &MatrixVectorRep) -> Self {
        rep.to_system()
    }
}

/// Real 3×3 matrix `𝒜` plus real 3-vector `𝒱`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixVectorRep {
    pub a: Mat3,
    pub v: Vec3,
}

impl MatrixVectorRep {
    pub fn new(a: Mat3, v: Vec3) -> Result<Self> {
        if a.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix-vector entry".into()));
        }
        Ok(Self { a, v })
    }

    pub fn from_matrix(a: Mat3) -> Self {
        Self { a, v: Vec3::zeros() }
    }

    /// Reads the coefficients back off the matrix-vector pair.
    pub fn to_system(&self) -> CubicSystem {
        let a = |i: usize, j: usize| self.a[(i - 1, j - 1)];
        let (q1, q2, q3) = (self.v[0], self.v[1], self.v[2]);
        let tr = self.a.trace();
        let lambda = [
            -(a(1, 2) + a(2, 3)) + q1,
            2.0 * a(1, 1) - 0.5 * tr + q2,
            a(1, 1) - 0.5 * tr + q2,
            2.0 * a(2, 1) + q3,
            a(2, 1),
            a(3, 1),
            -a(1, 3),
            -2.0 * a(2, 3) + q1,
            -a(2, 3),
            -2.0 * a(3, 3) + 0.5 * tr + q2,
            -a(3, 3) + 0.5 * tr + q2,
            a(2, 1) + a(3, 2) + q3,
        ];
        CubicSystem { lambda }
    }

    /// `(𝒜′, 𝒱′)` for the unknowns `v = ℳu`.
    pub fn apply_change(&self, ch: &LinearChange) -> MatrixVectorRep {
        let det = ch.det();
        let (d, dinv) = ch.dmat();
        MatrixVectorRep { a: d * self.a * dinv / det, v: d * self.v / det }
    }
}

#[derive(Serialize, Deserialize)]
struct RepJson {
    #[serde(rename = "A")]
    a: [[f64; 3]; 3],
    #[serde(rename = "V")]
    v: [f64; 3],
}

impl Serialize for MatrixVectorRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.a[(i, j)];
            }
        }
        RepJson { a, v: [self.v[0], self.v[1], self.v[2]] }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixVectorRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RepJson::deserialize(d)?;
        let a = Mat3::from_fn(|i, k| j.a[i][k]);
        Ok(MatrixVectorRep { a, v: Vec3::from(j.v) })
    }
}

/// Ordered pair of complex amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PairState {
    pub a1: C64,
    pub a2: C64,
}

impl PairState {
    pub fn new(a1: C64, a2: C64) -> Self {
        Self { a1, a2 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { a1: self.a1 * s, a2: self.a2 * s }
    }

    pub fn quad(&self) -> QuadVector {
        let z = self.a1.conj() * self.a2;
        QuadVector { rho1: self.a1.norm_sqr(), r: 2.0 * z.re, rho2: self.a2.norm_sqr(), i: 2.0 * z.im }
    }

    /// `ℳ (A₁, A₂)ᵀ`.
    pub fn transform(&self, m: &Mat2) -> Self {
        Self {
            a1: self.a1 * m[(0, 0)] + self.a2 * m[(0, 1)],
            a2: self.a1 * m[(1, 0)] + self.a2 * m[(1, 1)],
        }
    }
}

/// `(ρ₁, ℛ, ρ₂, ℐ)` of a pair state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadVector {
    pub rho1: f64,
    pub r: f64,
    pub rho2: f64,
    pub i: f64,
}

impl QuadVector {
    /// The row `(ρ₁, ℛ, ρ₂)`.
    pub fn row(&self) -> Vec3 {
        Vec3::new(self.rho1, self.r, self.rho2)
    }

    /// `ℛ² + ℐ² − 4ρ₁ρ₂`, zero for states derived from a pair.
    pub fn constraint_defect(&self) -> f64 {
        self.r * self.r + self.i * self.i - 4.0 * self.rho1 * self.rho2
    }
}

/// Invertible real change of unknowns `v = ℳu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearChange {
    pub m: Mat2,
}

impl LinearChange {
    pub fn new(m: Mat2) -> Result<Self> {
        let det = m.determinant();
        let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if !det.is_finite() || det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
            return Err(Error::SingularChange { det });
        }
        Ok(Self { m })
    }

    pub fn from_entries(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(Mat2::new(a, b, c, d))
    }

    pub fn identity() -> Self {
        Self { m: Mat2::identity() }
    }

    pub fn swap() -> Self {
        Self { m: Mat2::new(0.0, 1.0, 1.0, 0.0) }
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Change obtained by applying `self` first and then `outer`.
    pub fn then(&self, outer: &LinearChange) -> LinearChange {
        LinearChange { m: outer.m * self.m }
    }

    pub fn inverse(&self) -> LinearChange {
        let det = self.det();
        let m = &self.m;
        LinearChange { m: Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det }
    }

    /// `(𝒟(ℳ), 𝒟(ℳ)⁻¹)`, both of unit determinant.
    pub fn dmat(&self) -> (Mat3, Mat3) {
        let (a, b, c, d) = (self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]);
        let det = self.det();
        let dm = Mat3::new(
            d * d,
            -2.0 * c * d,
            c * c,
            -b * d,
            a * d + b * c,
            -a * c,
            b * b,
            -2.0 * a * b,
            a * a,
        ) / det;
        let dinv = Mat3::new(
            a * a,
            2.0 * a * c,
            c * c,
            a * b,
            a * d + b * c,
            c * d,
            b * b,
            2.0 * b * d,
            d * d,
        ) / det;
        (dm, dinv)
    }
}

pub fn dmat(ch: &LinearChange) -> (Mat3, Mat3) {
    ch.dmat()
}

pub fn apply_change(rep: &MatrixVectorRep, ch: &LinearChange) -> MatrixVectorRep {
    rep.apply_change(ch)
}

/// The symmetric matrix `ℬ` measuring the failure of a skew Hermitian
/// weight `[[0, i], [−i, 0]]` to annihilate the nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeObstruction {
    pub b: Mat3,
}

impl GaugeObstruction {
    /// `ℬ` from the matrix part alone.
    pub fn from_matrix(a: &Mat3) -> Self {
        let a = |i: usize, j: usize| a[(i - 1, j - 1)];
        let b12 = -a(1, 2) + 2.0 * a(2, 3);
        let b13 = 2.0 * a(1, 1) + 2.0 * a(3, 3);
        let b23 = -a(3, 2) + 2.0 * a(2, 1);
        GaugeObstruction {
            b: Mat3::new(4.0 * a(1, 3), b12, b13, b12, -2.0 * a(2, 2), b23, b13, b23, 4.0 * a(3, 1)),
        }
    }

    /// `ℬ` written directly in the coefficients; a cross-check of
    /// [`GaugeObstruction::from_matrix`].
    pub fn from_coefficients(sys: &CubicSystem) -> Self {
        let l = |i| sys.l(i);
        let b12 = l(1) - l(8) - l(9);
        let b13 = 2.0 * (l(2) - l(3) - l(10) + l(11));
        let b23 = l(4) + l(5) - l(12);
        GaugeObstruction {
            b: Mat3::new(-4.0 * l(7), b12, b13, b12, 2.0 * (l(3) - l(11)), b23, b13, b23, 4.0 * l(6)),
        }
    }

    /// `½ ρᵀℬρ` at the quadratic row of `s`.
    pub fn form(&self, s: &PairState) -> f64 {
        let row = s.quad().row();
        0.5 * row.dot(&(self.b * row))
    }
}

pub fn gauge_obstruction(sys: &CubicSystem) -> GaugeObstruction {
    GaugeObstruction::from_matrix(&sys.to_matrix_vector().a)
}

/// `2 Im([Ā₁ Ā₂] H [F₁; F₂])` for a real symmetric weight `H = [[a, b], [b, c]]`.
///
/// This is the time derivative of `aρ₁ + bℛ + cρ₂` along the ODE flow.
pub fn weighted_flux(sys: &CubicSystem, s: &PairState, h: &Vec3) -> f64 {
    let (f1, f2) = sys.eval_nonlinearity(*s);
    let w1 = f1 * h[0] + f2 * h[1];
    let w2 = f1 * h[1] + f2 * h[2];
    2.0 * (s.a1.conj() * w1 + s.a2.conj() * w2).im
}

/// `−2 Im([Ā₁ Ā₂] [[0, i], [−i, 0]] [F₁; F₂])`.
pub fn skew_flux(sys: &CubicSystem, s: &PairState) -> f64 {
    let (f1, f2) = sys.eval_nonlinearity(*s);
    let i = C64::i();
    -2.0 * (s.a1.conj() * i * f2 - s.a2.conj() * i * f1).im
}

/// Residual of the quadratic identity `2 Im(Ā H F) = ℐ (ρ₁, ℛ, ρ₂) 𝒜 h`.
pub fn quad_identity_residual(sys: &CubicSystem, s: &PairState, h: &Vec3) -> f64 {
    let a = sys.to_matrix_vector().a;
    let q = s.quad();
    let rhs = q.i * q.row().dot(&(a * h));
    (weighted_flux(sys, s, h) - rhs).abs()
}

/// Residual of the skew identity `−2 Im(Ā [[0,i],[−i,0]] F) = ½ ρᵀℬρ`.
pub fn skew_identity_residual(sys: &CubicSystem, s: &PairState) -> f64 {
    (skew_flux(sys, s) - gauge_obstruction(sys).form(s)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn model_representation() {
        let rep = CubicSystem::model().to_matrix_vector();
        let expected = Mat3::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert_eq!(rep.a, expected);
        assert_eq!(rep.v, Vec3::zeros());
        assert_eq!(rep.to_system(), CubicSystem::model());
    }

    #[test]
    fn zero_system_is_zero_rep() {
        let rep = CubicSystem::zero().to_matrix_vector();
        assert_eq!(rep.a, Mat3::zeros());
        assert_eq!(rep.v, Vec3::zeros());
        assert!(MatrixVectorRep::from_matrix(Mat3::zeros()).to_system().is_zero());
    }

    #[test]
    fn model_nonlinearity_values() {
        let m = CubicSystem::model();
        assert_eq!(m.nonlinearity(c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.0), c(0.0, 0.0)));
        let (f1, f2) = m.nonlinearity(c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!((f1, f2), (c(0.0, 1.0), c(1.0, 0.0)));
        assert_eq!(m.nonlinearity(C64::default(), C64::default()), (C64::default(), C64::default()));
    }

    #[test]
    fn rejects_non_finite() {
        let mut l = [0.0; 12];
        l[3] = f64::NAN;
        assert!(CubicSystem::new(l).is_err());
        assert!(LinearChange::from_entries(1.0, 2.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn identity_and_swap_dmat() {
        let (d, di) = LinearChange::identity().dmat();
        assert_eq!(d, Mat3::identity());
        assert_eq!(di, Mat3::identity());
        // swap: det = −1, 𝒟 = −[[0,0,1],[0,−1,0],[1,0,0]]... plugged in directly:
        let (d, di) = LinearChange::swap().dmat();
        let expected = Mat3::new(0.0, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0);
        assert_eq!(d, expected);
        assert_eq!(di, expected);
        // (a, b, c) ↦ −(c, b, a)
        assert_eq!(d * Vec3::new(1.0, 2.0, 3.0), Vec3::new(-3.0, -2.0, -1.0));
    }

    #[test]
    fn model_gauge_obstruction() {
        let b = gauge_obstruction(&CubicSystem::model()).b;
        let expected = Mat3::new(-4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0);
        assert_eq!(b, expected);
        assert_eq!(GaugeObstruction::from_coefficients(&CubicSystem::model()).b, expected);
        assert_eq!(gauge_obstruction(&CubicSystem::zero()).b, Mat3::zeros());
    }

    #[test]
    fn model_quad_identity_at_one_i() {
        let s = PairState::new(c(1.0, 0.0), c(0.0, 1.0));
        let r = quad_identity_residual(&CubicSystem::model(), &s, &Vec3::new(1.0, 0.0, 1.0));
        assert!(r <= 1e-14, "{r}");
        assert_eq!(quad_identity_residual(&CubicSystem::model(), &PairState::zero(), &Vec3::new(1.0, 2.0, 3.0)), 0.0);
    }

    #[test]
    fn dilation_keeps_model_spectrum() {
        // ℳ = diag(r, 1/r): 𝒜′² keeps eigenvalues {−1, −1, 0}.
        let rep = CubicSystem::model().to_matrix_vector();
        let ch = LinearChange::from_entries(2.5, 0.0, 0.0, 0.4).unwrap();
        let a2 = rep.apply_change(&ch).a;
        let sq = a2 * a2;
        assert!((sq.trace() + 2.0).abs() < 1e-12);
        assert!(sq.determinant().abs() < 1e-12);
        let minors = sq[(0, 0)] * sq[(1, 1)] - sq[(0, 1)] * sq[(1, 0)] + sq[(0, 0)] * sq[(2, 2)]
            - sq[(0, 2)] * sq[(2, 0)]
            + sq[(1, 1)] * sq[(2, 2)]
            - sq[(1, 2)] * sq[(2, 1)];
        assert!((minors - 1.0).abs() < 1e-12);
    }
}
