//! Standard forms of systems whose eigenplane meets the positive cone, and
//! the constructive reduction to them.

use serde::{Deserialize, Serialize};

use crate::classify;
use crate::error::{Error, Result};
use crate::system::{CubicSystem, LinearChange, Mat2, Mat3, MatrixVectorRep, PairState, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardFormParams {
    /// `±1`.
    pub sigma: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub lambda0: f64,
    #[serde(default)]
    pub q1: f64,
    #[serde(default)]
    pub q2: f64,
    #[serde(default)]
    pub q3: f64,
}

impl StandardFormParams {
    pub fn new(sigma: f64, eta1: f64, eta2: f64, eta3: f64, lambda0: f64) -> Self {
        Self { sigma, eta1, eta2, eta3, lambda0, q1: 0.0, q2: 0.0, q3: 0.0 }
    }

    pub fn model() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn with_potential(mut self, q1: f64, q2: f64, q3: f64) -> Self {
        self.q1 = q1;
        self.q2 = q2;
        self.q3 = q3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma != 1.0 && self.sigma != -1.0 {
            return Err(Error::InvalidInput(format!("sigma must be ±1, got {}", self.sigma)));
        }
        let all = [self.eta1, self.eta2, self.eta3, self.lambda0, self.q1, self.q2, self.q3];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite standard-form parameter".into()));
        }
        Ok(())
    }

    /// Largest componentwise difference, σ included.
    pub fn max_diff(&self, o: &Self) -> f64 {
        [
            self.sigma - o.sigma,
            self.eta1 - o.eta1,
            self.eta2 - o.eta2,
            self.eta3 - o.eta3,
            self.lambda0 - o.lambda0,
            self.q1 - o.q1,
            self.q2 - o.q2,
            self.q3 - o.q3,
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

pub fn standard_matrix(p: &StandardFormParams) -> Mat3 {
    let (sh, ch) = (p.eta1.sinh(), p.eta1.cosh());
    let (s, e2, e3, l0) = (p.sigma, p.eta2, p.eta3, p.lambda0);
    Mat3::new(
        sh,
        -e2 * sh + s * e3 * ch + e2 * l0,
        -s * ch,
        0.0,
        l0,
        0.0,
        s * ch,
        -s * e2 * ch + e3 * sh + e3 * l0,
        -sh,
    )
}

/// The standard-form system and its matrix-vector representation.
pub fn build_standard(p: &StandardFormParams) -> (CubicSystem, MatrixVectorRep) {
    let rep = MatrixVectorRep { a: standard_matrix(p), v: Vec3::new(p.q1, p.q2, p.q3) };
    (rep.to_system(), rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionStep {
    pub name: &'static str,
    pub matrix: [[f64; 2]; 2],
}

fn rows(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionCertificate {
    pub steps: Vec<ReductionStep>,
    pub composite: [[f64; 2]; 2],
    pub params: StandardFormParams,
    /// `max |apply_change(rep, ℳ) − build_standard(params)|` over 𝒜 and 𝒱.
    pub transport_residual: f64,
    /// `‖(𝒜₃ − λ₀)(η₂, 1, η₃)‖`.
    pub eigenvector_residual: f64,
    #[serde(skip)]
    pub change: LinearChange,
}

/// Real root of `v₁ + v₂β + v₃β² = 0`, the one of smaller modulus when
/// there are two.
fn shear_root(v: &Vec3) -> Option<f64> {
    let (c, b, a) = (v[0], v[1], v[2]);
    let scale = v.norm();
    if a.abs() <= 1e-12 * scale {
        return (b.abs() > 1e-12 * scale).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    Some(if r1.abs() <= r2.abs() { r1 } else { r2 })
}

/// Runs the reduction: scaling by `√k`, an optional swap, a shear that
/// puts `e₁` into the eigenplane, a triangular normalization, and the
/// read-off of the real eigenvector.
pub fn reduce(rep: &MatrixVectorRep) -> Result<ReductionCertificate> {
    let report = classify::check_assumption(rep);
    let (k, _) = report
        .witness()
        .ok_or_else(|| Error::AssumptionFails("no eigenplane meeting the positive cone".into()))?;
    let mut steps = Vec::new();
    let s = k.sqrt();
    let m1 = LinearChange::new(Mat2::new(s, 0.0, 0.0, s))?;
    steps.push(ReductionStep { name: "scale", matrix: rows(&m1.m) });
    let mut total = m1;
    let mut cur = rep.apply_change(&m1);

    let normal = |a: &Mat3| classify::eigen3(a).normal;
    let mut beta = normal(&cur.a).and_then(|v| shear_root(&v));
    if beta.is_none() {
        let sw = LinearChange::swap();
        steps.push(ReductionStep { name: "swap", matrix: rows(&sw.m) });
        cur = cur.apply_change(&sw);
        total = total.then(&sw);
        beta = normal(&cur.a).and_then(|v| shear_root(&v));
    }
    let beta = beta.ok_or_else(|| Error::AssumptionFails("eigenplane has no boundary ray".into()))?;
    let m2 = LinearChange::new(Mat2::new(1.0, beta, 0.0, 1.0))?;
    steps.push(ReductionStep { name: "shear", matrix: rows(&m2.m) });
    cur = cur.apply_change(&m2);
    total = total.then(&m2);

    let gt = cur.a * Vec3::x();
    if gt[2].abs() <= 1e-12 * (1.0 + gt.norm()) {
        return Err(Error::AssumptionFails("eigenplane does not meet the open cone".into()));
    }
    let eta1 = (gt[0] - gt[1] * gt[1] / gt[2]).asinh();
    let sigma = gt[2].signum();
    let r = (eta1.cosh() / gt[2].abs()).powf(0.25);
    let m3 = LinearChange::new(Mat2::new(r, 0.0, gt[1] / (gt[2] * r), 1.0 / r))?;
    steps.push(ReductionStep { name: "triangular", matrix: rows(&m3.m) });
    cur = cur.apply_change(&m3);
    total = total.then(&m3);

    let a3 = cur.a;
    let lambda0 = a3.trace();
    let shifted = a3 - Mat3::identity() * lambda0;
    let v = shifted.row(0).transpose().cross(&shifted.row(2).transpose());
    if v[1].abs() < 1e-10 * v.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateEigenvector(v[1] / v.norm()));
    }
    let ev = v / v[1];
    let params = StandardFormParams {
        sigma,
        eta1,
        eta2: ev[0],
        eta3: ev[2],
        lambda0,
        q1: cur.v[0],
        q2: cur.v[1],
        q3: cur.v[2],
    };
    let (_, built) = build_standard(&params);
    let transport_residual = (cur.a - built.a).amax().max((cur.v - built.v).amax());
    let eigenvector_residual = (shifted * ev).norm();
    Ok(ReductionCertificate {
        steps,
        composite: rows(&total.m),
        params,
        transport_residual,
        eigenvector_residual,
        change: total,
    })
}

/// `|A₁|⁴ + 2σ tanh η₁ |A₁|²|A₂|² + |A₂|⁴`.
#[derive(Clone, Copy, Debug)]
pub struct StandardQuartic {
    pub sigma: f64,
    pub eta1: f64,
}

impl StandardQuartic {
    pub fn eval(&self, s: &PairState) -> f64 {
        let (r1, r2) = (s.a1.norm_sqr(), s.a2.norm_sqr());
        r1 * r1 + 2.0 * self.sigma * self.eta1.tanh() * r1 * r2 + r2 * r2
    }
}

pub fn standard_quartic(p: &StandardFormParams) -> StandardQuartic {
    StandardQuartic { sigma: p.sigma, eta1: p.eta1 }
}

/// Quartic density of the energy-like conserved quantity, as coefficients of
/// `|u₁|⁴`, `|u₁|² Re ū₁u₂`, `|u₁|²|u₂|²`, `Re ū₁²u₂²`, `|u₂|² Re ū₁u₂`,
/// `|u₂|⁴`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyLike {
    pub q: f64,
    pub coefficients: [f64; 6],
}

impl EnergyLike {
    pub fn density(&self, s: &PairState) -> f64 {
        let (r1, r2) = (s.a1.norm_sqr(), s.a2.norm_sqr());
        let z = s.a1.conj() * s.a2;
        let c = &self.coefficients;
        c[0] * r1 * r1 + c[1] * r1 * z.re + c[2] * r1 * r2 + c[3] * (z * z).re + c[4] * r2 * z.re + c[5] * r2 * r2
    }
}

/// `Some(q)` when `λ₀ = 0` and `(q₁, q₂, q₃) = q(η₂, 1, η₃)`.
pub fn energy_like_condition(p: &StandardFormParams) -> Option<EnergyLike> {
    const TOL: f64 = 1e-10;
    let q = p.q2;
    let ok = p.lambda0.abs() <= TOL
        && (p.q1 - q * p.eta2).abs() <= TOL * (1.0 + q.abs())
        && (p.q3 - q * p.eta3).abs() <= TOL * (1.0 + q.abs());
    if !ok {
        return None;
    }
    let (sh, ch) = (p.eta1.sinh(), p.eta1.cosh());
    let (s, e2, e3) = (p.sigma, p.eta2, p.eta3);
    let t = sh + q;
    let rest = s * (1.0 - e2 * e3) * ch;
    Some(EnergyLike {
        q,
        coefficients: [
            e2 * e2 * t + rest,
            4.0 * e2 * t,
            2.0 * (2.0 * sh + q * (1.0 + e2 * e3)),
            2.0 * t,
            4.0 * e3 * t,
            e3 * e3 * t + rest,
        ],
    })
}
