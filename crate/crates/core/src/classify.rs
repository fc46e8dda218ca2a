//! Structural conditions on the matrix part of a system: the eigenplane
//! assumption, the weak null gauge condition, a falsifier for the
//! dissipative condition, and the appendix family templates.

use nalgebra::{Matrix2, Matrix3x2, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{CubicSystem, Mat3, MatrixVectorRep, PairState, Vec3, C64};

/// Tolerance of the `𝒫₊` cone test on the restricted form.
pub const CONE_TOL: f64 = 1e-10;

/// Quadratic form `q(a, b, c) = ac − b²`.
pub fn cone_form() -> Mat3 {
    Mat3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0)
}

pub fn cone_value(v: &Vec3) -> f64 {
    v[0] * v[2] - v[1] * v[1]
}

/// Spectrum of `𝒜` and `𝒜²`, plus the eigenplane of a pure-imaginary pair.
#[derive(Clone, Debug)]
pub struct EigenStructure {
    pub eigenvalues: [C64; 3],
    pub squared: [C64; 3],
    pub k: Option<f64>,
    pub plane: Option<[Vec3; 2]>,
    pub normal: Option<Vec3>,
}

fn norm_fro(a: &Mat3) -> f64 {
    a.norm()
}

/// One real root of `x³ + ax² + bx + c`, the one of largest modulus when all
/// three are real.
fn cubic_real_root(a: f64, b: f64, c: f64) -> f64 {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut x = if disc < 0.0 {
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|j| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * j as f64) / 3.0).cos() - a / 3.0)
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best })
    } else {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - a / 3.0
    };
    for _ in 0..4 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 {
            break;
        }
        let nx = x - f / df;
        if !nx.is_finite() {
            break;
        }
        x = nx;
    }
    x
}

/// Coefficients `(a, b, c)` of the monic characteristic polynomial
/// `λ³ + aλ² + bλ + c`.
pub fn char_poly(m: &Mat3) -> (f64, f64, f64) {
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (-m.trace(), minors, -m.determinant())
}

/// The three eigenvalues of a real 3×3 matrix. The first is always real;
/// the remaining two form a real pair or a conjugate pair with positive
/// imaginary part first.
pub fn eigenvalues3(m: &Mat3) -> [C64; 3] {
    let (a, b, c) = char_poly(m);
    let r = cubic_real_root(a, b, c);
    let bb = a + r;
    let cc = b + r * bb;
    let disc = bb * bb / 4.0 - cc;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = -bb / 2.0 - s.copysign(bb);
        let other = if big != 0.0 { cc / big } else { 0.0 };
        [C64::new(r, 0.0), C64::new(big, 0.0), C64::new(other, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [C64::new(r, 0.0), C64::new(-bb / 2.0, im), C64::new(-bb / 2.0, -im)]
    }
}

/// Right singular vectors of `m`, ordered by increasing singular value.
fn right_singular(m: &Mat3) -> ([f64; 3], [Vec3; 3]) {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sv = idx.map(|i| svd.singular_values[i]);
    let vs = idx.map(|i| vt.row(i).transpose().normalize());
    (sv, vs)
}

pub fn eigen3(a: &Mat3) -> EigenStructure {
    let eigenvalues = eigenvalues3(a);
    let squared = eigenvalues.map(|z| z * z);
    let scale = 1.0 + norm_fro(a);
    let pair = eigenvalues
        .iter()
        .find(|z| z.im > 1e-9 * scale && z.re.abs() <= 1e-9 * scale)
        .copied();
    let (k, plane, normal) = match pair {
        Some(z) => {
            let k = z.im;
            let m = a * a + Mat3::identity() * (k * k);
            let (_, vs) = right_singular(&m);
            (Some(k), Some([vs[0], vs[1]]), Some(vs[2]))
        }
        None => (None, None, None),
    };
    EigenStructure { eigenvalues, squared, k, plane, normal }
}

/// Outcome of the `𝒫₊` test on a subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConeVerdict {
    Meets,
    Misses,
    /// Restricted maximum within the tolerance of zero.
    Boundary,
}

#[derive(Clone, Copy, Debug)]
pub struct ConeTest {
    pub verdict: ConeVerdict,
    /// Largest eigenvalue of the restricted form on an orthonormal basis.
    pub max_value: f64,
    /// Unit maximizer of the restricted form, first nonzero coordinate positive.
    pub maximizer: Vec3,
}

impl ConeTest {
    pub fn meets(&self) -> bool {
        self.verdict == ConeVerdict::Meets
    }
}

fn sign_normalize(v: Vec3) -> Vec3 {
    let v = v.normalize();
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => -v,
        _ => v,
    }
}

fn orthonormalize(basis: &[Vec3]) -> Result<Vec<Vec3>> {
    let n = basis.len();
    if n == 0 || n > 3 {
        return Err(Error::DegenerateBasis { gram: 0.0 });
    }
    let mut gram = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = basis[i].dot(&basis[j]);
        }
    }
    let g = gram.determinant();
    if g < 1e-12 {
        return Err(Error::DegenerateBasis { gram: g });
    }
    let mut out: Vec<Vec3> = Vec::with_capacity(n);
    for b in basis {
        let mut v = *b;
        for _ in 0..2 {
            for q in &out {
                v -= q * q.dot(&v);
            }
        }
        out.push(v.normalize());
    }
    Ok(out)
}

/// Tests whether `span(basis)` meets `𝒫₊ = {ac − b² > 0}`.
pub fn subspace_meets_pplus(basis: &[Vec3]) -> Result<ConeTest> {
    let q = orthonormalize(basis)?;
    let p = cone_form();
    let (max_value, maximizer) = match q.len() {
        1 => (cone_value(&q[0]), q[0]),
        2 => {
            let qm = Matrix3x2::from_columns(&[q[0], q[1]]);
            let r: Matrix2<f64> = qm.transpose() * p * qm;
            let eig = SymmetricEigen::new(r);
            let i = eig.eigenvalues.imax();
            (eig.eigenvalues[i], qm * eig.eigenvectors.column(i))
        }
        _ => {
            // Whole space: the form has eigenvalues ½, −½, −1.
            (0.5, Vec3::new(1.0, 0.0, 1.0).normalize())
        }
    };
    let verdict = if max_value > CONE_TOL {
        ConeVerdict::Meets
    } else if max_value >= -CONE_TOL {
        ConeVerdict::Boundary
    } else {
        ConeVerdict::Misses
    };
    Ok(ConeTest { verdict, max_value, maximizer: sign_normalize(maximizer) })
}

/// `v₂² − 4v₁v₃`; positive exactly when the plane `v^⊥` meets `𝒫₊`.
pub fn normal_criterion(v: &Vec3) -> f64 {
    v[1] * v[1] - 4.0 * v[0] * v[2]
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub holds: bool,
    pub boundary: bool,
    pub k: Option<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Option<[f64; 3]>,
    #[serde(skip)]
    pub plane: Option<[Vec3; 2]>,
    #[serde(skip)]
    pub normal: Option<Vec3>,
}

impl AssumptionReport {
    pub fn witness(&self) -> Option<(f64, Vec3)> {
        match (self.holds, self.k, self.gamma) {
            (true, Some(k), Some(g)) => Some((k, Vec3::from(g))),
            _ => None,
        }
    }
}

/// Decides whether some `k > 0` has `W(−k², 𝒜²) ∩ 𝒫₊ ≠ ∅`.
pub fn check_assumption(rep: &MatrixVectorRep) -> AssumptionReport {
    let eig = eigen3(&rep.a);
    let (Some(k), Some(plane)) = (eig.k, eig.plane) else {
        return AssumptionReport { holds: false, boundary: false, k: None, gamma: None, plane: None, normal: None };
    };
    let test = subspace_meets_pplus(&plane).expect("orthonormal plane");
    let holds = test.meets();
    AssumptionReport {
        holds,
        boundary: test.verdict == ConeVerdict::Boundary,
        k: Some(k),
        gamma: holds.then(|| [test.maximizer[0], test.maximizer[1], test.maximizer[2]]),
        plane: Some(plane),
        normal: eig.normal,
    }
}

/// Orthonormal basis of `Ker 𝒜`, by singular values below `1e−10·(1 + ‖𝒜‖)`.
pub fn kernel_basis(a: &Mat3) -> Vec<Vec3> {
    let tol = 1e-10 * (1.0 + norm_fro(a));
    let (sv, vs) = right_singular(a);
    (0..3).filter(|&i| sv[i] <= tol).map(|i| vs[i]).collect()
}

/// The weak null gauge condition `Ker 𝒜 ∩ 𝒫₊ ≠ ∅`.
pub fn check_s1(rep: &MatrixVectorRep) -> bool {
    let ker = kernel_basis(&rep.a);
    if ker.is_empty() {
        return false;
    }
    subspace_meets_pplus(&ker).map(|t| t.meets()).unwrap_or(false)
}

/// Existence of a coercive conserved mass-type quantity. Equivalent to
/// [`check_s1`] on the matrix part.
pub fn check_h0(sys: &CubicSystem) -> bool {
    check_s1(&sys.to_matrix_vector())
}

pub fn matrix_rank(a: &Mat3) -> usize {
    3 - kernel_basis(a).len()
}

/// `ℋ = [[p, q₁ + iq₂], [q₁ − iq₂, r]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HermitianCandidate {
    pub p: f64,
    pub q1: f64,
    pub q2: f64,
    pub r: f64,
}

impl HermitianCandidate {
    pub fn new(p: f64, q1: f64, q2: f64, r: f64) -> Self {
        Self { p, q1, q2, r }
    }

    pub fn is_positive(&self) -> bool {
        self.p > 0.0 && self.r > 0.0 && self.p * self.r > self.q1 * self.q1 + self.q2 * self.q2
    }

    /// `Im(Āᵀ ℋ F)` at `s`.
    pub fn flux(&self, sys: &CubicSystem, s: &PairState) -> f64 {
        let (f1, f2) = sys.eval_nonlinearity(*s);
        let off = C64::new(self.q1, self.q2);
        let h1 = f1 * self.p + f2 * off;
        let h2 = f1 * off.conj() + f2 * self.r;
        (s.a1.conj() * h1 + s.a2.conj() * h2).im
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum D0Verdict {
    RefutedWithWitness { state: PairState, value: f64, candidate: HermitianCandidate },
    UndecidedAfterSearch,
}

impl D0Verdict {
    pub fn refuted(&self) -> bool {
        matches!(self, D0Verdict::RefutedWithWitness { .. })
    }
}

/// Probe states used before random search: `(1, ±iτ)`, `(1, 0)`, `(0, 1)`
/// and a coarse grid on the unit sphere of `ℂ²`.
fn probe_states() -> Vec<PairState> {
    let mut out = Vec::new();
    for &tau in &[0.1, 10.0, 0.5, 2.0, 1.0] {
        out.push(PairState::new(C64::new(1.0, 0.0), C64::new(0.0, tau)));
        out.push(PairState::new(C64::new(1.0, 0.0), C64::new(0.0, -tau)));
    }
    out.push(PairState::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
    out.push(PairState::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)));
    let n = 12;
    for i in 1..n {
        let th = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
        for j in 0..2 * n {
            let ph = std::f64::consts::PI * j as f64 / n as f64;
            out.push(PairState::new(C64::new(th.cos(), 0.0), C64::from_polar(th.sin(), ph)));
        }
    }
    out
}

/// Searches for a state where `Im(Āᵀ ℋ F) > 0`, which refutes the
/// dissipative condition for the given `ℋ`.
pub fn check_d0_candidate(sys: &CubicSystem, h: &HermitianCandidate, samples: usize, seed: u64) -> Result<D0Verdict> {
    if !h.is_positive() {
        return Err(Error::NotPositive);
    }
    let scale = sys.max_abs() * (h.p.abs() + h.r.abs() + h.q1.abs() + h.q2.abs());
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let check = |s: PairState| {
        let n2 = s.norm_sqr();
        let v = h.flux(sys, &s);
        (v > tol * n2 * n2).then_some(D0Verdict::RefutedWithWitness { state: s, value: v, candidate: *h })
    };
    for s in probe_states() {
        if let Some(v) = check(s) {
            return Ok(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let s = PairState::new(
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        if let Some(v) = check(s) {
            return Ok(v);
        }
    }
    Ok(D0Verdict::UndecidedAfterSearch)
}

/// Appendix template families.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum FamilyReport {
    Elliptic { p: [f64; 5], k: Option<f64>, holds: bool },
    Parabolic { a12: f64, a13: f64, sigma1: f64, sigma2: f64, k: Option<f64>, holds: bool },
    Hyperbolic { a11: f64, a21: f64, a23: f64, a33: f64, k: Option<f64>, holds: bool },
    None,
}

impl FamilyReport {
    pub fn holds(&self) -> Option<bool> {
        match self {
            FamilyReport::Elliptic { holds, .. }
            | FamilyReport::Parabolic { holds, .. }
            | FamilyReport::Hyperbolic { holds, .. } => Some(*holds),
            FamilyReport::None => None,
        }
    }

    pub fn k(&self) -> Option<f64> {
        match self {
            FamilyReport::Elliptic { k, .. } | FamilyReport::Parabolic { k, .. } | FamilyReport::Hyperbolic { k, .. } => *k,
            FamilyReport::None => None,
        }
    }
}

/// Elliptic template matrix from `(p₁, …, p₅)`.
pub fn elliptic_template(p: [f64; 5]) -> Mat3 {
    let [p1, p2, p3, p4, p5] = p;
    Mat3::new(
        p1 + p5,
        -2.0 * p2 - 2.0 * p3 - 2.0 * p4,
        -p1 - p5,
        p2 - p3,
        2.0 * p1,
        -p2 + p3,
        -p1 + p5,
        2.0 * p2 + 2.0 * p3 - 2.0 * p4,
        p1 - p5,
    )
}

pub fn parabolic_template(a12: f64, a13: f64, sigma1: f64, sigma2: f64) -> Mat3 {
    Mat3::new(0.0, a12, a13, 0.0, 0.0, sigma2, 0.0, sigma1, 0.0)
}

pub fn hyperbolic_template(a11: f64, a21: f64, a23: f64, a33: f64) -> Mat3 {
    Mat3::new(a11, 0.0, -1.0, a21, 0.0, a23, 1.0, 0.0, a33)
}

/// Matches `𝒜` against the parabolic, hyperbolic and elliptic templates, in
/// that order, and evaluates the family's closed-form condition.
pub fn classify_standard_family(a: &Mat3) -> FamilyReport {
    const TOL: f64 = 1e-10;
    let z = |x: f64| x.abs() <= TOL;
    let unit = |x: f64| (x.abs() - 1.0).abs() <= TOL;
    let e = |i: usize, j: usize| a[(i - 1, j - 1)];

    if z(e(1, 1)) && z(e(2, 1)) && z(e(3, 1)) && z(e(2, 2)) && z(e(3, 3)) && unit(e(2, 3)) && unit(e(3, 2)) {
        let (a12, a13) = (e(1, 2), e(1, 3));
        let (sigma1, sigma2) = (e(3, 2).signum(), e(2, 3).signum());
        let exists = sigma1 * sigma2 < 0.0;
        let holds = exists && a13 * a13 - 4.0 * sigma2 * a12 > 0.0;
        return FamilyReport::Parabolic { a12, a13, sigma1, sigma2, k: exists.then_some(1.0), holds };
    }

    // representatives have a₁₁ > −a₃₃, or a₁₁ = −a₃₃ and a₂₁ ≥ −a₂₃
    let hyperbolic_normalized = e(1, 1) + e(3, 3) > TOL || (z(e(1, 1) + e(3, 3)) && e(2, 1) + e(2, 3) >= -TOL);
    if z(e(1, 2)) && z(e(2, 2)) && z(e(3, 2)) && z(e(1, 3) + 1.0) && z(e(3, 1) - 1.0) && hyperbolic_normalized {
        let (a11, a21, a23, a33) = (e(1, 1), e(2, 1), e(2, 3), e(3, 3));
        let exists = z(a11 + a33) && a11.abs() < 1.0;
        let value = (1.0 - a11 * a11).powi(2) + 4.0 * (a21 * a11 + a23) * (a23 * a11 + a21);
        let holds = exists && value > 0.0;
        return FamilyReport::Hyperbolic {
            a11,
            a21,
            a23,
            a33,
            k: exists.then(|| (1.0 - a11 * a11).sqrt()),
            holds,
        };
    }

    if z(e(1, 3) + e(1, 1)) && z(e(2, 3) + e(2, 1)) && z(e(3, 3) + e(3, 1)) && z(e(2, 2) - e(1, 1) - e(3, 3)) {
        let p1 = e(2, 2) / 2.0;
        let p5 = e(1, 1) - p1;
        let d = e(2, 1);
        let s = (e(3, 2) - e(1, 2)) / 4.0;
        let p2 = (s + d) / 2.0;
        let p3 = (s - d) / 2.0;
        let p4 = -(e(1, 2) + e(3, 2)) / 4.0;
        let exists = z(p1) && p2 * p2 > p3 * p3;
        let holds = exists && (p5 / (p2 - p3)).powi(2) + (p4 / (p2 + p3)).powi(2) > 1.0;
        return FamilyReport::Elliptic {
            p: [p1, p2, p3, p4, p5],
            k: exists.then(|| 2.0 * (p2 * p2 - p3 * p3).sqrt()),
            holds,
        };
    }

    FamilyReport::None
}

/// Aggregated verdicts for one system.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub assumption: AssumptionReport,
    #[serde(rename = "S1")]
    pub s1: bool,
    #[serde(rename = "H0")]
    pub h0: bool,
    pub d0_probe: D0Verdict,
    pub family: FamilyReport,
    pub rank: usize,
}

/// Runs every check; the dissipative probe uses `ℋ = I`.
pub fn classify(sys: &CubicSystem, seed: u64) -> ConditionReport {
    let rep = sys.to_matrix_vector();
    let d0_probe = check_d0_candidate(sys, &HermitianCandidate::new(1.0, 0.0, 0.0, 1.0), 2000, seed)
        .unwrap_or(D0Verdict::UndecidedAfterSearch);
    ConditionReport {
        assumption: check_assumption(&rep),
        s1: check_s1(&rep),
        h0: check_h0(sys),
        d0_probe,
        family: classify_standard_family(&rep.a),
        rank: matrix_rank(&rep.a),
    }
}
