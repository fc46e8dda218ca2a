//! The limit ODE system `i dAⱼ/dτ = Fⱼ(A₁, A₂)`: adaptive integration,
//! quadratic-quantity diagnostics, and the closed-form model solution.

use serde::Serialize;

use crate::elliptic;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::quartic::QuarticInvariant;
use crate::system::{CubicSystem, PairState, QuadVector, Vec3, C64};

/// Default spacing of the output grid of [`integrate`].
pub const OUTPUT_STEP: f64 = 0.005;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type V<const N: usize> = [f64; N];

#[inline]
fn lin<const N: usize>(y: &V<N>, h: f64, terms: &[(f64, &V<N>)]) -> V<N> {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

fn err_norm<const N: usize>(e: &V<N>, y0: &V<N>, y1: &V<N>, tol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sk = tol + tol * y0[i].abs().max(y1[i].abs());
        s += (e[i] / sk).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrates `y′ = f(t, y)` from `(t0, y0)` and returns `y` at each entry of
/// `t_out`, which must be monotone in the direction of integration.
///
/// Embedded Dormand–Prince 5(4) with PI step control and the fourth-order
/// continuous extension; the local error per step is kept below `tol` in the
/// mixed absolute/relative RMS norm.
pub fn dopri5<const N: usize, F>(mut f: F, t0: f64, y0: V<N>, t_out: &[f64], tol: f64) -> Result<Vec<V<N>>>
where
    F: FnMut(f64, &V<N>) -> V<N>,
{
    let mut out = Vec::with_capacity(t_out.len());
    let Some(&t_end) = t_out.last() else {
        return Ok(out);
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut next = 0;
    while next < t_out.len() && (t_out[next] - t0) * dir <= 0.0 {
        out.push(y0);
        next += 1;
    }
    if next == t_out.len() {
        return Ok(out);
    }

    // Initial step guess.
    let scale = |y: &V<N>, v: &V<N>| {
        let mut s = 0.0;
        for i in 0..N {
            s += (v[i] / (tol + tol * y[i].abs())).powi(2);
        }
        (s / N as f64).sqrt()
    };
    let d0 = scale(&y, &y);
    let d1 = scale(&y, &k1);
    let mut h = if d0 <= 1e-10 || d1 <= 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = lin(&y, h * dir, &[(1.0, &k1)]);
    let f1 = f(t + h * dir, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - k1[i];
    }
    let d2 = scale(&y, &diff) / h;
    let h1 = if d1.max(d2) <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    h = (100.0 * h).min(h1).min((t_end - t0).abs());
    let mut h = h * dir;

    let beta = 0.04;
    let expo = 0.2 - beta * 0.75;
    let (safe, facc1, facc2) = (0.9, 1.0 / 0.2, 1.0 / 10.0);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        steps += 1;
        if h.abs() < 1e-14 * t.abs().max(1.0) || steps > 50_000_000 {
            return Err(Error::StepFailure { tau: t, h: h.abs() });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, &lin(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &lin(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let ynew = lin(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &ynew);
        if ynew.iter().any(|x| !x.is_finite()) {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        let mut e = [0.0; N];
        for i in 0..N {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&e, &y, &ynew, tol);
        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(beta)).clamp(facc2 * safe, facc1 * safe) / safe;
            facold = err.max(1e-4);
            let mut hnew = h / fac;
            if last_rejected {
                hnew = if dir > 0.0 { hnew.min(h) } else { hnew.max(h) };
            }
            last_rejected = false;

            let tnew = t + h;
            while next < t_out.len() && (t_out[next] - tnew) * dir <= 0.0 {
                let theta = (t_out[next] - t) / h;
                let th1 = 1.0 - theta;
                let mut yo = [0.0; N];
                for i in 0..N {
                    let r2 = ynew[i] - y[i];
                    let r3 = h * k1[i] - r2;
                    let r4 = r2 - h * k7[i] - r3;
                    let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    yo[i] = y[i] + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
                }
                out.push(yo);
                next += 1;
            }
            t = tnew;
            y = ynew;
            k1 = k7;
            if next == t_out.len() {
                return Ok(out);
            }
            h = hnew;
        } else {
            h /= (fac11 / safe).min(facc1);
            last_rejected = true;
        }
    }
}

#[inline]
fn pack(s: &PairState) -> V<4> {
    [s.a1.re, s.a1.im, s.a2.re, s.a2.im]
}

#[inline]
fn unpack(y: &V<4>) -> PairState {
    PairState::new(C64::new(y[0], y[1]), C64::new(y[2], y[3]))
}

/// Right-hand side `dA/dτ = −iF(A)` in real coordinates.
#[inline]
pub fn rhs(sys: &CubicSystem, y: &V<4>) -> V<4> {
    let (f1, f2) = sys.nonlinearity(C64::new(y[0], y[1]), C64::new(y[2], y[3]));
    [f1.im, -f1.re, f2.im, -f2.re]
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-14..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("integrator tolerance {tol:e} outside [1e-14, 1e-6]")))
    }
}

/// Sampled solution of the limit ODE.
#[derive(Clone, Debug, Serialize)]
pub struct OdeTrajectory {
    pub tau: Vec<f64>,
    pub states: Vec<PairState>,
    pub quad: Vec<QuadVector>,
    /// `𝒬` along the trajectory, when the system admits the invariant.
    pub quartic: Option<Vec<f64>>,
}

impl OdeTrajectory {
    fn new(tau: Vec<f64>, states: Vec<PairState>, q: Option<&QuarticInvariant>) -> Self {
        let quad = states.iter().map(PairState::quad).collect();
        let quartic = q.map(|q| states.iter().map(|s| q.eval(s)).collect());
        Self { tau, states, quad, quartic }
    }

    pub fn last(&self) -> PairState {
        *self.states.last().expect("nonempty trajectory")
    }

    /// `max |𝒬(τ) − 𝒬(0)| / 𝒬(0)`.
    pub fn quartic_drift(&self) -> Option<f64> {
        let q = self.quartic.as_ref()?;
        let q0 = q[0];
        if q0 == 0.0 {
            return Some(q.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        }
        Some(q.iter().fold(0.0f64, |m, x| m.max((x - q0).abs())) / q0)
    }
}

/// Solution on an arbitrary monotone grid starting at `τ = grid[0]`.
pub fn integrate_grid(sys: &CubicSystem, s0: PairState, grid: &[f64], tol: f64) -> Result<OdeTrajectory> {
    check_tol(tol)?;
    let t0 = grid.first().copied().unwrap_or(0.0);
    let ys = dopri5(|_, y| rhs(sys, y), t0, pack(&s0), grid, tol)?;
    let q = crate::quartic::build_quartic(&sys.to_matrix_vector()).ok();
    Ok(OdeTrajectory::new(grid.to_vec(), ys.iter().map(unpack).collect(), q.as_ref()))
}

/// Uniform output grid from `0` to `tau_end` with spacing close to
/// [`OUTPUT_STEP`].
pub fn uniform_grid(tau_end: f64, step: f64) -> Vec<f64> {
    let n = ((tau_end.abs() / step).ceil() as usize).max(1);
    (0..=n).map(|i| tau_end * i as f64 / n as f64).collect()
}

/// Solution on `[0, τ_end]` (or `[τ_end, 0]` backwards).
pub fn integrate(sys: &CubicSystem, s0: PairState, tau_end: f64, tol: f64) -> Result<OdeTrajectory> {
    integrate_grid(sys, s0, &uniform_grid(tau_end, OUTPUT_STEP), tol)
}

/// Endpoint of the flow from `τ = 0` to `τ = tau_end`.
pub fn propagate(sys: &CubicSystem, s0: PairState, tau_end: f64, tol: f64) -> Result<PairState> {
    check_tol(tol)?;
    if tau_end == 0.0 {
        return Ok(s0);
    }
    let ys = dopri5(|_, y| rhs(sys, y), 0.0, pack(&s0), &[tau_end], tol)?;
    Ok(unpack(&ys[0]))
}

/// `max |d/dτ ρ − ℐ ρ𝒜|` over the grid, with `ρ = (ρ₁, ℛ, ρ₂)` and
/// centred differences.
pub fn quad_residual(sys: &CubicSystem, traj: &OdeTrajectory) -> f64 {
    let a = sys.to_matrix_vector().a;
    let n = traj.tau.len();
    if n < 3 {
        return 0.0;
    }
    let rows: Vec<Vec3> = traj.quad.iter().map(QuadVector::row).collect();
    let h0 = traj.tau[1] - traj.tau[0];
    let uniform = traj.tau.windows(2).all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.abs());
    let mut worst = 0.0f64;
    // with a uniform grid only the fourth-order stencil is used
    let range = if uniform && n >= 5 { 2..n - 2 } else { 1..n - 1 };
    for i in range {
        let d = if uniform && i >= 2 && i + 2 < n {
            (rows[i - 2] - rows[i - 1] * 8.0 + rows[i + 1] * 8.0 - rows[i + 2]) / (12.0 * h0)
        } else {
            let (hm, hp) = (traj.tau[i] - traj.tau[i - 1], traj.tau[i + 1] - traj.tau[i]);
            (rows[i + 1] - rows[i]) * (hm / (hp * (hm + hp))) + (rows[i] - rows[i - 1]) * (hp / (hm * (hm + hp)))
        };
        let model = (rows[i].transpose() * a).transpose() * traj.quad[i].i;
        worst = worst.max((d - model).amax());
    }
    worst
}

/// Parameters of the closed-form solution of the model system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelProfileParams {
    pub alpha: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub m: f64,
    /// Shift in `ατ + t₀` of the state formula in use.
    pub t0: f64,
    pub theta0: f64,
    /// Shift for the quadratic-quantity formulas.
    pub t0_quad: f64,
    /// Phase integrand integrated over one period `4K(m)/α`.
    pub period_phase: f64,
}

impl ModelProfileParams {
    pub fn is_balanced(&self) -> bool {
        self.r0.abs() <= 1e-12 * self.alpha
    }

    fn period(&self) -> f64 {
        4.0 * elliptic::complete_k(self.m).unwrap_or(f64::NAN) / self.alpha
    }
}

fn wrap_pi(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * ((x + std::f64::consts::PI) / t).floor()
}

/// `(x₁, x₂)(v)` with `A₁ = ½α^{1/2}e^{iθ₀}x₁`, `A₂ = ½iα^{1/2}e^{iθ₀}x₂`.
fn balanced_profile(v: f64) -> (f64, f64) {
    let half = elliptic::jacobi(0.5 * v, 0.5).expect("m = 1/2");
    let full = elliptic::jacobi(v, 0.5).expect("m = 1/2");
    let w = (1.0 + full.nd()).sqrt();
    (half.sn * w, half.cd() * w)
}

/// Shift `v` with `arg(x₁(v) + i x₂(v)) = target`.
fn balanced_shift(target: f64) -> f64 {
    let k8 = 8.0 * elliptic::complete_k(0.5).expect("m = 1/2");
    let d = |v: f64| {
        let (x1, x2) = balanced_profile(v);
        wrap_pi(x2.atan2(x1) - target)
    };
    let n = 4000;
    let h = k8 / n as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (da, db) = (d(a), d(b));
        if da.abs() < best.0 {
            best = (da.abs(), a);
        }
        // a sign change of the wrapped difference that is not a wrap jump
        if da * db <= 0.0 && (da - db).abs() < 1.0 {
            let (mut lo, mut hi, mut flo) = (a, b, da);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = d(mid);
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-15 * k8 {
                    break;
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    best.1
}

/// `α`, `ℛ₀`, `m`, the phase `θ₀` and the shift `t₀` for initial data
/// `(ψ₁, ψ₂)` of the model system.
pub fn model_params(psi1: C64, psi2: C64) -> Result<ModelProfileParams> {
    let s = PairState::new(psi1, psi2);
    if s.norm_sqr() == 0.0 {
        return Err(Error::ZeroState);
    }
    let q = s.quad();
    let alpha = 2.0 * (q.rho1 * q.rho1 + q.rho2 * q.rho2).sqrt();
    let r0 = q.r;
    let m = (0.5 - (r0 / alpha).powi(2)).clamp(0.0, 0.5);
    let beta = alpha * m.sqrt();
    let t0_quad = if beta <= 1e-14 * alpha {
        0.0
    } else {
        let sn = std::f64::consts::SQRT_2 * (q.rho1 - q.rho2) / beta;
        let cn = q.i / beta;
        elliptic::incomplete_f(sn.atan2(cn), m)?
    };
    let mut p = ModelProfileParams { alpha, r0, m, t0: t0_quad, theta0: psi1.arg(), t0_quad, period_phase: 0.0 };
    if p.is_balanced() {
        // ψ̄₁ψ₂ is imaginary: ψ = e^{iθ₀}(y₁, i y₂) with real y.
        let theta0 = if psi1.norm() > 0.0 { psi1.arg() } else { (psi2 / C64::i()).arg() };
        let rot = C64::from_polar(1.0, -theta0);
        let y1 = (psi1 * rot).re;
        let y2 = (psi2 * rot / C64::i()).re;
        p.theta0 = theta0;
        p.t0 = balanced_shift(y2.atan2(y1));
    } else {
        let period = p.period();
        p.period_phase = quadrature::integrate(|s| phase_integrand(&p, s), 0.0, period, 1e-13);
    }
    Ok(p)
}

/// `(dn + √m sn, dn − √m sn)` without cancellation: their product is
/// `(1 − 2m) + 2m cn²`, so the smaller factor follows from the larger.
fn dn_pm(e: &elliptic::EllipticEval, m: f64) -> (f64, f64) {
    let sm = m.sqrt();
    let prod = (1.0 - 2.0 * m) + 2.0 * m * e.cn * e.cn;
    if e.sn >= 0.0 {
        let p = e.dn + sm * e.sn;
        (p, prod / p)
    } else {
        let q = e.dn - sm * e.sn;
        (prod / q, q)
    }
}

fn phase_integrand(p: &ModelProfileParams, sigma: f64) -> f64 {
    let e = elliptic::jacobi(p.alpha * sigma + p.t0, p.m).expect("m in range");
    let (plus, minus) = dn_pm(&e, p.m);
    minus / plus
}

/// `∫₀^τ (1 − √m sd)/(1 + √m sd)(ασ + t₀) dσ`, using whole periods.
pub fn phase_integral(p: &ModelProfileParams, tau: f64) -> f64 {
    let period = p.period();
    let n = (tau / period).floor();
    let rest = tau - n * period;
    n * p.period_phase + quadrature::integrate(|s| phase_integrand(p, s), 0.0, rest, 1e-13)
}

/// Closed-form model solution at `τ`.
pub fn model_explicit(p: &ModelProfileParams, tau: f64) -> PairState {
    let v = p.alpha * tau + p.t0;
    let rot = C64::from_polar(1.0, p.theta0);
    if p.is_balanced() {
        let (x1, x2) = balanced_profile(v);
        let c = 0.5 * p.alpha.sqrt();
        return PairState::new(rot * (c * x1), rot * C64::new(0.0, c * x2));
    }
    let e = elliptic::jacobi(v, p.m).expect("m in range");
    let sm = p.m.sqrt();
    let s = dn_pm(&e, p.m).0.sqrt();
    let phase = C64::from_polar(1.0, -0.5 * p.r0 * phase_integral(p, tau));
    let a1 = rot * phase * (2f64.powf(-0.75) * p.alpha.sqrt() * s);
    let a2 = rot * phase * C64::new(p.r0, p.alpha * sm * e.cn) * (2f64.powf(-0.25) / (p.alpha.sqrt() * s));
    PairState::new(a1, a2)
}

/// Closed-form model solution on an increasing grid starting at `0`,
/// accumulating the phase integral between consecutive points.
pub fn model_explicit_series(p: &ModelProfileParams, grid: &[f64]) -> Vec<PairState> {
    if p.is_balanced() {
        return grid.iter().map(|&t| model_explicit(p, t)).collect();
    }
    let mut acc = 0.0;
    let mut prev = 0.0;
    let period = p.period();
    grid.iter()
        .map(|&tau| {
            if (tau - prev).abs() > period {
                acc = phase_integral(p, tau);
            } else {
                acc += quadrature::integrate(|s| phase_integrand(p, s), prev, tau, 1e-13);
            }
            prev = tau;
            let v = p.alpha * tau + p.t0;
            let e = elliptic::jacobi(v, p.m).expect("m in range");
            let sm = p.m.sqrt();
            let s = dn_pm(&e, p.m).0.sqrt();
            let rot = C64::from_polar(1.0, p.theta0 - 0.5 * p.r0 * acc);
            PairState::new(
                rot * (2f64.powf(-0.75) * p.alpha.sqrt() * s),
                rot * C64::new(p.r0, p.alpha * sm * e.cn) * (2f64.powf(-0.25) / (p.alpha.sqrt() * s)),
            )
        })
        .collect()
}

/// `(ρ₁, ρ₂, ℐ)` from the elliptic formulas.
pub fn quad_explicit(p: &ModelProfileParams, tau: f64) -> (f64, f64, f64) {
    let e = elliptic::jacobi(p.alpha * tau + p.t0_quad, p.m).expect("m in range");
    let c = 2f64.powf(-1.5) * p.alpha;
    let (plus, minus) = dn_pm(&e, p.m);
    (c * plus, c * minus, p.alpha * p.m.sqrt() * e.cn)
}

/// `√(½ − m) ∫₀^{4K(m)} (1 − √m sd)/(1 + √m sd) dσ / π`.
pub fn periodicity_ratio_m(m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 0.5) {
        return Err(Error::ModulusOutOfRange(m));
    }
    let k4 = 4.0 * elliptic::complete_k(m)?;
    let f = |s: f64| {
        let e = elliptic::jacobi(s, m).expect("m in range");
        let (plus, minus) = dn_pm(&e, m);
        minus / plus
    };
    Ok((0.5 - m).sqrt() * quadrature::integrate(f, 0.0, k4, 1e-14) / std::f64::consts::PI)
}

pub fn periodicity_ratio(p: &ModelProfileParams) -> Result<f64> {
    periodicity_ratio_m(p.m)
}

/// Continued-fraction convergents `(num, den)` of `x` with `den ≤ max_den`.
pub fn best_rationals(x: f64, max_den: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den || k2 <= 0 {
            break;
        }
        out.push((h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}
