//! Split-step spectral solver for `(i∂ₜ + ∂ₓ²)uⱼ = Fⱼ(u₁, u₂)` on a periodic
//! box, with the profile `wⱼ = ℱU(−t)uⱼ` and its diagnostics.
//!
//! The box `[−L/2, L/2)` with `N` nodes stands in for the line. The Fourier
//! transform is the unitary one, `ℱf(ξ) = (2π)^{−1/2}∫e^{−ixξ}f(x)dx`,
//! approximated by the trapezoid rule, so Parseval holds exactly on the grid.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode;
use crate::quartic::QuarticInvariant;
use crate::system::{CubicSystem, PairState, C64};

/// Uniform periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) || n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid needs L > 0 and N a power of two, got L={l}, N={n}")));
        }
        Ok(Self { l, n })
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        std::f64::consts::TAU / self.l
    }

    pub fn x(&self, k: usize) -> f64 {
        -0.5 * self.l + k as f64 * self.dx()
    }

    /// Frequency of FFT bin `n`.
    pub fn xi(&self, n: usize) -> f64 {
        let s = if n < self.n / 2 { n as f64 } else { n as f64 - self.n as f64 };
        s * self.dxi()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.xi(k)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub u1: Vec<C64>,
    pub u2: Vec<C64>,
    pub t: f64,
}

/// `wⱼ(t, ξ)` on the frequency grid, in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileState {
    pub w1: Vec<C64>,
    pub w2: Vec<C64>,
    pub t: f64,
}

impl ProfileState {
    pub fn at(&self, n: usize) -> PairState {
        PairState::new(self.w1[n], self.w2[n])
    }
}

/// Gaussian datum `ε e^{−x²}(c₁, c₂)` with `|c₁|² + |c₂|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Datum {
    pub eps: f64,
    pub c1: C64,
    pub c2: C64,
}

impl Datum {
    pub fn new(eps: f64, c1: C64, c2: C64) -> Result<Self> {
        let n = c1.norm_sqr() + c2.norm_sqr();
        if (n - 1.0).abs() > 1e-12 || !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidInput(format!("datum needs eps >= 0 and |c1|^2+|c2|^2 = 1 (got {n})")));
        }
        Ok(Self { eps, c1, c2 })
    }

    pub fn state(&self, grid: &Grid) -> FieldState {
        let g: Vec<f64> = grid.xs().iter().map(|x| self.eps * (-x * x).exp()).collect();
        FieldState { u1: g.iter().map(|&v| self.c1 * v).collect(), u2: g.iter().map(|&v| self.c2 * v).collect(), t: 0.0 }
    }
}

/// Time stepping and snapshot plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dt: f64,
    /// Increasing diagnostic times.
    pub snapshots: Vec<f64>,
    /// Snapshot times whose fields are kept in the output.
    #[serde(default)]
    pub fields: Vec<f64>,
}

/// Diagnostics at one snapshot.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub l2: [f64; 2],
    pub sup: [f64; 2],
    pub j: [f64; 2],
    /// Running `sup (1+t)^{−δε²} Σ(‖uⱼ‖ + ‖Juⱼ‖)`.
    pub x_boot: f64,
    /// Running `sup t^{1/2} Σ‖uⱼ‖_∞`.
    pub y_boot: f64,
    /// `‖rⱼ‖_{L^∞_ξ}`, `‖rⱼ‖_{L²_ξ}`; zero before `t = 1`.
    pub r_sup: [f64; 2],
    pub r_l2: [f64; 2],
    /// `sup_ξ |𝒬^{1/4}(w(t)) − 𝒬^{1/4}(w(t_ref))|`, from the first snapshot with `t ≥ 1`.
    pub quartic_drift: Option<f64>,
    /// `(∫ Re ū₁u₂, ∫ Re ∂ū₁∂u₂ + ¼∫(|u₁|⁴+|u₂|⁴))` for the model.
    pub conserved: Option<[f64; 2]>,
}

pub struct RunOutput {
    pub rows: Vec<DiagnosticRow>,
    pub profiles: Vec<ProfileState>,
    pub fields: Vec<FieldState>,
}

impl RunOutput {
    pub fn profile_at(&self, t: f64) -> Option<&ProfileState> {
        self.profiles.iter().find(|p| (p.t - t).abs() <= 1e-9 * t.max(1.0))
    }

    pub fn row_at(&self, t: f64) -> Option<&DiagnosticRow> {
        self.rows.iter().find(|r| (r.t - t).abs() <= 1e-9 * t.max(1.0))
    }
}

/// Solver bound to one system and grid. Holds FFT plans and scratch.
pub struct Solver {
    pub grid: Grid,
    pub sys: CubicSystem,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    xi2: Vec<f64>,
    x: Vec<f64>,
}

#[inline]
fn rk4_point(sys: &CubicSystem, a1: &mut C64, a2: &mut C64, h: f64) {
    let mi = C64::new(0.0, -1.0);
    let f = |x: C64, y: C64| {
        let (f1, f2) = sys.nonlinearity(x, y);
        (mi * f1, mi * f2)
    };
    let (x, y) = (*a1, *a2);
    let k1 = f(x, y);
    let k2 = f(x + k1.0 * (0.5 * h), y + k1.1 * (0.5 * h));
    let k3 = f(x + k2.0 * (0.5 * h), y + k2.1 * (0.5 * h));
    let k4 = f(x + k3.0 * h, y + k3.1 * h);
    *a1 = x + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
    *a2 = y + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
}

fn sup_norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

impl Solver {
    pub fn new(sys: CubicSystem, grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            grid,
            sys,
            fwd,
            inv,
            scratch: vec![C64::default(); len],
            xi2: grid.xis().iter().map(|x| x * x).collect(),
            x: grid.xs(),
        }
    }

    fn fft(&mut self, v: &mut [C64]) {
        self.fwd.process_with_scratch(v, &mut self.scratch);
    }

    fn ifft(&mut self, v: &mut [C64]) {
        self.inv.process_with_scratch(v, &mut self.scratch);
    }

    /// `e^{−iξ²h}/N`.
    fn multiplier(&self, h: f64) -> Vec<C64> {
        let s = 1.0 / self.grid.n as f64;
        self.xi2.iter().map(|&k| C64::from_polar(s, -k * h)).collect()
    }

    fn nonlinear(&self, st: &mut FieldState, h: f64) {
        if self.sys.is_zero() {
            return;
        }
        let sys = self.sys;
        st.u1.iter_mut().zip(st.u2.iter_mut()).for_each(|(a, b)| rk4_point(&sys, a, b, h));
    }

    /// `n` Strang steps of size `dt`: half linear, full nonlinear, half
    /// linear, with adjacent linear halves merged.
    pub fn advance(&mut self, st: &mut FieldState, dt: f64, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let half = self.multiplier(0.5 * dt);
        let full = self.multiplier(dt);
        let apply = |v: &mut [C64], m: &[C64]| v.iter_mut().zip(m).for_each(|(z, k)| *z *= k);
        let mut u1 = std::mem::take(&mut st.u1);
        let mut u2 = std::mem::take(&mut st.u2);
        self.fft(&mut u1);
        self.fft(&mut u2);
        apply(&mut u1, &half);
        apply(&mut u2, &half);
        for i in 0..n {
            self.ifft(&mut u1);
            self.ifft(&mut u2);
            let mut tmp = FieldState { u1, u2, t: st.t };
            self.nonlinear(&mut tmp, dt);
            u1 = tmp.u1;
            u2 = tmp.u2;
            self.fft(&mut u1);
            self.fft(&mut u2);
            let m = if i + 1 == n { &half } else { &full };
            apply(&mut u1, m);
            apply(&mut u2, m);
            if i % 1000 == 999 && !(u1[0].re.is_finite() && u2[0].re.is_finite()) {
                return Err(Error::NonFinite { t: st.t + (i + 1) as f64 * dt });
            }
        }
        self.ifft(&mut u1);
        self.ifft(&mut u2);
        st.u1 = u1;
        st.u2 = u2;
        st.t += n as f64 * dt;
        if st.u1.iter().chain(&st.u2).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: st.t });
        }
        Ok(())
    }

    pub fn step(&mut self, st: &mut FieldState, dt: f64) -> Result<()> {
        self.advance(st, dt, 1)
    }

    /// Evolves to `t_end`, landing on it with a final shorter step when
    /// `t_end − t` is not a multiple of `dt`.
    pub fn advance_to(&mut self, st: &mut FieldState, dt: f64, t_end: f64) -> Result<()> {
        let span = t_end - st.t;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / dt + 1e-9).floor() as usize;
        let t_target = t_end;
        self.advance(st, dt, n)?;
        let rest = t_target - st.t;
        if rest > 1e-12 * t_target.max(1.0) {
            self.advance(st, rest, 1)?;
        }
        st.t = t_target;
        Ok(())
    }

    /// Unitary transform from the `x`-grid to the `ξ`-grid.
    pub fn forward_ft(&mut self, u: &[C64]) -> Vec<C64> {
        let mut v = u.to_vec();
        self.fft(&mut v);
        let c = self.grid.dx() / std::f64::consts::TAU.sqrt();
        v.iter_mut().enumerate().for_each(|(n, z)| *z *= if n % 2 == 0 { c } else { -c });
        v
    }

    /// Inverse of [`Solver::forward_ft`].
    pub fn inverse_ft(&mut self, w: &[C64]) -> Vec<C64> {
        let c = self.grid.dxi() / std::f64::consts::TAU.sqrt();
        let mut v: Vec<C64> = w.iter().enumerate().map(|(n, z)| z * if n % 2 == 0 { c } else { -c }).collect();
        self.ifft(&mut v);
        v
    }

    /// `w = e^{iξ²t} ℱu`.
    pub fn profile(&mut self, st: &FieldState) -> ProfileState {
        let mut w1 = self.forward_ft(&st.u1);
        let mut w2 = self.forward_ft(&st.u2);
        for (n, (a, b)) in w1.iter_mut().zip(w2.iter_mut()).enumerate() {
            let ph = C64::from_polar(1.0, self.xi2[n] * st.t);
            *a *= ph;
            *b *= ph;
        }
        ProfileState { w1, w2, t: st.t }
    }

    /// `U(t)ℱ⁻¹w`, the inverse of [`Solver::profile`].
    pub fn field_from_profile(&mut self, p: &ProfileState) -> FieldState {
        let un = |s: &mut Self, w: &[C64]| {
            let v: Vec<C64> = w.iter().enumerate().map(|(n, z)| z * C64::from_polar(1.0, -s.xi2[n] * p.t)).collect();
            s.inverse_ft(&v)
        };
        FieldState { u1: un(self, &p.w1), u2: un(self, &p.w2), t: p.t }
    }

    pub fn l2_x(&self, u: &[C64]) -> f64 {
        (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn l2_xi(&self, w: &[C64]) -> f64 {
        (w.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dxi()).sqrt()
    }

    /// `‖J(t)uⱼ‖ = ‖x U(−t)uⱼ‖` for both components.
    pub fn j_norm(&mut self, st: &FieldState) -> [f64; 2] {
        let p = self.profile(st);
        let dx = self.grid.dx();
        let mut out = [0.0; 2];
        for (j, w) in [&p.w1, &p.w2].into_iter().enumerate() {
            let v = self.inverse_ft(w);
            out[j] = (v.iter().zip(&self.x).map(|(z, x)| (z * x).norm_sqr()).sum::<f64>() * dx).sqrt();
        }
        out
    }

    /// `‖(x + 2it∂ₓ)uⱼ‖` with a spectral derivative; agrees with
    /// [`Solver::j_norm`] for well-resolved, localized fields.
    pub fn j_norm_direct(&mut self, st: &FieldState) -> [f64; 2] {
        let xis = self.grid.xis();
        let mut out = [0.0; 2];
        for (j, u) in [&st.u1, &st.u2].into_iter().enumerate() {
            let mut d = u.clone();
            self.fft(&mut d);
            let s = 1.0 / self.grid.n as f64;
            d.iter_mut().zip(&xis).for_each(|(z, k)| *z *= C64::new(0.0, k * s));
            self.ifft(&mut d);
            let v: Vec<C64> =
                u.iter().zip(&d).zip(&self.x).map(|((z, dz), x)| z * x + dz * C64::new(0.0, 2.0 * st.t)).collect();
            out[j] = self.l2_x(&v);
        }
        out
    }

    /// `U(∓1/4t)g = ℱ[e^{±ix²/4t} ℱ⁻¹g]` for `sign = ±1`.
    fn chirp(&mut self, g: &[C64], t: f64, sign: f64) -> Vec<C64> {
        let v = self.inverse_ft(g);
        let v: Vec<C64> = v.iter().zip(&self.x).map(|(z, x)| z * C64::from_polar(1.0, sign * x * x / (4.0 * t))).collect();
        self.forward_ft(&v)
    }

    /// `U(−1/4t)wⱼ` for both components.
    pub fn chirped_profile(&mut self, p: &ProfileState) -> (Vec<C64>, Vec<C64>) {
        (self.chirp(&p.w1, p.t, 1.0), self.chirp(&p.w2, p.t, 1.0))
    }

    fn apply_f(&self, a: &[C64], b: &[C64]) -> (Vec<C64>, Vec<C64>) {
        a.iter().zip(b).map(|(&x, &y)| self.sys.nonlinearity(x, y)).unzip()
    }

    /// `(Iⱼ, IIⱼ)` with `rⱼ = Iⱼ + IIⱼ`.
    ///
    /// `IIⱼ = (2t)⁻¹(Fⱼ(U(−1/4t)w) − Fⱼ(w))` and
    /// `Iⱼ = (U(1/4t) − 1)D(t)⁻¹M(t)⁻¹Fⱼ(u) = (U(1/4t) − 1)(2t)⁻¹Fⱼ(U(−1/4t)w)`.
    pub fn remainder_parts(&mut self, st: &FieldState) -> [(Vec<C64>, Vec<C64>); 2] {
        let t = st.t;
        let p = self.profile(st);
        let (uw1, uw2) = self.chirped_profile(&p);
        let (fu1, fu2) = self.apply_f(&uw1, &uw2);
        let (fw1, fw2) = self.apply_f(&p.w1, &p.w2);
        let s = 0.5 / t;
        let mut out: Vec<(Vec<C64>, Vec<C64>)> = Vec::with_capacity(2);
        for (fu, fw) in [(fu1, fw1), (fu2, fw2)] {
            let g: Vec<C64> = fu.iter().map(|z| z * s).collect();
            let back = self.chirp(&g, t, -1.0);
            let i: Vec<C64> = back.iter().zip(&g).map(|(a, b)| a - b).collect();
            let ii: Vec<C64> = fu.iter().zip(&fw).map(|(a, b)| (a - b) * s).collect();
            out.push((i, ii));
        }
        let b = out.pop().unwrap();
        let a = out.pop().unwrap();
        [a, b]
    }

    /// `rⱼ = e^{iξ²t}ℱFⱼ(u) − (2t)⁻¹Fⱼ(w)`, the exact defect of the profile
    /// equation `i∂ₜw = (2t)⁻¹F(w) + r`.
    pub fn remainders(&mut self, st: &FieldState) -> (Vec<C64>, Vec<C64>) {
        let p = self.profile(st);
        let (f1, f2) = self.apply_f(&st.u1, &st.u2);
        let (fw1, fw2) = self.apply_f(&p.w1, &p.w2);
        let s = 0.5 / st.t;
        let mut r = [self.forward_ft(&f1), self.forward_ft(&f2)];
        for (rj, fw) in r.iter_mut().zip([fw1, fw2]) {
            for (n, (z, f)) in rj.iter_mut().zip(fw).enumerate() {
                *z = *z * C64::from_polar(1.0, self.xi2[n] * st.t) - f * s;
            }
        }
        let [r1, r2] = r;
        (r1, r2)
    }

    /// `(∫ Re ū₁u₂, ∫ Re ∂ū₁∂u₂ + ¼∫(|u₁|⁴ + |u₂|⁴))`.
    pub fn model_integrals(&mut self, st: &FieldState) -> [f64; 2] {
        let dx = self.grid.dx();
        let xis = self.grid.xis();
        let s = 1.0 / self.grid.n as f64;
        let mut d = |u: &[C64]| {
            let mut v = u.to_vec();
            self.fft(&mut v);
            v.iter_mut().zip(&xis).for_each(|(z, k)| *z *= C64::new(0.0, k * s));
            self.ifft(&mut v);
            v
        };
        let d1 = d(&st.u1);
        let d2 = d(&st.u2);
        let mass: f64 = st.u1.iter().zip(&st.u2).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx;
        let grad: f64 = d1.iter().zip(&d2).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx;
        let quart: f64 = st.u1.iter().zip(&st.u2).map(|(a, b)| a.norm_sqr().powi(2) + b.norm_sqr().powi(2)).sum::<f64>() * dx;
        [mass, grad + 0.25 * quart]
    }
}

/// One Strang step on a fresh solver.
pub fn step(sys: &CubicSystem, grid: Grid, state: &FieldState, dt: f64) -> Result<FieldState> {
    let mut s = Solver::new(*sys, grid);
    let mut st = state.clone();
    s.step(&mut st, dt)?;
    Ok(st)
}

fn quartic_root(q: &QuarticInvariant, s: &PairState) -> f64 {
    q.eval(s).max(0.0).powf(0.25)
}

/// `sup_ξ |𝒬(w(t))^{1/4} − 𝒬(w(t₀))^{1/4}|` over frequencies where
/// `|w(t₀)| ≥ 10⁻³ max|w(t₀)|`.
pub fn quartic_drift(q: &QuarticInvariant, p0: &ProfileState, p: &ProfileState) -> f64 {
    let amp: Vec<f64> = (0..p0.w1.len()).map(|n| p0.at(n).norm_sqr().sqrt()).collect();
    let max = amp.iter().fold(0.0f64, |m, &x| m.max(x));
    (0..amp.len())
        .filter(|&n| amp[n] >= 1e-3 * max && max > 0.0)
        .map(|n| (quartic_root(q, &p.at(n)) - quartic_root(q, &p0.at(n))).abs())
        .fold(0.0, f64::max)
}

/// Frequencies where the ODE flow is applied; elsewhere the cubic term is
/// below `10⁻²⁴` relative and `w` is kept.
fn active(p: &ProfileState) -> Vec<bool> {
    let amp: Vec<f64> = (0..p.w1.len()).map(|n| p.at(n).norm_sqr()).collect();
    let max = amp.iter().fold(0.0f64, |m, &x| m.max(x));
    amp.iter().map(|&a| a > 1e-16 * max).collect()
}

/// Applies the ODE flow over `Δτ` pointwise in `ξ`.
pub fn flow_profile(sys: &CubicSystem, p: &ProfileState, dtau: f64, tol: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    let act = active(p);
    let out: Result<Vec<PairState>> = (0..p.w1.len())
        .into_par_iter()
        .map(|n| if act[n] { ode::propagate(sys, p.at(n), dtau, tol) } else { Ok(p.at(n)) })
        .collect();
    Ok(out?.into_iter().map(|s| (s.a1, s.a2)).unzip())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatchError {
    pub l2: f64,
    pub sup: f64,
}

/// Distance between `w(t₂)` and the ODE flow of `w(t₁)` over
/// `Δτ = ½ log(t₂/t₁)`.
pub fn asymptotic_match(sys: &CubicSystem, grid: &Grid, p1: &ProfileState, p2: &ProfileState, tol: f64) -> Result<MatchError> {
    if !(p1.t >= 1.0 && p2.t > p1.t) {
        return Err(Error::PreconditionViolated(format!("need 1 <= t1 < t2, got {} and {}", p1.t, p2.t)));
    }
    let (a, b) = flow_profile(sys, p1, 0.5 * (p2.t / p1.t).ln(), tol)?;
    let mut l2 = 0.0;
    let mut sup = 0.0f64;
    for n in 0..a.len() {
        let d = (a[n] - p2.w1[n]).norm_sqr() + (b[n] - p2.w2[n]).norm_sqr();
        l2 += d;
        sup = sup.max(d.sqrt());
    }
    Ok(MatchError { l2: (l2 * grid.dxi()).sqrt(), sup })
}

/// Pulls `w(T)` back along the ODE flow from `τ = ½ log T` to `τ = 0`.
pub fn extract_scattering_state(sys: &CubicSystem, p: &ProfileState, tol: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    if p.t < 10.0 {
        return Err(Error::PreconditionViolated(format!("extraction needs T >= 10, got {}", p.t)));
    }
    flow_profile(sys, p, -0.5 * p.t.ln(), tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservedReport {
    pub times: Vec<f64>,
    pub mass_like: Vec<f64>,
    pub energy_like: Vec<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

fn rel_drift(v: &[f64]) -> f64 {
    let v0 = v.first().copied().unwrap_or(0.0);
    let d = v.iter().fold(0.0f64, |m, x| m.max((x - v0).abs()));
    if v0 != 0.0 {
        d / v0.abs()
    } else {
        d
    }
}

/// Conserved integrals of the model system along a series of states.
pub fn model_conserved_checks(sys: &CubicSystem, grid: Grid, states: &[FieldState]) -> Result<ConservedReport> {
    if *sys != CubicSystem::model() && !sys.is_zero() {
        return Err(Error::WrongSystem("conserved integrals are specific to the model coupling".into()));
    }
    let mut s = Solver::new(*sys, grid);
    let vals: Vec<[f64; 2]> = states.iter().map(|st| s.model_integrals(st)).collect();
    let mass_like: Vec<f64> = vals.iter().map(|v| v[0]).collect();
    let energy_like: Vec<f64> = vals.iter().map(|v| v[1]).collect();
    Ok(ConservedReport {
        times: states.iter().map(|s| s.t).collect(),
        mass_drift: rel_drift(&mass_like),
        energy_drift: rel_drift(&energy_like),
        mass_like,
        energy_like,
    })
}

/// Bootstrap weight exponent `δ` in `(1+t)^{−δε²}`.
pub const DELTA: f64 = 0.1;

/// Evolves `datum` and records a [`DiagnosticRow`] at each snapshot.
pub fn run(sys: &CubicSystem, grid: Grid, datum: &Datum, schedule: &Schedule) -> Result<RunOutput> {
    if !(schedule.dt > 0.0) || schedule.snapshots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("schedule needs dt > 0 and increasing snapshots".into()));
    }
    let mut solver = Solver::new(*sys, grid);
    let mut st = datum.state(&grid);
    let invariant = crate::quartic::build_quartic(&sys.to_matrix_vector()).ok();
    let is_model = *sys == CubicSystem::model();
    let weight_exp = DELTA * datum.eps * datum.eps;
    let mut out = RunOutput { rows: Vec::new(), profiles: Vec::new(), fields: Vec::new() };
    let (mut x_boot, mut y_boot) = (0.0f64, 0.0f64);
    let mut reference: Option<ProfileState> = None;
    for &t in &schedule.snapshots {
        solver.advance_to(&mut st, schedule.dt, t)?;
        let p = solver.profile(&st);
        let l2 = [solver.l2_x(&st.u1), solver.l2_x(&st.u2)];
        let sup = [sup_norm(&st.u1), sup_norm(&st.u2)];
        let j = solver.j_norm(&st);
        x_boot = x_boot.max((1.0 + t).powf(-weight_exp) * (l2[0] + l2[1] + j[0] + j[1]));
        if t > 0.0 {
            y_boot = y_boot.max(t.sqrt() * (sup[0] + sup[1]));
        }
        let (r_sup, r_l2) = if t >= 1.0 {
            let (r1, r2) = solver.remainders(&st);
            ([sup_norm(&r1), sup_norm(&r2)], [solver.l2_xi(&r1), solver.l2_xi(&r2)])
        } else {
            ([0.0; 2], [0.0; 2])
        };
        if reference.is_none() && t >= 1.0 {
            reference = Some(p.clone());
        }
        let quartic_drift = match (&invariant, &reference) {
            (Some(q), Some(p0)) => Some(quartic_drift(q, p0, &p)),
            _ => None,
        };
        let conserved = is_model.then(|| solver.model_integrals(&st));
        out.rows.push(DiagnosticRow { t, l2, sup, j, x_boot, y_boot, r_sup, r_l2, quartic_drift, conserved });
        if schedule.fields.iter().any(|&f| (f - t).abs() <= 1e-9 * t.max(1.0)) {
            out.fields.push(st.clone());
        }
        out.profiles.push(p);
    }
    Ok(out)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
