//! Two-component cubic nonlinear Schrödinger systems.
//!
//! The crate encodes a system `(i∂ₜ + ∂ₓ²)uⱼ = Fⱼ(u₁, u₂)` by twelve real
//! coefficients, maps it to a matrix-vector pair `(𝒜, 𝒱)`, decides the
//! structural conditions that govern its long-time behaviour, builds the
//! quartic invariant of the limit ODE, reduces systems to a standard form,
//! and simulates both the ODE and the PDE.

pub mod classify;
pub mod elliptic;
pub mod error;
pub mod io;
pub mod ode;
pub mod pde;
pub mod quadrature;
pub mod quartic;
pub mod standard;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use system::{
    CubicSystem, GaugeObstruction, LinearChange, Mat2, Mat3, MatrixVectorRep, PairState, QuadVector, Vec3, C64,
};
