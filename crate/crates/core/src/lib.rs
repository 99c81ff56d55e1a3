//! Travelling solitary waves for the two-dimensional Zakharov system
//!
//! ```text
//! ∂t u = iΔu − i n u,   ∂t n = −∇·v,   ∂t v = −∇n − ∇|u|²
//! ```
//!
//! The profiles `(U_c, N_c, V_c)` are built as a perturbation of the cubic NLS
//! ground state `Q`: writing `U = Q + η₁ + iη₂`, the pair `(η₁, η₂)` is the
//! fixed point of `G_c = (L₊⁻¹F⁺, L₋⁻¹F⁻)` on the parity-restricted space, and
//! `N`, `V` follow from `|U|²` through the anisotropic multipliers `S_c`,
//! `T_{c,j}`.
//!
//! Everything lives on a periodic square grid and is evaluated spectrally.
//! The crate is organised bottom-up:
//!
//! * [`field`]: grid, fields, FFT, Sobolev norms, parity projections, snapshots
//! * [`operators`]: Fourier multipliers, `L±` and their inversion, Krylov
//!   solvers, the free-space log-kernel quadrature
//! * [`ground_state`]: `ΔQ = Q − Q³`
//! * [`solver`]: the fixed-point construction and profile assembly
//! * [`asymptotics`]: tail fits and the far-field pseudo-moment expansion
//! * [`evolution`]: time integration of the full system

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod ground_state;
pub mod operators;
pub mod solver;

pub use error::{Error, Result};
pub use field::{ComplexField, Grid2D, RealField, SymmetryClass};
