//! Numerical laboratory for eigenvalue homogenization of quasilinear elliptic
//! problems with periodically oscillating weights.
//!
//! The crate computes spectra of
//! `-div(a(x,∇u)) + V(x/ε)|u|^{p-2}u = λ ρ(x/ε)|u|^{p-2}u`
//! under Dirichlet, Neumann, Robin, non-flux, eigenvalue-dependent and Steklov
//! boundary conditions, together with the averaged limit problems, and fits the
//! empirical convergence rates `|λ_k^ε - λ_k| ≈ C_k ε^{s_k}` and the growth of
//! `λ_k` in `k`.
//!
//! Core numerics are generic over the scalar type through [`scalar::Scalar`];
//! the concrete alias [`Real`] (`f64`) is what the CLI and the test suites use.

pub mod coefficients;
pub mod fem1d;
pub mod fem2d;
pub mod harness;
pub mod linalg;
pub mod operators;
pub mod oscillation;
pub mod problems;
pub mod ptrig;
pub mod quad;
pub mod scalar;
pub mod solver1d;
pub mod special;
pub mod spectrum;

pub use scalar::Scalar;

/// Default working precision for the solvers and the CLI.
pub type Real = f64;

/// Spectrum at working precision.
pub type Spectrum = spectrum::Spectrum<Real>;
/// Problem instance at working precision.
pub type ProblemInstance = problems::ProblemInstance<Real>;
