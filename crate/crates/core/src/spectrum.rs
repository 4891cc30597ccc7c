//! Spectrum container shared by the 1D shooting and 2D FEM solvers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// One computed eigenvalue with solver metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenEntry<S> {
    /// 1-based variational index.
    pub k: usize,
    pub value: S,
    /// Terminal bracket width (shooting) or residual norm (FEM).
    pub error_estimate: S,
    /// Annotated multiplicity; 2 when two roots coincide within tolerance.
    pub multiplicity: usize,
    /// False for higher rotation-number values of the 1D periodic problem at
    /// p != 2, where coincidence with the variational values is not
    /// established.
    pub variational_certain: bool,
}

/// Ordered eigenvalue list `λ_1 ≤ λ_2 ≤ …` with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum<S> {
    pub eigenvalues: Vec<EigenEntry<S>>,
    pub solver: String,
    pub tol: S,
}

impl<S: Scalar> Spectrum<S> {
    pub fn values(&self) -> Vec<S> {
        self.eigenvalues.iter().map(|e| e.value).collect()
    }

    pub fn value(&self, k: usize) -> Option<S> {
        self.eigenvalues.iter().find(|e| e.k == k).map(|e| e.value)
    }

    /// Ordering sanity: nondecreasing within `slack`.
    pub fn is_sorted(&self, slack: S) -> bool {
        self.eigenvalues
            .windows(2)
            .all(|w| w[1].value >= w[0].value - slack)
    }
}

/// Solver failures surfaced to the harness and the CLI.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no convergence for eigenvalue index {k}: bracket not established below lambda_cap {cap}")]
    NoConvergence { k: usize, cap: f64 },
    #[error("mesh too coarse: element diameter {diameter} exceeds eps/4 = {limit}")]
    MeshTooCoarse { diameter: f64, limit: f64 },
    #[error("singular pencil: the Steklov boundary space is empty")]
    SingularPencil,
    #[error("zero denominator in Rayleigh quotient (function outside the admissible cone)")]
    ZeroDenominator,
    #[error("degenerate fit: all data sit below the resolution floor")]
    DegenerateFit,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}
