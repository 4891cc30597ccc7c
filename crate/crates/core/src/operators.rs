//! The diffusion law `a(x, ξ)`, its potential `Φ`, and a sampled checker for
//! the structural hypotheses a user-supplied operator must satisfy.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coefficients::CoefficientField;
use crate::scalar::Scalar;

/// Hypothesis identifiers for checker diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H1Monotonicity,
    H2Coercivity,
    H3Continuity,
    H4Homogeneity,
    H5Oddness,
    H8StrictMonotonicity,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::H1Monotonicity => "H1",
            Hypothesis::H2Coercivity => "H2",
            Hypothesis::H3Continuity => "H3",
            Hypothesis::H4Homogeneity => "H4",
            Hypothesis::H5Oddness => "H5",
            Hypothesis::H8StrictMonotonicity => "H8",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("operator rejected: hypothesis {id} violated with residual {residual}")]
    Rejected { id: Hypothesis, residual: f64 },
    #[error("matrix-valued coefficient requires p = 2")]
    MatrixNeedsP2,
    #[error("exponent p must lie in (1, inf)")]
    BadExponent,
    #[error("ellipticity bounds must satisfy 0 < alpha <= beta")]
    BadBounds,
    #[error("potential is not available for custom operators")]
    NoPotential,
}

/// Spatial coefficient of the prototype operator, or a raw closure for the
/// hypothesis checker.
#[derive(Clone)]
pub enum OperatorCoeff<S> {
    /// Positive scalar field `A(x)` over the domain; any `p`.
    Scalar(CoefficientField<S>),
    /// Symmetric positive-definite matrix field, `p = 2` only.
    Matrix {
        a11: CoefficientField<S>,
        a12: CoefficientField<S>,
        a22: CoefficientField<S>,
    },
    /// Arbitrary `a(x, ξ)`; only goes through the checker.
    Custom(Arc<dyn Fn(&[S], &[S]) -> Vec<S> + Send + Sync>),
}

impl<S: fmt::Debug> fmt::Debug for OperatorCoeff<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorCoeff::Scalar(a) => f.debug_tuple("Scalar").field(a).finish(),
            OperatorCoeff::Matrix { .. } => f.write_str("Matrix{..}"),
            OperatorCoeff::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `a(x, ξ) = A(x)|ξ|^{p-2}ξ` with ellipticity bounds.
#[derive(Debug, Clone)]
pub struct OperatorSpec<S> {
    pub p: S,
    pub coeff: OperatorCoeff<S>,
    pub alpha: S,
    pub beta: S,
}

impl<S: Scalar> OperatorSpec<S> {
    pub fn new(p: S, coeff: OperatorCoeff<S>, alpha: S, beta: S) -> Result<Self, OperatorError> {
        if !(p > S::one()) || !p.is_finite() {
            return Err(OperatorError::BadExponent);
        }
        if !(alpha > S::zero()) || alpha > beta {
            return Err(OperatorError::BadBounds);
        }
        if matches!(coeff, OperatorCoeff::Matrix { .. }) && (p - S::of(2.0)).abs() > S::of(1e-14) {
            return Err(OperatorError::MatrixNeedsP2);
        }
        Ok(Self { p, coeff, alpha, beta })
    }

    /// p-Laplacian prototype with constant scalar coefficient.
    pub fn p_laplacian(dim: usize, p: S) -> Self {
        Self::new(
            p,
            OperatorCoeff::Scalar(CoefficientField::constant(dim, S::one())),
            S::one(),
            S::one(),
        )
        .unwrap()
    }

    /// Evaluate `a(x, ξ)`.
    pub fn apply(&self, x: &[S], xi: &[S]) -> Vec<S> {
        match &self.coeff {
            OperatorCoeff::Scalar(a) => {
                let av = a.eval(x);
                let norm = norm2(xi);
                if norm == S::zero() {
                    return vec![S::zero(); xi.len()];
                }
                let scale = av * norm.powf(self.p - S::of(2.0));
                xi.iter().map(|&c| scale * c).collect()
            }
            OperatorCoeff::Matrix { a11, a12, a22 } => {
                let (m11, m12, m22) = (a11.eval(x), a12.eval(x), a22.eval(x));
                vec![m11 * xi[0] + m12 * xi[1], m12 * xi[0] + m22 * xi[1]]
            }
            OperatorCoeff::Custom(f) => f(x, xi),
        }
    }

    /// The potential `Φ(x, ξ)` with `∇_ξ Φ = p a(x, ξ)` and `Φ(x, 0) = 0`.
    pub fn potential(&self, x: &[S], xi: &[S]) -> Result<S, OperatorError> {
        match &self.coeff {
            OperatorCoeff::Scalar(a) => Ok(a.eval(x) * norm2(xi).powf(self.p)),
            OperatorCoeff::Matrix { a11, a12, a22 } => {
                let (m11, m12, m22) = (a11.eval(x), a12.eval(x), a22.eval(x));
                Ok(m11 * xi[0] * xi[0]
                    + S::of(2.0) * m12 * xi[0] * xi[1]
                    + m22 * xi[1] * xi[1])
            }
            OperatorCoeff::Custom(_) => Err(OperatorError::NoPotential),
        }
    }

    pub fn dim_hint(&self) -> Option<usize> {
        match &self.coeff {
            OperatorCoeff::Scalar(a) => Some(a.dim),
            OperatorCoeff::Matrix { .. } => Some(2),
            OperatorCoeff::Custom(_) => None,
        }
    }
}

fn norm2<S: Scalar>(v: &[S]) -> S {
    v.iter().map(|&c| c * c).sum::<S>().sqrt()
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Worst-case sampled residuals per hypothesis. Residuals clamp at zero when
/// the hypothesis is satisfied, so every entry is nonnegative.
#[derive(Debug, Clone)]
pub struct HypothesisReport<S> {
    pub n_samples: usize,
    pub h1_monotonicity_gap: S,
    pub h2_coercivity_margin: S,
    pub h3_continuity_margin: S,
    pub h4_homogeneity_residual: S,
    pub h5_oddness_residual: S,
    /// Minimal sampled strict-monotonicity ratio; this estimates the constant
    /// α in the γ = max(2, p) inequality and should stay positive.
    pub h8_margin: S,
    /// Empirical equi-continuity ratios (H6): min and max of the sampled
    /// quotient; informational only since the constant is free.
    pub h6_ratio_range: (S, S),
}

impl<S: Scalar> HypothesisReport<S> {
    pub fn worst(&self) -> (Hypothesis, S) {
        let mut worst = (Hypothesis::H1Monotonicity, self.h1_monotonicity_gap);
        for (id, v) in [
            (Hypothesis::H2Coercivity, self.h2_coercivity_margin),
            (Hypothesis::H3Continuity, self.h3_continuity_margin),
            (Hypothesis::H4Homogeneity, self.h4_homogeneity_residual),
            (Hypothesis::H5Oddness, self.h5_oddness_residual),
        ] {
            if v > worst.1 {
                worst = (id, v);
            }
        }
        worst
    }
}

/// Sample the hypotheses over `(x, ξ)` pairs in `domain` (a bounding box per
/// axis). Deterministic given `seed`. Errors with `Rejected` when a residual
/// exceeds `1e-6`, signalling an operator outside the theory's scope.
pub fn check_hypotheses<S: Scalar>(
    op: &OperatorSpec<S>,
    dim: usize,
    domain: &[(S, S)],
    n_samples: usize,
    seed: u64,
) -> Result<HypothesisReport<S>, OperatorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_samples.max(1);
    let mut report = HypothesisReport {
        n_samples: n,
        h1_monotonicity_gap: S::zero(),
        h2_coercivity_margin: S::zero(),
        h3_continuity_margin: S::zero(),
        h4_homogeneity_residual: S::zero(),
        h5_oddness_residual: S::zero(),
        h8_margin: S::infinity(),
        h6_ratio_range: (S::infinity(), S::neg_infinity()),
    };
    let gamma = S::of(2.0).max(op.p);
    let delta = (op.p * S::of(0.5)).min(op.p - S::one());

    for _ in 0..n {
        let x: Vec<S> = domain
            .iter()
            .take(dim)
            .map(|&(a, b)| a + (b - a) * S::of(rng.gen::<f64>()))
            .collect();
        let sample_xi = |rng: &mut ChaCha8Rng| -> Vec<S> {
            (0..dim)
                .map(|_| S::of(rng.gen::<f64>() * 4.0 - 2.0))
                .collect()
        };
        let xi1 = sample_xi(&mut rng);
        let xi2 = sample_xi(&mut rng);
        let t = S::of(rng.gen::<f64>() * 3.0 + 0.05);

        let a1 = op.apply(&x, &xi1);
        let a2 = op.apply(&x, &xi2);
        let n1 = norm2(&xi1);

        // H1 monotonicity (also the k=2 instance of cyclical monotonicity H7)
        let diff: Vec<S> = xi1.iter().zip(&xi2).map(|(&u, &v)| u - v).collect();
        let adiff: Vec<S> = a1.iter().zip(&a2).map(|(&u, &v)| u - v).collect();
        let mono = dot(&adiff, &diff);
        report.h1_monotonicity_gap = report.h1_monotonicity_gap.max((-mono).max(S::zero()));

        // H2 coercivity: alpha |xi|^p <= a(x,xi).xi
        let coer = op.alpha * n1.powf(op.p) - dot(&a1, &xi1);
        report.h2_coercivity_margin = report.h2_coercivity_margin.max(coer.max(S::zero()));

        // H3 continuity: |a(x,xi)| <= beta |xi|^{p-1}
        let cont = norm2(&a1) - op.beta * n1.powf(op.p - S::one());
        report.h3_continuity_margin = report.h3_continuity_margin.max(cont.max(S::zero()));

        // H4 p-homogeneity (relative residual)
        let scaled_xi: Vec<S> = xi1.iter().map(|&c| t * c).collect();
        let a_scaled = op.apply(&x, &scaled_xi);
        let factor = t.powf(op.p - S::one());
        let mut hom = S::zero();
        let mut scale = S::of(1e-30);
        for (as_, a_) in a_scaled.iter().zip(&a1) {
            hom = hom.max((*as_ - factor * *a_).abs());
            scale = scale.max((factor * *a_).abs());
        }
        report.h4_homogeneity_residual = report.h4_homogeneity_residual.max(hom / (S::one() + scale));

        // H5 oddness
        let neg_xi: Vec<S> = xi1.iter().map(|&c| -c).collect();
        let a_neg = op.apply(&x, &neg_xi);
        let mut odd = S::zero();
        for (an, a_) in a_neg.iter().zip(&a1) {
            odd = odd.max((*an + *a_).abs());
        }
        report.h5_oddness_residual = report.h5_oddness_residual.max(odd / S::one().max(scale));

        // Psi for H6/H8
        let psi = dot(&a1, &xi1) + dot(&a2, &xi2);
        let sep = norm2(&diff);
        if psi > S::of(1e-12) && sep > S::of(1e-6) {
            // H8 ratio: (a1-a2).(xi1-xi2) / (|xi1-xi2|^gamma Psi^{1-gamma/p})
            let denom = sep.powf(gamma) * psi.powf(S::one() - gamma / op.p);
            if denom.is_finite() && denom > S::zero() {
                report.h8_margin = report.h8_margin.min(mono / denom);
            }
            // H6 ratio statistics
            if mono > S::of(1e-12) {
                let lhs = norm2(&adiff);
                let rhs = psi.powf((op.p - S::one() - delta) / op.p) * mono.powf(delta / op.p);
                if rhs > S::zero() {
                    let r = lhs / rhs;
                    report.h6_ratio_range.0 = report.h6_ratio_range.0.min(r);
                    report.h6_ratio_range.1 = report.h6_ratio_range.1.max(r);
                }
            }
        }
    }

    let tol = S::of(1e-6);
    for (id, v) in [
        (Hypothesis::H1Monotonicity, report.h1_monotonicity_gap),
        (Hypothesis::H2Coercivity, report.h2_coercivity_margin),
        (Hypothesis::H3Continuity, report.h3_continuity_margin),
        (Hypothesis::H4Homogeneity, report.h4_homogeneity_residual),
        (Hypothesis::H5Oddness, report.h5_oddness_residual),
    ] {
        if v > tol {
            return Err(OperatorError::Rejected { id, residual: v.as_f64() });
        }
    }
    if report.h8_margin < -tol {
        return Err(OperatorError::Rejected {
            id: Hypothesis::H8StrictMonotonicity,
            residual: (-report.h8_margin).as_f64(),
        });
    }
    Ok(report)
}
