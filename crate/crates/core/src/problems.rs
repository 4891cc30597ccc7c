//! Problem instances (domain, boundary condition, operator, weights) and the
//! Rayleigh-quotient functionals `F`, `G`, `H` on discrete functions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coefficients::{CoefficientField, ScaledField};
use crate::fem2d::Mesh2;
use crate::operators::{OperatorCoeff, OperatorSpec};
use crate::quad::{composite_gauss, gauss, triangle_quad};
use crate::scalar::Scalar;
use crate::spectrum::SolveError;

/// Boundary-condition tag without parameters, for table keys and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BcTag {
    Dirichlet,
    Neumann,
    Robin,
    NonFlux,
    DependentBc,
    Steklov,
}

impl BcTag {
    pub fn short(&self) -> &'static str {
        match self {
            BcTag::Dirichlet => "D",
            BcTag::Neumann => "N",
            BcTag::Robin => "R",
            BcTag::NonFlux => "P",
            BcTag::DependentBc => "B",
            BcTag::Steklov => "S",
        }
    }
}

/// Boundary condition; Robin carries its coefficient `β ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition<S> {
    Dirichlet,
    Neumann,
    Robin { beta: S },
    NonFlux,
    DependentBc,
    Steklov,
}

impl<S: Scalar> BoundaryCondition<S> {
    pub fn tag(&self) -> BcTag {
        match self {
            BoundaryCondition::Dirichlet => BcTag::Dirichlet,
            BoundaryCondition::Neumann => BcTag::Neumann,
            BoundaryCondition::Robin { .. } => BcTag::Robin,
            BoundaryCondition::NonFlux => BcTag::NonFlux,
            BoundaryCondition::DependentBc => BcTag::DependentBc,
            BoundaryCondition::Steklov => BcTag::Steklov,
        }
    }
}

/// Computational domain: an interval or an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain<S> {
    Interval { a: S, b: S },
    Rect { x0: S, y0: S, x1: S, y1: S },
}

impl<S: Scalar> Domain<S> {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rect { .. } => 2,
        }
    }

    pub fn measure(&self) -> S {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rect { x0, y0, x1, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    pub fn boundary_measure(&self) -> S {
        match *self {
            Domain::Interval { .. } => S::of(2.0),
            Domain::Rect { x0, y0, x1, y1 } => S::of(2.0) * ((x1 - x0) + (y1 - y0)),
        }
    }

    pub fn unit_interval() -> Self {
        Domain::Interval { a: S::zero(), b: S::one() }
    }

    pub fn unit_square() -> Self {
        Domain::Rect { x0: S::zero(), y0: S::zero(), x1: S::one(), y1: S::one() }
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch between domain and fields")]
    DimensionMismatch,
    #[error("rho must be bounded away from zero (declared lo <= 0)")]
    RhoNotPositive,
    #[error("{0:?} requires the potential V to be strictly positive")]
    PotentialNotPositive(BcTag),
    #[error("{0:?} requires dimension 2 in this artifact")]
    NeedsDim2(BcTag),
    #[error("Robin beta must be nonnegative")]
    NegativeRobinBeta,
}

/// A fully specified eigenvalue problem at one ε (or the averaged limit).
#[derive(Debug, Clone)]
pub struct ProblemInstance<S> {
    pub domain: Domain<S>,
    pub op: OperatorSpec<S>,
    pub rho: ScaledField<S>,
    pub v: ScaledField<S>,
    pub bc: BoundaryCondition<S>,
}

impl<S: Scalar> ProblemInstance<S> {
    pub fn new(
        domain: Domain<S>,
        op: OperatorSpec<S>,
        rho: ScaledField<S>,
        v: ScaledField<S>,
        bc: BoundaryCondition<S>,
    ) -> Result<Self, ProblemError> {
        let dim = domain.dim();
        if rho.base.dim != dim || v.base.dim != dim {
            return Err(ProblemError::DimensionMismatch);
        }
        if let Some(d) = op.dim_hint() {
            if d != dim {
                return Err(ProblemError::DimensionMismatch);
            }
        }
        if !(rho.base.lo > S::zero()) {
            return Err(ProblemError::RhoNotPositive);
        }
        match bc {
            BoundaryCondition::Robin { beta } => {
                if beta < S::zero() {
                    return Err(ProblemError::NegativeRobinBeta);
                }
            }
            BoundaryCondition::DependentBc | BoundaryCondition::Steklov => {
                if dim != 2 {
                    return Err(ProblemError::NeedsDim2(bc.tag()));
                }
                if !(v.base.lo > S::zero()) {
                    return Err(ProblemError::PotentialNotPositive(bc.tag()));
                }
            }
            _ => {}
        }
        Ok(Self { domain, op, rho, v, bc })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn p(&self) -> S {
        self.op.p
    }

    /// Replace ε by the averaged sentinel in both weights.
    pub fn averaged(&self) -> Self {
        let mut out = self.clone();
        out.rho = ScaledField::averaged(self.rho.base.clone());
        out.v = ScaledField::averaged(self.v.base.clone());
        out
    }

    /// Replace ε in both weights.
    pub fn at_epsilon(&self, eps: crate::coefficients::Epsilon<S>) -> Self {
        let mut out = self.clone();
        out.rho = ScaledField { base: self.rho.base.clone(), epsilon: eps };
        out.v = ScaledField { base: self.v.base.clone(), epsilon: eps };
        out
    }
}

/// Piecewise-linear function on a 1D node set or a 2D triangulation.
#[derive(Debug, Clone)]
pub enum DiscreteFunction<S> {
    OneD { nodes: Vec<S>, values: Vec<S> },
    TwoD { mesh: Arc<Mesh2<S>>, values: Vec<S> },
}

impl<S: Scalar> DiscreteFunction<S> {
    pub fn one_d(nodes: Vec<S>, values: Vec<S>) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(nodes.len() >= 2);
        DiscreteFunction::OneD { nodes, values }
    }

    pub fn two_d(mesh: Arc<Mesh2<S>>, values: Vec<S>) -> Self {
        assert_eq!(mesh.vertices.len(), values.len());
        DiscreteFunction::TwoD { mesh, values }
    }

    /// Uniform-node constructor on an interval.
    pub fn constant_on(domain: &Domain<S>, mesh_n: usize, value: S) -> Self {
        match *domain {
            Domain::Interval { a, b } => {
                let n = mesh_n.max(2);
                let nodes: Vec<S> = (0..n)
                    .map(|i| a + (b - a) * S::of(i as f64 / (n - 1) as f64))
                    .collect();
                DiscreteFunction::OneD { values: vec![value; n], nodes }
            }
            Domain::Rect { .. } => panic!("use two_d for rectangles"),
        }
    }

    /// Boundary trace values (endpoints in 1D, boundary vertices in 2D).
    pub fn trace_values(&self) -> Vec<S> {
        match self {
            DiscreteFunction::OneD { values, .. } => {
                vec![values[0], *values.last().unwrap()]
            }
            DiscreteFunction::TwoD { mesh, values } => mesh
                .boundary_vertices
                .iter()
                .map(|&v| values[v])
                .collect(),
        }
    }

    /// Whether the function lies in the boundary subspace of `bc`.
    pub fn conforms_to(&self, bc: &BoundaryCondition<S>, tol: S) -> bool {
        let trace = self.trace_values();
        match bc {
            BoundaryCondition::Dirichlet => trace.iter().all(|t| t.abs() <= tol),
            BoundaryCondition::NonFlux => {
                let first = trace[0];
                trace.iter().all(|t| (*t - first).abs() <= tol)
            }
            _ => true,
        }
    }

    pub fn scale(&self, t: S) -> Self {
        match self {
            DiscreteFunction::OneD { nodes, values } => DiscreteFunction::OneD {
                nodes: nodes.clone(),
                values: values.iter().map(|&v| t * v).collect(),
            },
            DiscreteFunction::TwoD { mesh, values } => DiscreteFunction::TwoD {
                mesh: mesh.clone(),
                values: values.iter().map(|&v| t * v).collect(),
            },
        }
    }
}

/// Breakpoints of an unscaled coefficient field inside `(a, b)`.
fn field_breaks_in<S: Scalar>(f: &CoefficientField<S>, a: S, b: S) -> Vec<S> {
    let cell = f.cell_breaks(0);
    if cell.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let j0 = a.floor().as_f64() as i64 - 1;
    let j1 = b.ceil().as_f64() as i64 + 1;
    for j in j0..=j1 {
        for &c in &cell {
            let x = S::of(j as f64) + c;
            if x > a && x < b {
                out.push(x);
            }
        }
    }
    out.sort_by(|u, v| u.partial_cmp(v).unwrap());
    out.dedup_by(|u, v| (*u - *v).abs() < S::of(1e-14));
    out
}

/// Sub-triangle refinement level so the quadrature resolves a weight that
/// oscillates on scale ε.
fn tri_sub_level<S: Scalar>(diam: S, w: &ScaledField<S>) -> usize {
    let eps = match w.epsilon {
        crate::coefficients::Epsilon::Averaged => return 0,
        crate::coefficients::Epsilon::Value(e) => e,
    };
    if matches!(w.base.kind, crate::coefficients::FieldKind::Constant(_)) {
        return 0;
    }
    // want sub-triangle diameter <= eps/8
    let ratio = (diam * S::of(8.0) / eps).as_f64();
    if ratio <= 1.0 {
        0
    } else {
        (ratio.log2().ceil() as usize).min(3)
    }
}

/// `F(u, w) = ∫_Ω w |u|^p`.
pub fn functional_f<S: Scalar>(u: &DiscreteFunction<S>, w: &ScaledField<S>, p: S) -> S {
    match u {
        DiscreteFunction::OneD { nodes, values } => {
            let mut acc = S::zero();
            for i in 0..nodes.len() - 1 {
                let (x0, x1) = (nodes[i], nodes[i + 1]);
                let (u0, u1) = (values[i], values[i + 1]);
                let mut breaks = w.breaks_in(x0, x1, 0);
                // split at the zero of u for non-integer powers of |u|
                if u0 * u1 < S::zero() {
                    breaks.push(x0 + (x1 - x0) * u0 / (u0 - u1));
                }
                let h = x1 - x0;
                acc += composite_gauss(x0, x1, &breaks, 1, |x| {
                    let t = (x - x0) / h;
                    let uv = u0 * (S::one() - t) + u1 * t;
                    w.eval(&[x]) * uv.abs().powf(p)
                });
            }
            acc
        }
        DiscreteFunction::TwoD { mesh, values } => {
            let mut acc = S::zero();
            let sub = tri_sub_level(mesh.max_diameter(), w);
            for tri in &mesh.triangles {
                let [i0, i1, i2] = *tri;
                let (p0, p1, p2) = (mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]);
                let (u0, u1, u2) = (values[i0], values[i1], values[i2]);
                let bary = barycentric_builder(p0, p1, p2);
                acc += triangle_quad(p0, p1, p2, sub, &|x, y| {
                    let (l0, l1, l2) = bary(x, y);
                    let uv = u0 * l0 + u1 * l1 + u2 * l2;
                    w.eval(&[x, y]) * uv.abs().powf(p)
                });
            }
            acc
        }
    }
}

/// `G(u) = ∫_Ω Φ(x, ∇u)`.
pub fn functional_g<S: Scalar>(u: &DiscreteFunction<S>, op: &OperatorSpec<S>) -> S {
    let p = op.p;
    match u {
        DiscreteFunction::OneD { nodes, values } => {
            let mut acc = S::zero();
            for i in 0..nodes.len() - 1 {
                let (x0, x1) = (nodes[i], nodes[i + 1]);
                let du = (values[i + 1] - values[i]) / (x1 - x0);
                let dup = du.abs().powf(p);
                let a_int = match &op.coeff {
                    OperatorCoeff::Scalar(a) => {
                        let breaks = field_breaks_in(a, x0, x1);
                        composite_gauss(x0, x1, &breaks, 1, |x| a.eval(&[x]))
                    }
                    _ => x1 - x0, // matrix/custom do not occur in 1D
                };
                acc += a_int * dup;
            }
            acc
        }
        DiscreteFunction::TwoD { mesh, values } => {
            let mut acc = S::zero();
            for tri in &mesh.triangles {
                let [i0, i1, i2] = *tri;
                let (p0, p1, p2) = (mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]);
                let grads = Mesh2::p1_gradients(p0, p1, p2);
                let gx = grads[0][0] * values[i0] + grads[1][0] * values[i1] + grads[2][0] * values[i2];
                let gy = grads[0][1] * values[i0] + grads[1][1] * values[i1] + grads[2][1] * values[i2];
                acc += triangle_quad(p0, p1, p2, 0, &|x, y| {
                    op.potential(&[x, y], &[gx, gy]).unwrap_or_else(|_| {
                        // custom operators: fall back to a.xi (p-homogeneous => Phi = a.xi)
                        let a = op.apply(&[x, y], &[gx, gy]);
                        a[0] * gx + a[1] * gy
                    })
                });
            }
            acc
        }
    }
}

/// `H(u) = ∫_{∂Ω} |u|^p` (endpoint sum in 1D).
pub fn functional_h<S: Scalar>(u: &DiscreteFunction<S>, p: S) -> S {
    match u {
        DiscreteFunction::OneD { values, .. } => {
            values[0].abs().powf(p) + values.last().unwrap().abs().powf(p)
        }
        DiscreteFunction::TwoD { mesh, values } => {
            let mut acc = S::zero();
            for edge in &mesh.boundary_edges {
                let (a, b) = (mesh.vertices[edge[0]], mesh.vertices[edge[1]]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let (ua, ub) = (values[edge[0]], values[edge[1]]);
                acc += len
                    * gauss(S::zero(), S::one(), |t| {
                        (ua * (S::one() - t) + ub * t).abs().powf(p)
                    });
            }
            acc
        }
    }
}

/// The Rayleigh quotient matching the problem's boundary condition.
pub fn rayleigh_quotient<S: Scalar>(
    u: &DiscreteFunction<S>,
    prob: &ProblemInstance<S>,
) -> Result<S, SolveError> {
    let p = prob.p();
    let g = functional_g(u, &prob.op);
    let fv = functional_f(u, &prob.v, p);
    let frho = functional_f(u, &prob.rho, p);
    let tiny = S::of(1e-300);
    match prob.bc {
        BoundaryCondition::Dirichlet | BoundaryCondition::Neumann | BoundaryCondition::NonFlux => {
            if frho <= tiny {
                return Err(SolveError::ZeroDenominator);
            }
            Ok((g + fv) / frho)
        }
        BoundaryCondition::Robin { beta } => {
            if frho <= tiny {
                return Err(SolveError::ZeroDenominator);
            }
            let h = functional_h(u, p);
            Ok((beta * h + g + fv) / frho)
        }
        BoundaryCondition::DependentBc => {
            let h = functional_h(u, p);
            if h + frho <= tiny {
                return Err(SolveError::ZeroDenominator);
            }
            Ok((g + fv) / (h + frho))
        }
        BoundaryCondition::Steklov => {
            let h = functional_h(u, p);
            if h <= tiny {
                return Err(SolveError::ZeroDenominator);
            }
            Ok((g + fv) / h)
        }
    }
}

/// Barycentric coordinate evaluator for a fixed triangle.
fn barycentric_builder<S: Scalar>(
    p0: [S; 2],
    p1: [S; 2],
    p2: [S; 2],
) -> impl Fn(S, S) -> (S, S, S) {
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    move |x: S, y: S| {
        let l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
        let l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
        (S::one() - l1 - l2, l1, l2)
    }
}
