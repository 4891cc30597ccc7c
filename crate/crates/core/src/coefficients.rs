//! Q-periodic scalar fields (weights and potentials), their ε-scalings and
//! exact cell averages.
//!
//! The field menu is deliberately small — piecewise-constant on a uniform grid
//! of the unit cell, finite trigonometric polynomials with integer
//! frequencies, and constants — so that cell averages are available in closed
//! form and the homogenization-rate measurements carry no quadrature error
//! from the averaging step.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from field construction.
#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("declared bounds violated on dense sample: value {value} outside [{lo}, {hi}]")]
    BoundViolation { value: f64, lo: f64, hi: f64 },
    #[error("empty value grid")]
    EmptyGrid,
    #[error("trig term with zero frequency; fold it into the offset")]
    ZeroFrequency,
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("bounds must satisfy lo <= hi")]
    BadBounds,
    #[error("epsilon must be positive")]
    BadEpsilon,
}

/// One cosine term `amp * cos(2π f·y + phase)` with integer frequency vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigTerm<S> {
    pub freq: [i32; 2],
    pub amp: S,
    pub phase: S,
}

/// The shape of a field on the unit cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FieldKind<S> {
    /// Constant value.
    Constant(S),
    /// Piecewise constant on a uniform grid of the unit cell.
    /// In 1D `shape = [m, 1]` with `values.len() == m`; in 2D row-major
    /// `values[iy * mx + ix]`.
    Piecewise { shape: [usize; 2], values: Vec<S> },
    /// `offset + Σ amp cos(2π f·y + phase)` with integer `f ≠ 0`.
    Trig { offset: S, terms: Vec<TrigTerm<S>> },
}

/// A Q-periodic bounded scalar field with declared bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientField<S> {
    pub dim: usize,
    pub kind: FieldKind<S>,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> CoefficientField<S> {
    pub fn new(dim: usize, kind: FieldKind<S>, lo: S, hi: S) -> Result<Self, FieldError> {
        if dim != 1 && dim != 2 {
            return Err(FieldError::BadDimension(dim));
        }
        if lo > hi {
            return Err(FieldError::BadBounds);
        }
        match &kind {
            FieldKind::Piecewise { values, shape } => {
                if values.is_empty() || shape[0] == 0 || shape[1] == 0 {
                    return Err(FieldError::EmptyGrid);
                }
                if values.len() != shape[0] * shape[1] {
                    return Err(FieldError::EmptyGrid);
                }
            }
            FieldKind::Trig { terms, .. } => {
                for t in terms {
                    if t.freq == [0, 0] {
                        return Err(FieldError::ZeroFrequency);
                    }
                }
            }
            FieldKind::Constant(_) => {}
        }
        let field = Self { dim, kind, lo, hi };
        field.check_bounds()?;
        Ok(field)
    }

    pub fn constant(dim: usize, value: S) -> Self {
        Self::new(dim, FieldKind::Constant(value), value, value).unwrap()
    }

    /// 1D piecewise constant on equal cells of the unit interval.
    pub fn piecewise_1d(values: Vec<S>) -> Result<Self, FieldError> {
        let lo = values.iter().cloned().fold(S::infinity(), S::min);
        let hi = values.iter().cloned().fold(S::neg_infinity(), S::max);
        let m = values.len();
        Self::new(1, FieldKind::Piecewise { shape: [m, 1], values }, lo, hi)
    }

    /// Promote a 1D field to 2D, varying along the first axis only.
    pub fn into_dim2(mut self) -> Self {
        self.dim = 2;
        self
    }

    /// Evaluate on the unit cell coordinates (periodically extended).
    pub fn eval(&self, y: &[S]) -> S {
        debug_assert_eq!(y.len(), self.dim);
        match &self.kind {
            FieldKind::Constant(c) => *c,
            FieldKind::Piecewise { shape, values } => {
                let ix = cell_index(y[0], shape[0]);
                let iy = if self.dim == 2 {
                    cell_index(y[1], shape[1])
                } else {
                    0
                };
                values[iy * shape[0] + ix]
            }
            FieldKind::Trig { offset, terms } => {
                let two_pi = S::of(std::f64::consts::TAU);
                let mut acc = *offset;
                for t in terms {
                    let mut arg = S::of(t.freq[0] as f64) * y[0];
                    if self.dim == 2 {
                        arg += S::of(t.freq[1] as f64) * y[1];
                    }
                    acc += t.amp * (two_pi * arg + t.phase).cos();
                }
                acc
            }
        }
    }

    /// Exact cell average `∫_Q f(y) dy`.
    pub fn cell_average(&self) -> S {
        match &self.kind {
            FieldKind::Constant(c) => *c,
            FieldKind::Piecewise { values, .. } => {
                values.iter().cloned().sum::<S>() / S::from_usize(values.len()).unwrap()
            }
            // each nonzero integer frequency integrates to zero over Q
            FieldKind::Trig { offset, .. } => *offset,
        }
    }

    /// Max periodicity violation `|f(y + e_i) - f(y)|` over `n` seeded samples.
    pub fn sample_periodicity(&self, n: usize, seed: u64) -> S {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = S::zero();
        for _ in 0..n.max(1) {
            let y: Vec<S> = (0..self.dim).map(|_| S::of(rng.gen::<f64>())).collect();
            let base = self.eval(&y);
            for i in 0..self.dim {
                let mut shifted = y.clone();
                shifted[i] += S::one();
                worst = worst.max((self.eval(&shifted) - base).abs());
            }
        }
        worst
    }

    /// Jump locations of the field on the unit cell along axis `axis`
    /// (empty for smooth kinds).
    pub fn cell_breaks(&self, axis: usize) -> Vec<S> {
        match &self.kind {
            FieldKind::Piecewise { shape, .. } => {
                let m = shape[axis.min(1)];
                (0..=m).map(|j| S::of(j as f64 / m as f64)).collect()
            }
            _ => Vec::new(),
        }
    }

    fn check_bounds(&self) -> Result<(), FieldError> {
        let n = if self.dim == 1 { 1024 } else { 192 };
        let probe = |y: &[S]| -> Result<(), FieldError> {
            let v = self.eval(y);
            let slack = S::of(1e-12) * (S::one() + self.hi.abs().max(self.lo.abs()));
            if v < self.lo - slack || v > self.hi + slack {
                return Err(FieldError::BoundViolation {
                    value: v.as_f64(),
                    lo: self.lo.as_f64(),
                    hi: self.hi.as_f64(),
                });
            }
            Ok(())
        };
        if self.dim == 1 {
            for i in 0..n {
                probe(&[S::of((i as f64 + 0.5) / n as f64)])?;
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    probe(&[
                        S::of((i as f64 + 0.5) / n as f64),
                        S::of((j as f64 + 0.5) / n as f64),
                    ])?;
                }
            }
        }
        Ok(())
    }
}

fn cell_index<S: Scalar>(y: S, m: usize) -> usize {
    let mf = S::from_usize(m).unwrap();
    let frac = y - y.floor();
    let idx = (frac * mf).floor().as_f64() as i64;
    (idx.max(0) as usize).min(m - 1)
}

/// ε-scaling of a field, with the averaged limit as a sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Epsilon<S> {
    Value(S),
    Averaged,
}

impl<S: Scalar> Epsilon<S> {
    pub fn as_value(&self) -> Option<S> {
        match self {
            Epsilon::Value(e) => Some(*e),
            Epsilon::Averaged => None,
        }
    }
}

/// `f(x/ε)`, or the cell average for the limit problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledField<S> {
    pub base: CoefficientField<S>,
    pub epsilon: Epsilon<S>,
}

impl<S: Scalar> ScaledField<S> {
    pub fn new(base: CoefficientField<S>, epsilon: Epsilon<S>) -> Result<Self, FieldError> {
        if let Epsilon::Value(e) = epsilon {
            if e <= S::zero() {
                return Err(FieldError::BadEpsilon);
            }
        }
        Ok(Self { base, epsilon })
    }

    pub fn averaged(base: CoefficientField<S>) -> Self {
        Self { base, epsilon: Epsilon::Averaged }
    }

    pub fn eval(&self, x: &[S]) -> S {
        match self.epsilon {
            Epsilon::Averaged => self.base.cell_average(),
            Epsilon::Value(e) => {
                let y: Vec<S> = x.iter().map(|&xi| xi / e).collect();
                self.base.eval(&y)
            }
        }
    }

    /// Effective lower bound (the average for the AVERAGED sentinel).
    pub fn lo(&self) -> S {
        match self.epsilon {
            Epsilon::Averaged => self.base.cell_average(),
            Epsilon::Value(_) => self.base.lo,
        }
    }

    /// Effective upper bound.
    pub fn hi(&self) -> S {
        match self.epsilon {
            Epsilon::Averaged => self.base.cell_average(),
            Epsilon::Value(_) => self.base.hi,
        }
    }

    /// Jump locations inside `(a, b)` along axis `axis` (x coordinates).
    pub fn breaks_in(&self, a: S, b: S, axis: usize) -> Vec<S> {
        let e = match self.epsilon {
            Epsilon::Averaged => return Vec::new(),
            Epsilon::Value(e) => e,
        };
        let cell = self.base.cell_breaks(axis);
        if cell.is_empty() {
            return Vec::new();
        }
        // breaks at e*(j + c) for cell break c, integer j
        let mut out = Vec::new();
        let j0 = (a / e).floor().as_f64() as i64 - 1;
        let j1 = (b / e).ceil().as_f64() as i64 + 1;
        for j in j0..=j1 {
            for &c in &cell {
                let x = e * (S::of(j as f64) + c);
                if x > a && x < b {
                    out.push(x);
                }
            }
        }
        out.sort_by(|u, v| u.partial_cmp(v).unwrap());
        out.dedup_by(|u, v| (*u - *v).abs() < S::of(1e-14));
        out
    }
}


#[cfg(test)]
impl CoefficientField<f64> {
    fn values_vec(&self) -> Vec<f64> {
        match &self.kind {
            FieldKind::Piecewise { values, .. } => values.clone(),
            _ => panic!("not piecewise"),
        }
    }
}
