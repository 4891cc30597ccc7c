//! Scalar abstraction for the numerical kernels.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Lossy view as `f64`, mainly for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// `|s|^{p-2} s`, the p-Laplacian flux nonlinearity; returns 0 at `s = 0`.
pub fn phi_p<S: Scalar>(s: S, p: S) -> S {
    if s == S::zero() {
        S::zero()
    } else {
        s.abs().powf(p - S::of(2.0)) * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_convert() {
        assert_eq!(<f64 as Scalar>::of(1.5), 1.5);
        assert_eq!(<f32 as Scalar>::of(0.25), 0.25f32);
    }

    #[test]
    fn phi_p_basics() {
        assert_eq!(phi_p(0.0f64, 3.0), 0.0);
        assert!((phi_p(2.0f64, 3.0) - 4.0).abs() < 1e-15);
        assert!((phi_p(-2.0f64, 3.0) + 4.0).abs() < 1e-15);
        // p = 2 is the identity
        assert_eq!(phi_p(-1.75f64, 2.0), -1.75);
    }
}
