//! Small special-function kernel: the regularized incomplete beta function,
//! used to evaluate the generalized arcsine `arcsin_p` in closed form.

use crate::scalar::Scalar;

/// Regularized incomplete beta `I_x(a, b)` with the complete beta value
/// `B(a, b)` supplied by the caller (our only use has it in closed form).
///
/// Continued-fraction evaluation (modified Lentz), with the usual symmetry
/// switch at `x > (a+1)/(a+b+2)` for fast convergence.
pub fn inc_beta_reg<S: Scalar>(x: S, a: S, b: S, complete: S) -> S {
    let zero = S::zero();
    let one = S::one();
    if x <= zero {
        return zero;
    }
    if x >= one {
        return one;
    }
    let switch = (a + one) / (a + b + S::of(2.0));
    if x < switch {
        let front = x.powf(a) * (one - x).powf(b) / (a * complete);
        front * beta_cf(x, a, b)
    } else {
        let front = (one - x).powf(b) * x.powf(a) / (b * complete);
        one - front * beta_cf(one - x, b, a)
    }
}

fn beta_cf<S: Scalar>(x: S, a: S, b: S) -> S {
    let one = S::one();
    let two = S::of(2.0);
    let tiny = S::of(1e-300).max(S::min_positive_value());
    let eps = S::epsilon() * S::of(4.0);

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..400 {
        let mf = S::from_usize(m).unwrap();
        let m2 = two * mf;
        // even step
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        // odd step
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn complete_half() -> f64 {
        // B(1/2, 1/2) = pi
        PI
    }

    #[test]
    fn matches_arcsine_law() {
        // I_x(1/2, 1/2) = (2/pi) asin(sqrt(x))
        for &x in &[1e-6, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999999] {
            let got = inc_beta_reg(x, 0.5, 0.5, complete_half());
            let want = 2.0 / PI * x.sqrt().asin();
            assert!((got - want).abs() < 1e-13, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn endpoints() {
        assert_eq!(inc_beta_reg(0.0, 0.5, 0.5, complete_half()), 0.0);
        assert_eq!(inc_beta_reg(1.0, 0.5, 0.5, complete_half()), 1.0);
    }

    #[test]
    fn uniform_case() {
        // a = b = 1: I_x = x, B(1,1) = 1
        for &x in &[0.2, 0.5, 0.8] {
            assert!((inc_beta_reg(x, 1.0f64, 1.0, 1.0) - x).abs() < 1e-14);
        }
    }
}
