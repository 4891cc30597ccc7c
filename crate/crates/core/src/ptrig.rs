//! Generalized p-trigonometric functions.
//!
//! `sin_p` is the inverse of `arcsin_p(s) = ∫_0^s (1 - t^p)^{-1/p} dt` on
//! `[0, π_p/2]`, extended to the line by the usual odd/even reflections with
//! period `2π_p`, where `π_p = 2π / (p sin(π/p))`. The pair
//! `(sin_p, cos_p := sin_p')` satisfies `|sin_p|^p + |cos_p|^p = 1` and drives
//! the Prüfer phase equation of the 1D solver.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::special::inc_beta_reg;

/// The half-period scale `π_p = 2π / (p sin(π/p))`.
pub fn pi_p<S: Scalar>(p: S) -> S {
    let pi = S::of(std::f64::consts::PI);
    S::of(2.0) * pi / (p * (pi / p).sin())
}

/// `sin_p` and `cos_p` at one phase value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCosP<S> {
    pub s: S,
    pub c: S,
}

/// Invertible representation of `sin_p` on the fundamental quarter period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PTrig<S> {
    pub p: S,
    pub pi_p: S,
    /// `sin_p` sampled on a uniform phase grid over `[0, π_p/2]`.
    table: Vec<S>,
    /// `cos_p` at the same nodes, `(1 - table[i]^p)^{1/p}`; this is the exact
    /// derivative of `sin_p`, enabling cubic Hermite evaluation off the table.
    deriv: Vec<S>,
    exact_p2: bool,
}

const TABLE_N: usize = 2048;
/// Cells adjacent to `π_p/2` where `sin_p = 1 - C (π_p/2 - θ)^{p/(p-1)}` is
/// not smooth enough for Hermite interpolation (p > 2); invert there instead.
const CORNER_CELLS: usize = 32;

impl<S: Scalar> PTrig<S> {
    pub fn new(p: S) -> Self {
        assert!(p > S::one(), "p must exceed 1");
        let pip = pi_p(p);
        let exact_p2 = (p - S::of(2.0)).abs() < S::of(1e-14);
        let mut table = Vec::with_capacity(TABLE_N + 1);
        if exact_p2 {
            for i in 0..=TABLE_N {
                let theta = S::of(i as f64 / TABLE_N as f64) * pip * S::of(0.5);
                table.push(theta.sin());
            }
        } else {
            let complete = S::of(std::f64::consts::PI) / (S::of(std::f64::consts::PI) / p).sin();
            let quarter = pip * S::of(0.5);
            let mut s = S::zero();
            table.push(S::zero());
            for i in 1..=TABLE_N {
                let theta = S::of(i as f64 / TABLE_N as f64) * quarter;
                s = invert_arcsin(p, complete, quarter, theta, s);
                table.push(s);
            }
            // the endpoint is exact by construction
            *table.last_mut().unwrap() = S::one();
        }
        let deriv = table
            .iter()
            .map(|&s| (S::one() - s.powf(p)).max(S::zero()).powf(S::one() / p))
            .collect();
        Self { p, pi_p: pip, table, deriv, exact_p2 }
    }

    /// `sin_p(theta)` on the quarter period `[0, π_p/2]`.
    fn quarter_sin(&self, theta: S) -> S {
        let quarter = self.pi_p * S::of(0.5);
        if theta <= S::zero() {
            return S::zero();
        }
        if theta >= quarter {
            return S::one();
        }
        if self.exact_p2 {
            return theta.sin();
        }
        let pos = theta / quarter * S::of(TABLE_N as f64);
        let i = pos.floor().as_f64() as usize;
        let i = i.min(TABLE_N - 1);
        let frac = pos - S::of(i as f64);
        if i + CORNER_CELLS >= TABLE_N {
            let guess = self.table[i] * (S::one() - frac) + self.table[i + 1] * frac;
            let complete =
                S::of(std::f64::consts::PI) / (S::of(std::f64::consts::PI) / self.p).sin();
            return invert_arcsin(self.p, complete, quarter, theta, guess);
        }
        // cubic Hermite off the table: values and exact derivatives at nodes
        let h = quarter / S::of(TABLE_N as f64);
        let (y0, y1) = (self.table[i], self.table[i + 1]);
        let (m0, m1) = (self.deriv[i] * h, self.deriv[i + 1] * h);
        let t = frac;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = S::of(2.0);
        let three = S::of(3.0);
        (two * t3 - three * t2 + S::one()) * y0
            + (t3 - two * t2 + t) * m0
            + (three * t2 - two * t3) * y1
            + (t3 - t2) * m1
    }

    /// Fold an arbitrary phase into the fundamental quarter period, returning
    /// `(sin sign, cos sign, folded phase)`.
    fn fold(&self, theta: S) -> (S, S, S) {
        let period = self.pi_p * S::of(2.0);
        let mut t = theta % period;
        if t < S::zero() {
            t += period;
        }
        let half = self.pi_p;
        let quarter = self.pi_p * S::of(0.5);
        if t < quarter {
            (S::one(), S::one(), t)
        } else if t < half {
            (S::one(), -S::one(), half - t)
        } else if t < half + quarter {
            (-S::one(), -S::one(), t - half)
        } else {
            (-S::one(), S::one(), period - t)
        }
    }

    /// `sin_p` and its derivative at arbitrary phase, via reflections.
    pub fn eval(&self, theta: S) -> SinCosP<S> {
        if self.exact_p2 {
            return SinCosP { s: theta.sin(), c: theta.cos() };
        }
        let (s_sign, c_sign, s_arg) = self.fold(theta);
        let sv = self.quarter_sin(s_arg);
        let cv = (S::one() - sv.powf(self.p)).max(S::zero()).powf(S::one() / self.p);
        SinCosP { s: s_sign * sv, c: c_sign * cv }
    }

    /// `(|sin_p|^p, |cos_p|^p, φ_p(sin_p)·cos_p)` — the combinations entering
    /// the Prüfer phase and radius equations. Uses `|cos_p|^p = 1 - |sin_p|^p`
    /// to avoid redundant powers.
    pub fn phase_terms(&self, theta: S) -> (S, S, S) {
        if self.exact_p2 {
            let (s, c) = (theta.sin(), theta.cos());
            return (s * s, c * c, s * c);
        }
        let (s_sign, c_sign, s_arg) = self.fold(theta);
        let sv = self.quarter_sin(s_arg);
        let sp = sv.powf(self.p);
        let cp = (S::one() - sp).max(S::zero());
        let cv = cp.powf(S::one() / self.p);
        // φ_p(sin_p)·cos_p = |sin_p|^{p-1} sign(sin_p) cos_p = (sp/sv)·s·c
        let cross = if sv > S::zero() {
            sp / sv * cv * s_sign * c_sign
        } else {
            S::zero()
        };
        (sp, cp, cross)
    }
}

/// Solve `arcsin_p(s) = theta` on `[0, 1]` by safeguarded Newton.
fn invert_arcsin<S: Scalar>(p: S, complete: S, quarter: S, theta: S, guess: S) -> S {
    let arcsin = |s: S| -> S {
        quarter * inc_beta_reg(s.powf(p), S::one() / p, S::one() - S::one() / p, complete)
    };
    let mut lo = S::zero();
    let mut hi = S::one();
    let mut s = guess.max(S::of(1e-14)).min(S::one() - S::of(1e-14));
    for _ in 0..60 {
        let f = arcsin(s) - theta;
        if f > S::zero() {
            hi = s;
        } else {
            lo = s;
        }
        // f'(s) = (1 - s^p)^{-1/p}
        let deriv_inv = (S::one() - s.powf(p)).max(S::zero()).powf(S::one() / p);
        let step = f * deriv_inv;
        let mut next = s - step;
        if !(next > lo && next < hi) {
            next = (lo + hi) * S::of(0.5);
        }
        if (next - s).abs() <= S::epsilon() * S::of(4.0) * (S::one() + s.abs()) {
            return next;
        }
        s = next;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pi_p_values() {
        assert!((pi_p(2.0f64) - PI).abs() < 1e-12);
        // p = 4: 2 pi / (4 sin(pi/4)) = pi / sqrt(2)
        assert!((pi_p(4.0f64) - PI / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((pi_p(4.0f64) - 2.221441469).abs() < 1e-8);
        // p = 1.5
        let want = 2.0 * PI / (1.5 * (2.0 * PI / 3.0).sin());
        assert!((pi_p(1.5f64) - want).abs() < 1e-12);
    }

    #[test]
    fn pi_p_matches_integral_oracle() {
        // pi_p = 2 \int_0^1 (1 - s^p)^{-1/p} ds, tanh-sinh handles the endpoint
        for &p in &[1.5f64, 2.0, 3.0, 4.0] {
            let oracle = 2.0
                * crate::quad::tanh_sinh(0.0, 1.0, 11, |s: f64, d| {
                    // near s = 1 evaluate 1 - s^p = -expm1(p ln(1 - d))
                    let tail = if s > 0.5 {
                        -(p * (-d).ln_1p()).exp_m1()
                    } else {
                        1.0 - s.powf(p)
                    };
                    tail.powf(-1.0 / p)
                });
            assert!(
                (pi_p(p) - oracle).abs() < 1e-10,
                "p={p}: {} vs {oracle}",
                pi_p(p)
            );
        }
    }

    #[test]
    fn endpoints_and_bounds() {
        for &p in &[1.5f64, 2.0, 3.0, 4.0] {
            let t = PTrig::new(p);
            assert_eq!(t.eval(0.0).s, 0.0);
            assert!((t.eval(t.pi_p / 2.0).s - 1.0).abs() < 1e-13);
            for i in 0..200 {
                let theta = -2.0 * t.pi_p + 4.0 * t.pi_p * i as f64 / 199.0;
                assert!(t.eval(theta).s.abs() <= 1.0 + 1e-13);
            }
        }
    }

    #[test]
    fn p_pythagorean_identity() {
        for &p in &[1.5f64, 2.0, 3.0, 4.0] {
            let t = PTrig::new(p);
            for i in 0..=400 {
                let theta = 2.0 * t.pi_p * i as f64 / 400.0;
                let sc = t.eval(theta);
                let lhs = sc.s.abs().powf(p) + sc.c.abs().powf(p);
                assert!((lhs - 1.0).abs() < 1e-10, "p={p} theta={theta}: {lhs}");
            }
        }
    }

    #[test]
    fn p2_matches_classic() {
        let t = PTrig::new(2.0f64);
        for i in 0..100 {
            let theta = -3.0 + 0.1 * i as f64;
            assert!((t.eval(theta).s - theta.sin()).abs() < 1e-12);
            assert!((t.eval(theta).c - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn reflections_are_c1() {
        // continuity of s and c across the quarter and half period joints
        for &p in &[1.5f64, 3.0] {
            let t = PTrig::new(p);
            let h = 1e-7;
            for joint in [t.pi_p / 2.0, t.pi_p, 1.5 * t.pi_p, 2.0 * t.pi_p] {
                let a = t.eval(joint - h);
                let b = t.eval(joint + h);
                assert!((a.s - b.s).abs() < 1e-4, "s jump at {joint} (p={p})");
                assert!((a.c - b.c).abs() < 1e-3, "c jump at {joint} (p={p})");
            }
        }
    }

    #[test]
    fn hermite_matches_direct_inversion() {
        // interpolated sin_p agrees with a from-scratch inversion of arcsin_p
        for &p in &[1.5f64, 3.0, 4.0] {
            let t = PTrig::new(p);
            let complete = PI / (PI / p).sin();
            let quarter = t.pi_p / 2.0;
            for i in 0..=1000 {
                let theta = quarter * i as f64 / 1000.0;
                let got = t.eval(theta).s;
                let want = super::invert_arcsin(p, complete, quarter, theta, theta / quarter);
                assert!((got - want).abs() < 1e-10, "p={p} theta={theta}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn phase_terms_match_eval() {
        for &p in &[1.5f64, 2.0, 3.0] {
            let t = PTrig::new(p);
            for i in 0..=250 {
                let theta = -t.pi_p + 3.0 * t.pi_p * i as f64 / 250.0;
                let sc = t.eval(theta);
                let (sp, cp, cross) = t.phase_terms(theta);
                assert!((sp - sc.s.abs().powf(p)).abs() < 1e-12);
                assert!((cp - sc.c.abs().powf(p)).abs() < 1e-12);
                assert!((cross - crate::scalar::phi_p(sc.s, p) * sc.c).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn table_free_consistency() {
        // sin_p really inverts arcsin_p: arcsin(sin_p(theta)) == theta
        let p = 3.0f64;
        let t = PTrig::new(p);
        let complete = PI / (PI / p).sin();
        let quarter = t.pi_p / 2.0;
        for i in 1..40 {
            let theta = quarter * i as f64 / 40.0;
            let s = t.eval(theta).s;
            let back = quarter * inc_beta_reg(s.powf(p), 1.0 / p, 1.0 - 1.0 / p, complete);
            assert!((back - theta).abs() < 1e-10, "theta={theta} back={back}");
        }
    }
}
