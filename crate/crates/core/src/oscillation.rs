//! Empirical study of oscillating-weight integrals on an interval.
//!
//! For a periodic weight `g` with cell average `ḡ`, the gap
//! `|∫ (g(x/ε) - ḡ) |u|^p dx|` is O(ε) uniformly over bounded sets of test
//! functions, with the natural normalization `ε‖u'‖_p^p` for zero-trace
//! functions and `ε‖|u|^p‖_{W^{1,1}}` otherwise. This module measures those
//! gaps over seeded families of test functions and fits the decay rate.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{CoefficientField, Epsilon, ScaledField};
use crate::problems::Domain;
use crate::quad::composite_gauss;
use crate::scalar::Scalar;
use crate::spectrum::SolveError;

/// One analytic test function on the probe interval.
#[derive(Debug, Clone)]
pub enum TestFn<S> {
    /// `amp · exp(1 - 1/(1 - t²))` for `t = (x - center)/width` inside the
    /// support, plus an affine tail `offset + slope·x`.
    Bump { center: S, width: S, amp: S, offset: S, slope: S },
    /// Piecewise linear through `(nodes[i], values[i])`.
    Linear { nodes: Vec<S>, values: Vec<S> },
    /// `amp · sin(k π (x - a)/(b - a))`; zero trace for integer `k`.
    Sine { a: S, b: S, k: usize, amp: S },
}

impl<S: Scalar> TestFn<S> {
    pub fn eval(&self, x: S) -> S {
        match self {
            TestFn::Bump { center, width, amp, offset, slope } => {
                let t = (x - *center) / *width;
                let mut v = *offset + *slope * x;
                if t.abs() < S::one() {
                    v += *amp * (S::one() - S::one() / (S::one() - t * t)).exp();
                }
                v
            }
            TestFn::Linear { nodes, values } => {
                if x <= nodes[0] {
                    return values[0];
                }
                if x >= *nodes.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = nodes.partition_point(|&n| n <= x).min(nodes.len() - 1);
                let (x0, x1) = (nodes[i - 1], nodes[i]);
                let t = (x - x0) / (x1 - x0);
                values[i - 1] * (S::one() - t) + values[i] * t
            }
            TestFn::Sine { a, b, k, amp } => {
                let pi = S::of(std::f64::consts::PI);
                *amp * (pi * S::from_usize(*k).unwrap() * (x - *a) / (*b - *a)).sin()
            }
        }
    }

    pub fn deriv(&self, x: S) -> S {
        match self {
            TestFn::Bump { center, width, amp, slope, .. } => {
                let t = (x - *center) / *width;
                let mut d = *slope;
                if t.abs() < S::one() {
                    let q = S::one() - t * t;
                    let phi = (S::one() - S::one() / q).exp();
                    d += *amp * phi * (-S::of(2.0) * t / (q * q)) / *width;
                }
                d
            }
            TestFn::Linear { nodes, values } => {
                if x <= nodes[0] || x >= *nodes.last().unwrap() {
                    return S::zero();
                }
                let i = nodes.partition_point(|&n| n <= x).min(nodes.len() - 1);
                (values[i] - values[i - 1]) / (nodes[i] - nodes[i - 1])
            }
            TestFn::Sine { a, b, k, amp } => {
                let pi = S::of(std::f64::consts::PI);
                let w = pi * S::from_usize(*k).unwrap() / (*b - *a);
                *amp * w * (w * (x - *a)).cos()
            }
        }
    }

    /// Kink locations of the function (quadrature split points).
    pub fn breaks(&self) -> Vec<S> {
        match self {
            TestFn::Bump { center, width, .. } => vec![*center - *width, *center + *width],
            TestFn::Linear { nodes, .. } => nodes.clone(),
            TestFn::Sine { .. } => Vec::new(),
        }
    }

    /// Multiply the function by `t` (for homogeneity checks).
    pub fn scaled(&self, t: S) -> Self {
        match self {
            TestFn::Bump { center, width, amp, offset, slope } => TestFn::Bump {
                center: *center,
                width: *width,
                amp: *amp * t,
                offset: *offset * t,
                slope: *slope * t,
            },
            TestFn::Linear { nodes, values } => TestFn::Linear {
                nodes: nodes.clone(),
                values: values.iter().map(|&v| v * t).collect(),
            },
            TestFn::Sine { a, b, k, amp } => TestFn::Sine { a: *a, b: *b, k: *k, amp: *amp * t },
        }
    }

    /// True when the function vanishes at both interval endpoints.
    pub fn has_zero_trace(&self, a: S, b: S) -> bool {
        let tol = S::of(1e-13);
        self.eval(a).abs() <= tol && self.eval(b).abs() <= tol
    }
}

/// A periodic weight, an interval, an exponent and a seeded family of test
/// functions (all zero-trace when `zero_trace` is set).
#[derive(Debug, Clone)]
pub struct OscillationProbe<S> {
    pub g: CoefficientField<S>,
    pub domain: Domain<S>,
    pub p: S,
    pub zero_trace: bool,
    pub family: Vec<TestFn<S>>,
}

impl<S: Scalar> OscillationProbe<S> {
    /// Seeded family of 32 test functions: 16 smooth bumps and 16 random
    /// piecewise-linear functions, with traces forced to zero when requested.
    pub fn seeded(
        g: CoefficientField<S>,
        domain: Domain<S>,
        p: S,
        zero_trace: bool,
        seed: u64,
    ) -> Result<Self, SolveError> {
        let Domain::Interval { a, b } = domain else {
            return Err(SolveError::Unsupported(
                "oscillation probes are one-dimensional".into(),
            ));
        };
        let len = b - a;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = |lo: f64, hi: f64| S::of(lo + (hi - lo) * rng.gen::<f64>());
        let mut family = Vec::with_capacity(32);
        for _ in 0..16 {
            let width = unit(0.08, 0.35) * len;
            let center = a + width + unit(0.0, 1.0) * (len - S::of(2.0) * width);
            let amp = unit(0.3, 1.5);
            let (offset, slope) = if zero_trace {
                (S::zero(), S::zero())
            } else {
                (unit(-1.0, 1.0), unit(-1.0, 1.0))
            };
            family.push(TestFn::Bump { center, width, amp, offset, slope });
        }
        for _ in 0..16 {
            let m = 6 + (unit(0.0, 1.0).as_f64() * 6.0) as usize;
            let nodes: Vec<S> = (0..=m)
                .map(|i| a + len * S::of(i as f64 / m as f64))
                .collect();
            let mut values: Vec<S> = (0..=m).map(|_| unit(-1.0, 1.0)).collect();
            if zero_trace {
                values[0] = S::zero();
                values[m] = S::zero();
            }
            family.push(TestFn::Linear { nodes, values });
        }
        let probe = Self { g, domain, p, zero_trace, family };
        debug_assert!(
            !zero_trace || probe.family.iter().all(|u| u.has_zero_trace(a, b)),
            "zero-trace family contains a function with nonzero trace"
        );
        Ok(probe)
    }

    fn interval(&self) -> (S, S) {
        match self.domain {
            Domain::Interval { a, b } => (a, b),
            _ => unreachable!("probes are constructed on intervals"),
        }
    }

    /// Split points for quadrature: weight jumps plus function kinks.
    fn split_points(&self, u: &TestFn<S>, eps: S) -> Vec<S> {
        let (a, b) = self.interval();
        let scaled = ScaledField { base: self.g.clone(), epsilon: Epsilon::Value(eps) };
        let mut pts = scaled.breaks_in(a, b, 0);
        pts.extend(u.breaks().into_iter().filter(|&x| x > a && x < b));
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup_by(|x, y| (*x - *y).abs() < S::of(1e-14));
        pts
    }

    /// `|∫ (g(x/ε) - ḡ) |u|^p dx|`.
    pub fn gap(&self, u: &TestFn<S>, eps: S) -> S {
        let (a, b) = self.interval();
        let scaled = ScaledField { base: self.g.clone(), epsilon: Epsilon::Value(eps) };
        let mean = self.g.cell_average();
        let p = self.p;
        let pts = self.split_points(u, eps);
        composite_gauss(a, b, &pts, 4, |x| {
            (scaled.eval(&[x]) - mean) * u.eval(x).abs().powf(p)
        })
        .abs()
    }

    /// Gap normalized by the theoretical ε-rate: `ε‖u'‖_p^p` for zero-trace
    /// probes, `ε(‖u‖_p^p + p∫|u|^{p-1}|u'|)` otherwise.
    pub fn ratio(&self, u: &TestFn<S>, eps: S) -> Result<S, SolveError> {
        let (a, b) = self.interval();
        let p = self.p;
        let pts = self.split_points(u, eps);
        let den = if self.zero_trace {
            composite_gauss(a, b, &pts, 4, |x| u.deriv(x).abs().powf(p))
        } else {
            composite_gauss(a, b, &pts, 4, |x| {
                let (uv, dv) = (u.eval(x), u.deriv(x));
                uv.abs().powf(p) + p * uv.abs().powf(p - S::one()) * dv.abs()
            })
        };
        if den * eps <= S::of(1e-300) {
            return Err(SolveError::ZeroDenominator);
        }
        Ok(self.gap(u, eps) / (eps * den))
    }

    /// Largest gap over the family at one ε (deterministic reduction order).
    pub fn max_gap(&self, eps: S) -> S {
        self.family
            .iter()
            .map(|u| self.gap(u, eps))
            .fold(S::zero(), S::max)
    }

    /// Least-squares slope and constant of `log(max gap)` against `log ε`.
    /// Returns `(slope, constant)` with `max gap ≈ constant · ε^slope`.
    pub fn fit_rate(&self, eps_list: &[S]) -> Result<(S, S), SolveError> {
        if eps_list.len() < 4 {
            return Err(SolveError::Unsupported(
                "rate fits need at least 4 epsilon values".into(),
            ));
        }
        let r0 = eps_list[1] / eps_list[0];
        for w in eps_list.windows(2) {
            if ((w[1] / w[0]) / r0 - S::one()).abs() > S::of(1e-9) {
                return Err(SolveError::Unsupported(
                    "epsilon values must form a geometric sequence".into(),
                ));
            }
        }
        let gaps: Vec<S> = eps_list.iter().map(|&e| self.max_gap(e)).collect();
        if gaps.iter().all(|&g| g < S::of(1e-13)) {
            return Err(SolveError::DegenerateFit);
        }
        let (slope, intercept) = log_log_fit(eps_list, &gaps);
        Ok((slope, intercept.exp()))
    }

    /// Empirical constant `c` in the two-sided quotient bound
    /// `F(u, ρ̄)/F(u, ρ_ε) ≤ 1 + c ε (F(u, V̄) + ‖u'‖_p^p)/F(u, ρ̄)`
    /// for one test function (`ρ = g`, potential `v`).
    pub fn quotient_bound_constant(
        &self,
        u: &TestFn<S>,
        v: &CoefficientField<S>,
        eps: S,
    ) -> Result<S, SolveError> {
        let (a, b) = self.interval();
        let p = self.p;
        let pts = self.split_points(u, eps);
        let rho_eps = ScaledField { base: self.g.clone(), epsilon: Epsilon::Value(eps) };
        let f_eps = composite_gauss(a, b, &pts, 4, |x| {
            rho_eps.eval(&[x]) * u.eval(x).abs().powf(p)
        });
        let f_bar = self.g.cell_average()
            * composite_gauss(a, b, &pts, 4, |x| u.eval(x).abs().powf(p));
        let f_v = v.cell_average() * composite_gauss(a, b, &pts, 4, |x| u.eval(x).abs().powf(p));
        let g_u = composite_gauss(a, b, &pts, 4, |x| u.deriv(x).abs().powf(p));
        if f_eps <= S::zero() || f_bar <= S::zero() {
            return Err(SolveError::ZeroDenominator);
        }
        let lhs = f_bar / f_eps - S::one();
        Ok(lhs * f_bar / (eps * (f_v + g_u)))
    }
}

/// Ordinary least squares of `ln y` against `ln x`; returns `(slope, intercept)`.
pub fn log_log_fit<S: Scalar>(xs: &[S], ys: &[S]) -> (S, S) {
    let n = S::from_usize(xs.len()).unwrap();
    let lx: Vec<S> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<S> = ys.iter().map(|y| y.max(S::of(1e-300)).ln()).collect();
    let mx = lx.iter().cloned().sum::<S>() / n;
    let my = ly.iter().cloned().sum::<S>() / n;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (*x - mx) * (*x - mx);
        sxy += (*x - mx) * (*y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Coefficient of determination for the log-log fit.
pub fn log_log_r2<S: Scalar>(xs: &[S], ys: &[S]) -> S {
    let (slope, intercept) = log_log_fit(xs, ys);
    let n = S::from_usize(xs.len()).unwrap();
    let ly: Vec<S> = ys.iter().map(|y| y.max(S::of(1e-300)).ln()).collect();
    let my = ly.iter().cloned().sum::<S>() / n;
    let mut ss_res = S::zero();
    let mut ss_tot = S::zero();
    for (x, y) in xs.iter().zip(&ly) {
        let pred = intercept + slope * x.ln();
        ss_res += (*y - pred) * (*y - pred);
        ss_tot += (*y - my) * (*y - my);
    }
    if ss_tot <= S::zero() {
        return S::zero();
    }
    S::one() - ss_res / ss_tot
}
