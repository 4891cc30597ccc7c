//! Quadrature kernels: fixed Gauss–Legendre rules, composite integration with
//! breakpoint splitting, an adaptive Simpson routine for oracle-grade values,
//! a tanh–sinh rule for endpoint-singular integrands, and a degree-4 triangle
//! rule with uniform sub-triangle refinement.

use crate::scalar::Scalar;

/// 8-point Gauss–Legendre nodes/weights on [-1, 1] (exact through degree 15).
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

/// Gauss–Legendre on `[a, b]` with the 8-point rule.
pub fn gauss<S: Scalar>(a: S, b: S, f: impl Fn(S) -> S) -> S {
    let half = (b - a) * S::of(0.5);
    let mid = (a + b) * S::of(0.5);
    let mut acc = S::zero();
    for &(x, w) in &GL8 {
        acc += S::of(w) * f(mid + half * S::of(x));
    }
    acc * half
}

/// Composite Gauss–Legendre over `[a, b]`, split at the sorted interior
/// `breaks` and further into `sub` panels per smooth piece.
pub fn composite_gauss<S: Scalar>(a: S, b: S, breaks: &[S], sub: usize, f: impl Fn(S) -> S) -> S {
    let mut pts = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    for &t in breaks {
        if t > a && t < b {
            pts.push(t);
        }
    }
    pts.push(b);
    pts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut acc = S::zero();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / S::from_usize(sub.max(1)).unwrap();
        for j in 0..sub.max(1) {
            let x0 = lo + h * S::from_usize(j).unwrap();
            acc += gauss(x0, x0 + h, &f);
        }
    }
    acc
}

/// Adaptive Simpson to absolute tolerance `tol`.
pub fn adaptive_simpson<S: Scalar>(a: S, b: S, tol: S, f: impl Fn(S) -> S) -> S {
    fn simpson<S: Scalar>(a: S, fa: S, b: S, fb: S, fm: S) -> S {
        (b - a) / S::of(6.0) * (fa + S::of(4.0) * fm + fb)
    }
    fn rec<S: Scalar>(
        f: &impl Fn(S) -> S,
        a: S,
        b: S,
        fa: S,
        fb: S,
        fm: S,
        whole: S,
        tol: S,
        depth: usize,
    ) -> S {
        let m = (a + b) * S::of(0.5);
        let lm = (a + m) * S::of(0.5);
        let rm = (m + b) * S::of(0.5);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= S::of(15.0) * tol {
            left + right + delta / S::of(15.0)
        } else {
            let half = tol * S::of(0.5);
            rec(f, a, m, fa, fm, flm, left, half, depth - 1)
                + rec(f, m, b, fm, fb, frm, right, half, depth - 1)
        }
    }
    let m = (a + b) * S::of(0.5);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    rec(&f, a, b, fa, fb, fm, whole, tol, 48)
}

/// Tanh–sinh quadrature on `(a, b)`; tolerates integrable endpoint
/// singularities. The integrand receives `(x, d)` where `d` is the distance
/// from `x` to the *nearer* endpoint, computed without cancellation, so
/// singular factors like `x^{-1/2}` can be evaluated as `d^{-1/2}` at full
/// precision. `levels = 10` gives ~1e-12 for the integrands we use.
pub fn tanh_sinh<S: Scalar>(a: S, b: S, levels: usize, f: impl Fn(S, S) -> S) -> S {
    let len = b - a;
    let half = len * S::of(0.5);
    let pi_half = S::of(std::f64::consts::FRAC_PI_2);
    let eval = |t: S| -> S {
        // x = mid + half*tanh(u) with u = pi/2 sinh t; the distance to the
        // endpoint is len/(1 + e^{2|u|}), which stays accurate where the
        // direct form of x would round to the endpoint
        let u = t.sinh() * pi_half;
        let d = len / (S::one() + (S::of(2.0) * u.abs()).exp());
        if d <= S::zero() {
            return S::zero();
        }
        let x = if t >= S::zero() { b - d } else { a + d };
        let c = u.cosh();
        let w = pi_half * t.cosh() / (c * c);
        let v = f(x, d);
        if v.is_finite() {
            v * w
        } else {
            S::zero()
        }
    };
    let tmax = S::of(4.5);
    let hh = S::of(1.0 / (1u64 << levels.min(14)) as f64);
    let mut acc = eval(S::zero());
    let mut t = hh;
    while t <= tmax {
        acc += eval(t) + eval(-t);
        t += hh;
    }
    acc * half * hh
}

/// Degree-4 triangle rule (6 points, barycentric), weights summing to 1.
pub const TRI6: [([f64; 3], f64); 6] = [
    (
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        0.223381589678011,
    ),
    (
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
        0.109951743655322,
    ),
];

/// Integrate `f(x, y)` over the triangle `(p0, p1, p2)` with the degree-4 rule
/// applied on `4^sub` congruent sub-triangles.
pub fn triangle_quad<S: Scalar>(
    p0: [S; 2],
    p1: [S; 2],
    p2: [S; 2],
    sub: usize,
    f: &impl Fn(S, S) -> S,
) -> S {
    if sub == 0 {
        let area = ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs()
            * S::of(0.5);
        let mut acc = S::zero();
        for &(bc, w) in &TRI6 {
            let x = S::of(bc[0]) * p0[0] + S::of(bc[1]) * p1[0] + S::of(bc[2]) * p2[0];
            let y = S::of(bc[0]) * p0[1] + S::of(bc[1]) * p1[1] + S::of(bc[2]) * p2[1];
            acc += S::of(w) * f(x, y);
        }
        return acc * area;
    }
    let m01 = [(p0[0] + p1[0]) * S::of(0.5), (p0[1] + p1[1]) * S::of(0.5)];
    let m12 = [(p1[0] + p2[0]) * S::of(0.5), (p1[1] + p2[1]) * S::of(0.5)];
    let m20 = [(p2[0] + p0[0]) * S::of(0.5), (p2[1] + p0[1]) * S::of(0.5)];
    triangle_quad(p0, m01, m20, sub - 1, f)
        + triangle_quad(m01, p1, m12, sub - 1, f)
        + triangle_quad(m20, m12, p2, sub - 1, f)
        + triangle_quad(m01, m12, m20, sub - 1, f)
}
