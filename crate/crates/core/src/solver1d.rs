//! 1D eigenvalue solver based on a generalized Prüfer substitution.
//!
//! For `-(A φ_p(u'))' + V_ε φ_p(u) = λ ρ_ε φ_p(u)` on an interval, write
//! `u = R sin_p θ` and `a u' = R cos_p θ` with `a = A^{1/(p-1)}`. Then
//!
//! ```text
//! θ'       = |cos_p θ|^p / a  +  (λρ - V)/(p-1) · |sin_p θ|^p
//! (ln R)'  = φ_p(sin_p θ) cos_p θ · (1/a + (V - λρ)/(p-1))
//! ```
//!
//! The terminal phase `θ(L; λ)` is continuous and strictly increasing in `λ`,
//! and `u` vanishes exactly where `θ` crosses a multiple of `π_p`, so each
//! eigenvalue is the unique root of a monotone scalar equation solved by
//! bisection. Separated conditions (Dirichlet, Neumann, Robin) fix `θ(0)` and
//! a terminal target; the non-flux condition (periodic in 1D) is handled
//! through the extremes of the phase advance over all starting phases.

use crate::coefficients::{CoefficientField, ScaledField};
use crate::operators::OperatorCoeff;
use crate::problems::{BoundaryCondition, Domain, ProblemInstance};
use crate::ptrig::{pi_p, PTrig};
use crate::scalar::{phi_p, Scalar};
use crate::spectrum::{EigenEntry, SolveError, Spectrum};

/// Shooting-solver knobs.
#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions<S> {
    /// relative bracket width at which bisection stops
    pub tol: S,
    /// give up (`NoConvergence`) when the bracket has to grow past this
    pub lambda_cap: S,
    /// coarse grid size for the periodic min/max phase advance
    pub theta_samples: usize,
}

impl<S: Scalar> Default for ShootingOptions<S> {
    fn default() -> Self {
        Self { tol: S::of(1e-9), lambda_cap: S::of(1e8), theta_samples: 24 }
    }
}

/// Cash–Karp embedded Runge–Kutta 4(5) tableau.
const CK_A: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_B5: [f64; 6] = [
    37.0 / 378.0,
    0.0,
    250.0 / 621.0,
    125.0 / 594.0,
    0.0,
    512.0 / 1771.0,
];
const CK_B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

/// Coefficient closures of one problem instance, with the jump locations the
/// integrator must not step across.
struct Coeffs<'a, S> {
    p: S,
    pm1: S,
    a_field: &'a CoefficientField<S>,
    rho: &'a ScaledField<S>,
    v: &'a ScaledField<S>,
    trig: PTrig<S>,
    x0: S,
    x1: S,
    breaks: Vec<S>,
}

fn unscaled_breaks<S: Scalar>(f: &CoefficientField<S>, a: S, b: S) -> Vec<S> {
    let cell = f.cell_breaks(0);
    let mut out = Vec::new();
    if cell.is_empty() {
        return out;
    }
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
    out
}

impl<'a, S: Scalar> Coeffs<'a, S> {
    fn new(prob: &'a ProblemInstance<S>) -> Result<Self, SolveError> {
        let Domain::Interval { a, b } = prob.domain else {
            return Err(SolveError::Unsupported("1D solver needs an interval".into()));
        };
        let a_field = match &prob.op.coeff {
            OperatorCoeff::Scalar(f) => f,
            _ => {
                return Err(SolveError::Unsupported(
                    "1D solver needs an explicit scalar coefficient".into(),
                ))
            }
        };
        let mut breaks = prob.rho.breaks_in(a, b, 0);
        breaks.extend(prob.v.breaks_in(a, b, 0));
        breaks.extend(unscaled_breaks(a_field, a, b));
        breaks.sort_by(|u, v| u.partial_cmp(v).unwrap());
        breaks.dedup_by(|u, v| (*u - *v).abs() < S::of(1e-14));
        let p = prob.op.p;
        Ok(Self {
            p,
            pm1: p - S::one(),
            a_field,
            rho: &prob.rho,
            v: &prob.v,
            trig: PTrig::new(p),
            x0: a,
            x1: b,
            breaks,
        })
    }

    #[inline]
    fn a_of(&self, x: S) -> S {
        let av = self.a_field.eval(&[x]);
        if self.p == S::of(2.0) {
            av
        } else {
            av.powf(S::one() / self.pm1)
        }
    }

    /// Right-hand side for `(θ, ln R)`.
    #[inline]
    fn rhs(&self, x: S, theta: S, lambda: S) -> [S; 2] {
        let (sp, cp, sc) = self.trig.phase_terms(theta);
        let a = self.a_of(x);
        let drive = (lambda * self.rho.eval(&[x]) - self.v.eval(&[x])) / self.pm1;
        [cp / a + drive * sp, sc * (S::one() / a - drive)]
    }
}

/// One adaptive Cash–Karp integration of `(θ, ln R)` over `[x0, x1]`,
/// restarted at coefficient jumps. Calls `observe(x, y)` after every accepted
/// step (and at the start).
fn integrate<S: Scalar>(
    c: &Coeffs<S>,
    lambda: S,
    theta0: S,
    tol: S,
    mut observe: impl FnMut(S, [S; 2]),
) -> Result<[S; 2], SolveError> {
    let mut y = [theta0, S::zero()];
    observe(c.x0, y);
    let mut segs = Vec::with_capacity(c.breaks.len() + 2);
    segs.push(c.x0);
    segs.extend(c.breaks.iter().copied());
    segs.push(c.x1);
    let mut steps = 0usize;
    for w in segs.windows(2) {
        let (sa, sb) = (w[0], w[1]);
        if sb <= sa {
            continue;
        }
        let mut x = sa;
        let mut h = (sb - sa) * S::of(0.1);
        while x < sb {
            if x + h > sb {
                h = sb - x;
            }
            // Cash-Karp stages
            let k1 = c.rhs(x, y[0], lambda);
            let mut k = [[S::zero(); 2]; 6];
            k[0] = k1;
            for s in 1..6 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let aij = S::of(CK_A[s - 1][j]);
                    yi[0] += h * aij * kj[0];
                    yi[1] += h * aij * kj[1];
                }
                let xs = x + h * S::of(CK_A[s - 1].iter().sum::<f64>());
                k[s] = c.rhs(xs, yi[0], lambda);
            }
            let mut y5 = y;
            let mut y4 = y;
            for (j, kj) in k.iter().enumerate() {
                y5[0] += h * S::of(CK_B5[j]) * kj[0];
                y5[1] += h * S::of(CK_B5[j]) * kj[1];
                y4[0] += h * S::of(CK_B4[j]) * kj[0];
                y4[1] += h * S::of(CK_B4[j]) * kj[1];
            }
            let mut err = S::zero();
            for i in 0..2 {
                let scale = tol * (S::one() + y5[i].abs());
                err = err.max((y5[i] - y4[i]).abs() / scale);
            }
            if err <= S::one() {
                x += h;
                y = y5;
                observe(x, y);
            }
            let factor = if err > S::zero() {
                (S::of(0.9) * err.powf(S::of(-0.2))).min(S::of(5.0)).max(S::of(0.1))
            } else {
                S::of(5.0)
            };
            h *= factor;
            let hmin = (sb - sa) * S::of(1e-13);
            if h < hmin {
                h = hmin;
            }
            steps += 1;
            if steps > 4_000_000 {
                return Err(SolveError::Unsupported(
                    "step limit exceeded in the phase integrator".into(),
                ));
            }
        }
    }
    Ok(y)
}

fn terminal_phase<S: Scalar>(c: &Coeffs<S>, lambda: S, theta0: S, tol: S) -> Result<S, SolveError> {
    Ok(integrate(c, lambda, theta0, tol, |_, _| {})?[0])
}

/// Starting phase for a Robin condition `A φ_p(u') ν + β φ_p(u) = 0`:
/// the root of `φ_p(cos_p θ) = β φ_p(sin_p θ)` in `(0, π_p/2]`.
/// Independent of `A` because `A φ_p(u') = R^{p-1} φ_p(cos_p θ)`.
pub fn robin_start_phase<S: Scalar>(p: S, beta: S) -> S {
    let trig = PTrig::new(p);
    let half = trig.pi_p * S::of(0.5);
    if beta <= S::zero() {
        return half;
    }
    let h = |theta: S| -> S {
        let sc = trig.eval(theta);
        phi_p(sc.c, p) - beta * phi_p(sc.s, p)
    };
    let mut lo = S::of(1e-12);
    let mut hi = half;
    for _ in 0..200 {
        let mid = (lo + hi) * S::of(0.5);
        if h(mid) > S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= S::epsilon() * S::of(8.0) * (S::one() + hi.abs()) {
            break;
        }
    }
    (lo + hi) * S::of(0.5)
}

/// Safe level strictly below the whole spectrum.
fn floor_shift<S: Scalar>(prob: &ProblemInstance<S>) -> S {
    let vmax = prob.v.lo().abs().max(prob.v.hi().abs());
    -(vmax / prob.rho.lo()) - S::one()
}

/// Bisection on a monotone increasing `f` for `f(λ) = target`.
fn bisect_monotone<S: Scalar>(
    mut f: impl FnMut(S) -> Result<S, SolveError>,
    target: S,
    lo0: S,
    tol: S,
    cap: S,
    k: usize,
) -> Result<(S, S), SolveError> {
    let mut lo = lo0;
    let mut hi = lo0 + S::of(4.0);
    loop {
        if f(hi)? >= target {
            break;
        }
        let width = hi - lo;
        lo = hi;
        hi += width * S::of(2.0);
        if hi > cap {
            return Err(SolveError::NoConvergence { k, cap: cap.as_f64() });
        }
    }
    for _ in 0..400 {
        let mid = (lo + hi) * S::of(0.5);
        if f(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= tol * S::one().max(mid.abs()) {
            break;
        }
    }
    Ok(((lo + hi) * S::of(0.5), hi - lo))
}

/// Eigenvalues `λ_1 … λ_{k_max}` of a 1D problem under Dirichlet, Neumann,
/// Robin or non-flux (periodic) conditions.
pub fn solve_1d<S: Scalar>(
    prob: &ProblemInstance<S>,
    k_max: usize,
    opts: &ShootingOptions<S>,
) -> Result<Spectrum<S>, SolveError> {
    match prob.bc {
        BoundaryCondition::Dirichlet | BoundaryCondition::Neumann | BoundaryCondition::Robin { .. } => {
            solve_separated(prob, k_max, opts)
        }
        BoundaryCondition::NonFlux => solve_periodic(prob, k_max, opts),
        _ => Err(SolveError::Unsupported(
            "this boundary condition is two-dimensional only".into(),
        )),
    }
}

fn solve_separated<S: Scalar>(
    prob: &ProblemInstance<S>,
    k_max: usize,
    opts: &ShootingOptions<S>,
) -> Result<Spectrum<S>, SolveError> {
    let c = Coeffs::new(prob)?;
    let p = prob.op.p;
    let pip = pi_p(p);
    let theta0 = match prob.bc {
        BoundaryCondition::Dirichlet => S::zero(),
        BoundaryCondition::Neumann => pip * S::of(0.5),
        BoundaryCondition::Robin { beta } => robin_start_phase(p, beta),
        _ => unreachable!(),
    };
    let itol = opts.tol * S::of(0.01);
    let lo0 = floor_shift(prob);
    let mut entries = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let target = S::from_usize(k).unwrap() * pip - theta0;
        let (lambda, width) = bisect_monotone(
            |lam| terminal_phase(&c, lam, theta0, itol),
            target,
            lo0,
            opts.tol,
            opts.lambda_cap,
            k,
        )?;
        entries.push(EigenEntry {
            k,
            value: lambda,
            error_estimate: width,
            multiplicity: 1,
            variational_certain: true,
        });
    }
    Ok(Spectrum {
        eigenvalues: entries,
        solver: "prufer-shooting".to_string(),
        tol: opts.tol,
    })
}

/// Min/max phase advance `θ(L; θ0, λ) - θ0` over starting phases
/// `θ0 ∈ [0, π_p)` (the advance is π_p-periodic in θ0): coarse grid plus
/// golden-section refinement around the best cells.
fn advance_extremes<S: Scalar>(
    c: &Coeffs<S>,
    lambda: S,
    itol: S,
    samples: usize,
) -> Result<(S, S), SolveError> {
    let pip = c.trig.pi_p;
    let n = samples.max(8);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let t0 = pip * S::of(i as f64 / n as f64);
        vals.push(terminal_phase(c, lambda, t0, itol)? - t0);
    }
    let refine = |center_idx: usize, maximize: bool, c: &Coeffs<S>| -> Result<S, SolveError> {
        let step = pip / S::from_usize(n).unwrap();
        let mut a = step * S::of(center_idx as f64 - 1.0);
        let mut b = step * S::of(center_idx as f64 + 1.0);
        let phi = S::of(0.618_033_988_749_894_8);
        let mut x1 = b - (b - a) * phi;
        let mut x2 = a + (b - a) * phi;
        let eval = |t: S, c: &Coeffs<S>| -> Result<S, SolveError> {
            Ok(terminal_phase(c, lambda, t, itol)? - t)
        };
        let sign = if maximize { S::one() } else { -S::one() };
        let mut f1 = eval(x1, c)? * sign;
        let mut f2 = eval(x2, c)? * sign;
        // the extremum is quadratic, so the value error is ~(window)^2 and
        // 30 golden-section steps already put it far below the solve tolerance
        for _ in 0..30 {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - (b - a) * phi;
                f1 = eval(x1, c)? * sign;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + (b - a) * phi;
                f2 = eval(x2, c)? * sign;
            }
            if b - a < S::of(1e-10) * pip {
                break;
            }
        }
        Ok(eval((a + b) * S::of(0.5), c)? * sign * sign)
    };
    let imax = (0..n).max_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap()).unwrap();
    let imin = (0..n).min_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap()).unwrap();
    let mx = refine(imax, true, c)?.max(vals[imax]);
    let mn = refine(imin, false, c)?.min(vals[imin]);
    Ok((mn, mx))
}

/// Periodic (non-flux in 1D) eigenvalues through rotation-window edges:
/// `λ_1` solves `min_θ0 Δ(λ) = 0`; for `j ≥ 1`, `λ_{2j}` solves
/// `max_θ0 Δ(λ) = 2jπ_p` and `λ_{2j+1}` solves `min_θ0 Δ(λ) = 2jπ_p`.
/// For `p ≠ 2` the identification of the higher window edges with the
/// variational values is not settled, which the entries record.
fn solve_periodic<S: Scalar>(
    prob: &ProblemInstance<S>,
    k_max: usize,
    opts: &ShootingOptions<S>,
) -> Result<Spectrum<S>, SolveError> {
    let c = Coeffs::new(prob)?;
    let p = prob.op.p;
    let pip = pi_p(p);
    let itol = opts.tol * S::of(0.01);
    let lo0 = floor_shift(prob);
    let is_p2 = (p - S::of(2.0)).abs() < S::of(1e-12);
    let mut entries: Vec<EigenEntry<S>> = Vec::with_capacity(k_max);
    let mut k = 1usize;
    // λ_1: first closing of the rotation window at advance 0
    let (l1, w1) = bisect_monotone(
        |lam| Ok(advance_extremes(&c, lam, itol, opts.theta_samples)?.0),
        S::zero(),
        lo0,
        opts.tol,
        opts.lambda_cap,
        1,
    )?;
    entries.push(EigenEntry {
        k: 1,
        value: l1,
        error_estimate: w1,
        multiplicity: 1,
        variational_certain: true,
    });
    k += 1;
    let mut j = 1usize;
    while k <= k_max {
        let target = S::of(2.0 * j as f64) * pip;
        let (le, we) = bisect_monotone(
            |lam| Ok(advance_extremes(&c, lam, itol, opts.theta_samples)?.1),
            target,
            lo0,
            opts.tol,
            opts.lambda_cap,
            k,
        )?;
        entries.push(EigenEntry {
            k,
            value: le,
            error_estimate: we,
            multiplicity: 1,
            variational_certain: is_p2,
        });
        k += 1;
        if k > k_max {
            break;
        }
        let (lo_edge, wo) = bisect_monotone(
            |lam| Ok(advance_extremes(&c, lam, itol, opts.theta_samples)?.0),
            target,
            lo0,
            opts.tol,
            opts.lambda_cap,
            k,
        )?;
        entries.push(EigenEntry {
            k,
            value: lo_edge,
            error_estimate: wo,
            multiplicity: 1,
            variational_certain: is_p2,
        });
        k += 1;
        j += 1;
    }
    // flag coincident window edges
    for i in 1..entries.len() {
        let scale = S::one().max(entries[i].value.abs());
        if (entries[i].value - entries[i - 1].value).abs() <= S::of(1e-6) * scale {
            entries[i].multiplicity = 2;
            entries[i - 1].multiplicity = 2;
        }
    }
    Ok(Spectrum {
        eigenvalues: entries,
        solver: "prufer-periodic".to_string(),
        tol: opts.tol,
    })
}

/// Sampled eigenfunction for a separated-condition eigenvalue, normalized to
/// `F(u, ρ) = 1` with `u'(0) ≥ 0`. Returns node values on a uniform grid.
pub fn eigenfunction_1d<S: Scalar>(
    prob: &ProblemInstance<S>,
    lambda: S,
    n_nodes: usize,
    opts: &ShootingOptions<S>,
) -> Result<crate::problems::DiscreteFunction<S>, SolveError> {
    let c = Coeffs::new(prob)?;
    let p = prob.op.p;
    let pip = pi_p(p);
    let theta0 = match prob.bc {
        BoundaryCondition::Dirichlet => S::zero(),
        BoundaryCondition::Neumann => pip * S::of(0.5),
        BoundaryCondition::Robin { beta } => robin_start_phase(p, beta),
        _ => {
            return Err(SolveError::Unsupported(
                "eigenfunction sampling covers separated conditions".into(),
            ))
        }
    };
    let n = n_nodes.max(2);
    let (x0, x1) = (c.x0, c.x1);
    let h = (x1 - x0) / S::from_usize(n - 1).unwrap();
    // collect accepted integrator states, then interpolate phases linearly
    let mut trace: Vec<(S, [S; 2])> = Vec::new();
    integrate(&c, lambda, theta0, opts.tol * S::of(0.01), |x, y| {
        trace.push((x, y));
    })?;
    let mut nodes = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut cursor = 0usize;
    let log_r_max = trace
        .iter()
        .map(|t| t.1[1])
        .fold(S::neg_infinity(), S::max);
    for i in 0..n {
        let x = if i == n - 1 { x1 } else { x0 + h * S::from_usize(i).unwrap() };
        while cursor + 1 < trace.len() && trace[cursor + 1].0 < x {
            cursor += 1;
        }
        let (xa, ya) = trace[cursor];
        let (xb, yb) = trace[(cursor + 1).min(trace.len() - 1)];
        let t = if xb > xa { (x - xa) / (xb - xa) } else { S::zero() };
        let theta = ya[0] + (yb[0] - ya[0]) * t;
        let logr = ya[1] + (yb[1] - ya[1]) * t;
        nodes.push(x);
        values.push((logr - log_r_max).exp() * c.trig.eval(theta).s);
    }
    let u = crate::problems::DiscreteFunction::one_d(nodes, values);
    let mass = crate::problems::functional_f(&u, &prob.rho, p);
    if mass <= S::zero() {
        return Err(SolveError::ZeroDenominator);
    }
    Ok(u.scale(mass.powf(-S::one() / p)))
}
