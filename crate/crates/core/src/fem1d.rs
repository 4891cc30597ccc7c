//! P1 finite elements on an interval (p = 2 only), used as an independent
//! cross-check of the shooting solver and for mesh-refined reference values.

use crate::coefficients::{Epsilon, FieldKind, ScaledField};
use crate::linalg::{dense_gevp, SymSparse};
use crate::operators::OperatorCoeff;
use crate::problems::{BoundaryCondition, Domain, ProblemInstance};
use crate::quad::composite_gauss;
use crate::scalar::Scalar;
use crate::spectrum::{EigenEntry, SolveError, Spectrum};

fn element_integral<S: Scalar>(
    w: &ScaledField<S>,
    x0: S,
    x1: S,
    f: impl Fn(S) -> S,
) -> S {
    let breaks = w.breaks_in(x0, x1, 0);
    composite_gauss(x0, x1, &breaks, 1, |x| w.eval(&[x]) * f(x))
}

/// Assembled 1D pencil matrices on `n + 1` uniform nodes.
pub struct Assembly1<S> {
    pub nodes: Vec<S>,
    pub k: SymSparse<S>,
    pub m_rho: SymSparse<S>,
    pub m_v: SymSparse<S>,
}

pub fn assemble_1d<S: Scalar>(
    prob: &ProblemInstance<S>,
    n: usize,
) -> Result<Assembly1<S>, SolveError> {
    if (prob.op.p - S::of(2.0)).abs() > S::of(1e-12) {
        return Err(SolveError::Unsupported("1D FEM supports p = 2 only".into()));
    }
    let Domain::Interval { a, b } = prob.domain else {
        return Err(SolveError::Unsupported("1D FEM needs an interval".into()));
    };
    let OperatorCoeff::Scalar(a_field) = &prob.op.coeff else {
        return Err(SolveError::Unsupported(
            "1D FEM needs an explicit scalar coefficient".into(),
        ));
    };
    let h = (b - a) / S::from_usize(n).unwrap();
    for w in [&prob.rho, &prob.v] {
        if let Epsilon::Value(e) = w.epsilon {
            if !matches!(w.base.kind, FieldKind::Constant(_)) && h > e / S::of(4.0) {
                return Err(SolveError::MeshTooCoarse {
                    diameter: h.as_f64(),
                    limit: (e / S::of(4.0)).as_f64(),
                });
            }
        }
    }
    let nodes: Vec<S> = (0..=n)
        .map(|i| a + h * S::from_usize(i).unwrap())
        .collect();
    let a_scaled = ScaledField::averaged(a_field.clone());
    let mut k_trip = Vec::new();
    let mut rho_trip = Vec::new();
    let mut v_trip = Vec::new();
    for i in 0..n {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        // stiffness: hat slopes are ±1/h
        let int_a = element_integral(&a_scaled, x0, x1, |_| S::one()) / (h * h);
        k_trip.push((i, i, int_a));
        k_trip.push((i + 1, i + 1, int_a));
        k_trip.push((i + 1, i, -int_a));
        // weighted masses with the exact hat products
        for (w, trip) in [(&prob.rho, &mut rho_trip), (&prob.v, &mut v_trip)] {
            let ll = element_integral(w, x0, x1, |x| {
                let t = (x1 - x) / h;
                t * t
            });
            let rr = element_integral(w, x0, x1, |x| {
                let t = (x - x0) / h;
                t * t
            });
            let lr = element_integral(w, x0, x1, |x| (x1 - x) * (x - x0) / (h * h));
            trip.push((i, i, ll));
            trip.push((i + 1, i + 1, rr));
            trip.push((i + 1, i, lr));
        }
    }
    let m = n + 1;
    Ok(Assembly1 {
        nodes,
        k: SymSparse::from_triplets(m, &k_trip),
        m_rho: SymSparse::from_triplets(m, &rho_trip),
        m_v: SymSparse::from_triplets(m, &v_trip),
    })
}

/// Solve the 1D pencil for the chosen boundary condition (p = 2).
pub fn solve_fem1<S: Scalar>(
    prob: &ProblemInstance<S>,
    n: usize,
    k: usize,
    tol: S,
) -> Result<Spectrum<S>, SolveError> {
    let asm = assemble_1d(prob, n)?;
    let m = asm.nodes.len();
    let mut a = asm.k.add_scaled(&asm.m_v, S::one());
    let b = asm.m_rho.clone();
    // congruence map per boundary condition
    let map: Vec<Option<usize>> = match prob.bc {
        BoundaryCondition::Dirichlet => {
            let mut map = vec![None; m];
            for (new, slot) in map.iter_mut().skip(1).take(m - 2).enumerate() {
                *slot = Some(new);
            }
            map
        }
        BoundaryCondition::Neumann | BoundaryCondition::Robin { .. } => {
            if let BoundaryCondition::Robin { beta } = prob.bc {
                // boundary term β(|u(a)|² + |u(b)|²)
                a = a.add_scaled(
                    &SymSparse::from_triplets(m, &[(0, 0, beta), (m - 1, m - 1, beta)]),
                    S::one(),
                );
            }
            (0..m).map(Some).collect()
        }
        BoundaryCondition::NonFlux => {
            // periodic in 1D: last node identified with the first
            let mut map: Vec<Option<usize>> = (0..m).map(Some).collect();
            map[m - 1] = Some(0);
            map
        }
        _ => {
            return Err(SolveError::Unsupported(
                "this boundary condition is two-dimensional only".into(),
            ))
        }
    };
    let n_new = map.iter().flatten().copied().max().map_or(0, |v| v + 1);
    if k > n_new {
        return Err(SolveError::Unsupported(format!(
            "requested {k} eigenvalues from a {n_new}-dof pencil"
        )));
    }
    let ar = reduce_map(&a, &map, n_new);
    let br = reduce_map(&b, &map, n_new);
    let (vals, _) = dense_gevp(&ar.to_dense(), &br.to_dense()).ok_or(SolveError::SingularPencil)?;
    let entries = (0..k)
        .map(|i| EigenEntry {
            k: i + 1,
            value: vals[i],
            error_estimate: tol,
            multiplicity: 1,
            variational_certain: true,
        })
        .collect();
    Ok(Spectrum { eigenvalues: entries, solver: "fem1d".to_string(), tol })
}

fn reduce_map<S: Scalar>(a: &SymSparse<S>, map: &[Option<usize>], n_new: usize) -> SymSparse<S> {
    let mut trip = Vec::new();
    for i in 0..a.n {
        let Some(mi) = map[i] else { continue };
        for t in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_idx[t];
            if j > i {
                continue;
            }
            let Some(mj) = map[j] else { continue };
            let v = a.vals[t];
            if mi == mj && i != j {
                trip.push((mi, mi, v + v));
            } else {
                trip.push((mi.max(mj), mi.min(mj), v));
            }
        }
    }
    SymSparse::from_triplets(n_new, &trip)
}

/// Richardson-extrapolated reference (`λ* = (4 λ_{h/2} - λ_h)/3`).
pub fn reference_spectrum_1d<S: Scalar>(
    prob: &ProblemInstance<S>,
    n: usize,
    k: usize,
    tol: S,
) -> Result<Spectrum<S>, SolveError> {
    let coarse = solve_fem1(prob, n, k, tol)?;
    let fine = solve_fem1(prob, 2 * n, k, tol)?;
    let third = S::of(1.0 / 3.0);
    let entries = (0..k)
        .map(|i| {
            let (c, f) = (coarse.eigenvalues[i].value, fine.eigenvalues[i].value);
            EigenEntry {
                k: i + 1,
                value: (S::of(4.0) * f - c) * third,
                error_estimate: ((f - c) * third).abs(),
                multiplicity: 1,
                variational_certain: true,
            }
        })
        .collect();
    Ok(Spectrum { eigenvalues: entries, solver: "fem1d-richardson".to_string(), tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientField;
    use crate::operators::OperatorSpec;
    use std::f64::consts::PI;

    fn prob(
        rho: ScaledField<f64>,
        v: ScaledField<f64>,
        bc: BoundaryCondition<f64>,
    ) -> ProblemInstance<f64> {
        ProblemInstance::new(
            Domain::unit_interval(),
            OperatorSpec::p_laplacian(1, 2.0),
            rho,
            v,
            bc,
        )
        .unwrap()
    }

    fn cf(v: f64) -> ScaledField<f64> {
        ScaledField::averaged(CoefficientField::constant(1, v))
    }

    #[test]
    fn dirichlet_matches_sine_spectrum() {
        let p = prob(cf(1.0), cf(0.0), BoundaryCondition::Dirichlet);
        let spec = reference_spectrum_1d(&p, 64, 4, 1e-10).unwrap();
        for k in 1..=4usize {
            let want = (k as f64 * PI).powi(2);
            let got = spec.value(k).unwrap();
            assert!((got - want).abs() / want < 1e-5, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn neumann_and_periodic_constants() {
        let n = solve_fem1(&prob(cf(2.0), cf(3.0), BoundaryCondition::Neumann), 40, 1, 1e-10).unwrap();
        assert!((n.value(1).unwrap() - 1.5).abs() < 1e-10);
        let per = solve_fem1(&prob(cf(1.0), cf(1.0), BoundaryCondition::NonFlux), 64, 3, 1e-10).unwrap();
        assert!((per.value(1).unwrap() - 1.0).abs() < 1e-10);
        let want = 1.0 + 4.0 * PI * PI;
        assert!((per.value(2).unwrap() - want).abs() / want < 1e-2);
        // periodic pair stays close even discretely
        assert!((per.value(3).unwrap() - per.value(2).unwrap()).abs() / want < 1e-2);
    }

    #[test]
    fn robin_bounded_by_neumann_and_dirichlet() {
        let n = solve_fem1(&prob(cf(1.0), cf(1.0), BoundaryCondition::Neumann), 48, 3, 1e-10).unwrap();
        let d = solve_fem1(&prob(cf(1.0), cf(1.0), BoundaryCondition::Dirichlet), 48, 3, 1e-10)
            .unwrap();
        let r = solve_fem1(
            &prob(cf(1.0), cf(1.0), BoundaryCondition::Robin { beta: 2.0 }),
            48,
            3,
            1e-10,
        )
        .unwrap();
        for k in 1..=3usize {
            assert!(r.value(k).unwrap() >= n.value(k).unwrap() - 1e-10);
            assert!(r.value(k).unwrap() <= d.value(k).unwrap() + 1e-10);
        }
    }

    #[test]
    fn piecewise_weight_matches_shooting() {
        let rho = ScaledField::new(
            CoefficientField::piecewise_1d(vec![1.0, 3.0]).unwrap(),
            Epsilon::Value(0.25),
        )
        .unwrap();
        let p = prob(rho, cf(1.0), BoundaryCondition::Dirichlet);
        let fem = reference_spectrum_1d(&p, 128, 3, 1e-10).unwrap();
        let shoot = crate::solver1d::solve_1d(&p, 3, &crate::solver1d::ShootingOptions::default())
            .unwrap();
        for k in 1..=3usize {
            let (a, b) = (fem.value(k).unwrap(), shoot.value(k).unwrap());
            assert!((a - b).abs() / b < 1e-4, "k={k}: fem {a} vs shooting {b}");
        }
    }
}
