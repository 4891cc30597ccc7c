//! Sweep orchestration: solve eigenvalue problems across boundary conditions,
//! oscillation scales ε and indices k; fit the ε-decay rate and k-growth of
//! the homogenization error; audit the eigenvalue ordering chain.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coefficients::Epsilon;
use crate::fem2d::{reference_spectrum, Fem2Options};
use crate::oscillation::{log_log_fit, log_log_r2};
use crate::problems::{BcTag, BoundaryCondition, ProblemInstance};
use crate::scalar::Scalar;
use crate::solver1d::{solve_1d, ShootingOptions};
use crate::spectrum::{SolveError, Spectrum};

/// Solver settings shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig<S> {
    pub k_max: usize,
    /// Geometric sequence of oscillation scales (1/m values).
    pub eps_list: Vec<S>,
    /// Mesh resolution for 2D problems (Richardson reference uses nx and 2nx).
    pub nx: usize,
    pub shooting: ShootingOptions<S>,
    pub fem: Fem2Options<S>,
}

impl<S: Scalar> Default for SweepConfig<S> {
    fn default() -> Self {
        Self {
            k_max: 5,
            eps_list: (3..=6).map(|j| S::of(0.5f64.powi(j))).collect(),
            nx: 32,
            shooting: ShootingOptions::default(),
            fem: Fem2Options::default(),
        }
    }
}

/// One computed cell: `epsilon = None` is the averaged (limit) problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow<S> {
    pub bc: BcTag,
    pub k: usize,
    pub epsilon: Option<S>,
    pub lambda: S,
    pub tol: S,
    pub solver: String,
    pub wall_ms: f64,
    pub error_estimate: S,
}

/// All rows of one sweep plus identifying metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable<S> {
    pub family: String,
    pub p: S,
    pub dim: usize,
    pub rows: Vec<SweepRow<S>>,
}

impl<S: Scalar> SweepTable<S> {
    pub fn cell(&self, bc: BcTag, k: usize, epsilon: Option<S>) -> Option<&SweepRow<S>> {
        self.rows.iter().find(|r| {
            r.bc == bc
                && r.k == k
                && match (r.epsilon, epsilon) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).abs() < S::of(1e-14),
                    _ => false,
                }
        })
    }

    /// Table invariants: finite values, unique cells, averaged row per (bc,k).
    pub fn validate(&self) -> Result<(), SolveError> {
        for r in &self.rows {
            if !r.lambda.is_finite() {
                return Err(SolveError::Unsupported(format!(
                    "non-finite eigenvalue in cell (bc={:?}, k={}, eps={:?})",
                    r.bc, r.k, r.epsilon.map(|e| e.as_f64())
                )));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            for s in &self.rows[i + 1..] {
                let same_eps = match (r.epsilon, s.epsilon) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).abs() < S::of(1e-14),
                    _ => false,
                };
                if r.bc == s.bc && r.k == s.k && same_eps {
                    return Err(SolveError::Unsupported(format!(
                        "duplicate cell (bc={:?}, k={})",
                        r.bc, r.k
                    )));
                }
            }
        }
        let tags: Vec<BcTag> = {
            let mut t: Vec<BcTag> = self.rows.iter().map(|r| r.bc).collect();
            t.sort();
            t.dedup();
            t
        };
        for bc in tags {
            let ks: Vec<usize> = self
                .rows
                .iter()
                .filter(|r| r.bc == bc)
                .map(|r| r.k)
                .collect();
            for &k in &ks {
                if self.cell(bc, k, None).is_none() {
                    return Err(SolveError::Unsupported(format!(
                        "missing averaged row for (bc={bc:?}, k={k})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dimension dispatch: shooting in 1D, Richardson-extrapolated FEM in 2D.
pub fn solve_auto<S: Scalar>(
    prob: &ProblemInstance<S>,
    k_max: usize,
    cfg: &SweepConfig<S>,
) -> Result<Spectrum<S>, SolveError> {
    match prob.dim() {
        1 => solve_1d(prob, k_max, &cfg.shooting),
        _ => reference_spectrum(prob, cfg.nx, k_max, &cfg.fem),
    }
}

/// Run the full (bc, k, ε) grid plus the averaged limit for each bc.
/// Cells are independent; they are executed in a fixed order so the table is
/// deterministic for a given configuration.
pub fn sweep<S: Scalar>(
    base: &ProblemInstance<S>,
    bcs: &[BoundaryCondition<S>],
    cfg: &SweepConfig<S>,
    family: &str,
) -> Result<SweepTable<S>, SolveError> {
    let r0 = if cfg.eps_list.len() >= 2 {
        cfg.eps_list[1] / cfg.eps_list[0]
    } else {
        S::one()
    };
    for w in cfg.eps_list.windows(2) {
        if ((w[1] / w[0]) / r0 - S::one()).abs() > S::of(1e-9) {
            return Err(SolveError::Unsupported(
                "epsilon values must form a geometric sequence".into(),
            ));
        }
    }
    let mut rows = Vec::new();
    for bc in bcs {
        let prob = ProblemInstance::new(
            base.domain,
            base.op.clone(),
            base.rho.clone(),
            base.v.clone(),
            *bc,
        )
        .map_err(|e| SolveError::Unsupported(format!("bc {:?}: {e}", bc.tag())))?;
        let mut solve_into = |prob: &ProblemInstance<S>, eps: Option<S>| -> Result<(), SolveError> {
            let start = Instant::now();
            let spec = solve_auto(prob, cfg.k_max, cfg).map_err(|e| {
                SolveError::Unsupported(format!(
                    "cell (bc={:?}, eps={:?}): {e}",
                    bc.tag(),
                    eps.map(|v| v.as_f64())
                ))
            })?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            for entry in &spec.eigenvalues {
                rows.push(SweepRow {
                    bc: bc.tag(),
                    k: entry.k,
                    epsilon: eps,
                    lambda: entry.value,
                    tol: spec.tol,
                    solver: spec.solver.clone(),
                    wall_ms,
                    error_estimate: entry.error_estimate,
                });
            }
            Ok(())
        };
        solve_into(&prob.averaged(), None)?;
        for &eps in &cfg.eps_list {
            solve_into(&prob.at_epsilon(Epsilon::Value(eps)), Some(eps))?;
        }
    }
    let table = SweepTable {
        family: family.to_string(),
        p: base.p(),
        dim: base.dim(),
        rows,
    };
    table.validate()?;
    Ok(table)
}

/// Per-(bc, k) fit of `|λ_k^ε − λ_k| ≈ constant · ε^slope`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateCell<S> {
    pub bc: BcTag,
    pub k: usize,
    pub slope: S,
    pub constant: S,
    pub r2: S,
    /// All errors sit at the solver-tolerance floor; the fit is meaningless.
    pub degenerate: bool,
    /// Discretization error exceeds 10% of the smallest homogenization error;
    /// the cell is reported but not trusted.
    pub unresolved: bool,
    /// Linear-rate verdict (slope ≥ 0.9); only set when R² ≥ 0.95.
    pub meets_linear_rate: Option<bool>,
}

/// Per-bc growth of `λ_k` (and of the fitted constants) in k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit<S> {
    pub bc: BcTag,
    /// Exponent of `λ_k` vs `k` on the averaged rows.
    pub lambda_exponent: S,
    pub lambda_r2: S,
    /// Exponent of the fitted rate constants `C_k` vs `k`, when at least three
    /// resolved, non-degenerate cells exist.
    pub constant_exponent: Option<S>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport<S> {
    pub cells: Vec<RateCell<S>>,
    pub growth: Vec<GrowthFit<S>>,
}

/// Fit every (bc, k) cell of the table and the cross-k growth exponents.
pub fn fit_rate<S: Scalar>(table: &SweepTable<S>) -> Result<RateReport<S>, SolveError> {
    table.validate()?;
    let mut tags: Vec<BcTag> = table.rows.iter().map(|r| r.bc).collect();
    tags.sort();
    tags.dedup();
    let mut cells = Vec::new();
    let mut growth = Vec::new();
    for bc in tags {
        let mut ks: Vec<usize> = table
            .rows
            .iter()
            .filter(|r| r.bc == bc)
            .map(|r| r.k)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        for &k in &ks {
            let avg = table.cell(bc, k, None).unwrap();
            let mut eps = Vec::new();
            let mut errs = Vec::new();
            let mut disc = S::zero();
            for r in table.rows.iter().filter(|r| r.bc == bc && r.k == k) {
                if let Some(e) = r.epsilon {
                    eps.push(e);
                    errs.push((r.lambda - avg.lambda).abs());
                    disc = disc.max(r.error_estimate).max(avg.error_estimate);
                }
            }
            if eps.len() < 4 {
                return Err(SolveError::Unsupported(format!(
                    "rate fit for (bc={bc:?}, k={k}) needs at least 4 epsilon values"
                )));
            }
            let floor = S::of(1e-13).max(S::of(10.0) * avg.tol * S::one().max(avg.lambda.abs()));
            let degenerate = errs.iter().all(|&e| e <= floor);
            let min_err = errs.iter().cloned().fold(S::infinity(), S::min);
            let unresolved = !degenerate && disc > S::of(0.1) * min_err;
            let (slope, intercept) = log_log_fit(&eps, &errs);
            let r2 = log_log_r2(&eps, &errs);
            let meets_linear_rate = if degenerate || unresolved || r2 < S::of(0.95) {
                None
            } else {
                Some(slope >= S::of(0.9))
            };
            cells.push(RateCell {
                bc,
                k,
                slope,
                constant: intercept.exp(),
                r2,
                degenerate,
                unresolved,
                meets_linear_rate,
            });
        }
        // growth of the averaged eigenvalues in k
        let kx: Vec<S> = ks.iter().map(|&k| S::from_usize(k).unwrap()).collect();
        let ly: Vec<S> = ks
            .iter()
            .map(|&k| table.cell(bc, k, None).unwrap().lambda)
            .collect();
        if ks.len() >= 3 && ly.iter().all(|&v| v > S::zero()) {
            let (lambda_exponent, _) = log_log_fit(&kx, &ly);
            let lambda_r2 = log_log_r2(&kx, &ly);
            let usable: Vec<(S, S)> = cells
                .iter()
                .filter(|c| c.bc == bc && !c.degenerate && !c.unresolved && c.constant > S::zero())
                .map(|c| (S::from_usize(c.k).unwrap(), c.constant))
                .collect();
            let constant_exponent = if usable.len() >= 3 {
                let xs: Vec<S> = usable.iter().map(|u| u.0).collect();
                let ys: Vec<S> = usable.iter().map(|u| u.1).collect();
                Some(log_log_fit(&xs, &ys).0)
            } else {
                None
            };
            growth.push(GrowthFit { bc, lambda_exponent, lambda_r2, constant_exponent });
        }
    }
    Ok(RateReport { cells, growth })
}

/// One pairwise comparison from the ordering chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingCheck<S> {
    pub k: usize,
    pub lesser: BcTag,
    pub greater: BcTag,
    pub lesser_value: S,
    pub greater_value: S,
    pub ok: bool,
}

/// Audit the chain `λ_k^B ≤ λ_k^N ≤ min{λ_k^P, λ_k^R} ≤ max{λ_k^P, λ_k^R}
/// ≤ λ_k^D` together with `λ_k^B ≤ λ_k^S`, pairwise with slack
/// `1e-8·max(1, λ)`. Only pairs with both spectra present are emitted;
/// failures are data, not errors.
pub fn audit_ordering<S: Scalar>(
    spectra: &BTreeMap<BcTag, Spectrum<S>>,
    k_max: usize,
) -> Vec<OrderingCheck<S>> {
    use BcTag::*;
    let pairs = [
        (DependentBc, Neumann),
        (Neumann, NonFlux),
        (Neumann, Robin),
        (NonFlux, Dirichlet),
        (Robin, Dirichlet),
        (Neumann, Dirichlet),
        (DependentBc, Steklov),
    ];
    let mut out = Vec::new();
    for (lo, hi) in pairs {
        let (Some(sl), Some(sh)) = (spectra.get(&lo), spectra.get(&hi)) else {
            continue;
        };
        for k in 1..=k_max {
            let (Some(a), Some(b)) = (sl.value(k), sh.value(k)) else {
                continue;
            };
            let slack = S::of(1e-8) * S::one().max(b.abs());
            out.push(OrderingCheck {
                k,
                lesser: lo,
                greater: hi,
                lesser_value: a,
                greater_value: b,
                ok: a <= b + slack,
            });
        }
    }
    out
}
