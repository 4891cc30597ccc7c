//! JSON run configuration: schema, validation, and conversion into core
//! problem types. Unknown keys are rejected so a config typo cannot silently
//! change an experiment.

use homogeig::coefficients::{CoefficientField, FieldKind, TrigTerm};
use homogeig::harness::SweepConfig;
use homogeig::operators::{OperatorCoeff, OperatorSpec};
use homogeig::problems::{BoundaryCondition, Domain, ProblemInstance};
use homogeig::solver1d::ShootingOptions;
use homogeig::fem2d::Fem2Options;
use homogeig::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.to_string() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainCfg {
    Interval([Real; 2]),
    Rect([Real; 4]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldCfg {
    Constant(Real),
    /// Piecewise constant on equal cells of the unit cell (1D layout; on a
    /// rectangle it varies along the first axis).
    Piecewise(Vec<Real>),
    Trig {
        offset: Real,
        terms: Vec<TrigCfg>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigCfg {
    pub freq: [i32; 2],
    pub amp: Real,
    #[serde(default)]
    pub phase: Real,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BcCfg {
    Dirichlet,
    Neumann,
    Robin { beta: Real },
    NonFlux,
    DependentBc,
    Steklov,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    #[serde(default = "default_tol")]
    pub tol: Real,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_lambda_cap")]
    pub lambda_cap: Real,
}

fn default_tol() -> Real {
    1e-9
}
fn default_nx() -> usize {
    32
}
fn default_k_max() -> usize {
    5
}
fn default_lambda_cap() -> Real {
    1e8
}

impl Default for SolverCfg {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            nx: default_nx(),
            k_max: default_k_max(),
            lambda_cap: default_lambda_cap(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub eps: Vec<Real>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscCfg {
    pub eps: Vec<Real>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    pub domain: DomainCfg,
    pub p: Real,
    /// Scalar coefficient A(x) of the operator; defaults to 1.
    #[serde(default)]
    pub a: Option<FieldCfg>,
    pub rho: FieldCfg,
    pub v: FieldCfg,
    pub bcs: Vec<BcCfg>,
    #[serde(default)]
    pub solver: SolverCfg,
    #[serde(default)]
    pub sweep: Option<SweepCfg>,
    #[serde(default)]
    pub oscillation: Option<OscCfg>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Canonical serialization used for the cache key.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn domain(&self) -> Result<Domain<Real>, ConfigError> {
        match self.domain {
            DomainCfg::Interval([a, b]) => {
                if !(b > a) {
                    return Err(invalid("domain", "interval needs a < b"));
                }
                Ok(Domain::Interval { a, b })
            }
            DomainCfg::Rect([x0, y0, x1, y1]) => {
                if !(x1 > x0 && y1 > y0) {
                    return Err(invalid("domain", "rect needs x0 < x1 and y0 < y1"));
                }
                Ok(Domain::Rect { x0, y0, x1, y1 })
            }
        }
    }

    fn build_field(
        cfg: &FieldCfg,
        dim: usize,
        field: &'static str,
    ) -> Result<CoefficientField<Real>, ConfigError> {
        let built = match cfg {
            FieldCfg::Constant(c) => Ok(CoefficientField::constant(dim, *c)),
            FieldCfg::Piecewise(values) => CoefficientField::piecewise_1d(values.clone())
                .map(|f| if dim == 2 { f.into_dim2() } else { f }),
            FieldCfg::Trig { offset, terms } => {
                let terms: Vec<TrigTerm<Real>> = terms
                    .iter()
                    .map(|t| TrigTerm { freq: t.freq, amp: t.amp, phase: t.phase })
                    .collect();
                let amp_sum: Real = terms.iter().map(|t| t.amp.abs()).sum();
                CoefficientField::new(
                    dim,
                    FieldKind::Trig { offset: *offset, terms },
                    *offset - amp_sum,
                    *offset + amp_sum,
                )
            }
        };
        built.map_err(|e| invalid(field, e))
    }

    pub fn operator(&self) -> Result<OperatorSpec<Real>, ConfigError> {
        let dim = self.domain()?.dim();
        if !(self.p > 1.0) {
            return Err(invalid("p", "exponent must exceed 1"));
        }
        match &self.a {
            None => Ok(OperatorSpec::p_laplacian(dim, self.p)),
            Some(cfg) => {
                let a = Self::build_field(cfg, dim, "a")?;
                if !(a.lo > 0.0) {
                    return Err(invalid("a", "operator coefficient must be positive"));
                }
                let (alpha, beta) = (a.lo, a.hi);
                OperatorSpec::new(self.p, OperatorCoeff::Scalar(a), alpha, beta)
                    .map_err(|e| invalid("a", e))
            }
        }
    }

    pub fn boundary_conditions(&self) -> Result<Vec<BoundaryCondition<Real>>, ConfigError> {
        if self.bcs.is_empty() {
            return Err(invalid("bcs", "at least one boundary condition required"));
        }
        self.bcs
            .iter()
            .map(|bc| {
                Ok(match bc {
                    BcCfg::Dirichlet => BoundaryCondition::Dirichlet,
                    BcCfg::Neumann => BoundaryCondition::Neumann,
                    BcCfg::Robin { beta } => {
                        if *beta < 0.0 {
                            return Err(invalid("bcs", "robin beta must be nonnegative"));
                        }
                        BoundaryCondition::Robin { beta: *beta }
                    }
                    BcCfg::NonFlux => BoundaryCondition::NonFlux,
                    BcCfg::DependentBc => BoundaryCondition::DependentBc,
                    BcCfg::Steklov => BoundaryCondition::Steklov,
                })
            })
            .collect()
    }

    /// The base problem (averaged weights) under the first boundary condition.
    pub fn base_problem(&self) -> Result<ProblemInstance<Real>, ConfigError> {
        self.problem_with(self.boundary_conditions()?[0])
    }

    pub fn problem_with(
        &self,
        bc: BoundaryCondition<Real>,
    ) -> Result<ProblemInstance<Real>, ConfigError> {
        let domain = self.domain()?;
        let dim = domain.dim();
        let rho = Self::build_field(&self.rho, dim, "rho")?;
        let v = Self::build_field(&self.v, dim, "v")?;
        ProblemInstance::new(
            domain,
            self.operator()?,
            homogeig::coefficients::ScaledField::averaged(rho),
            homogeig::coefficients::ScaledField::averaged(v),
            bc,
        )
        .map_err(|e| invalid("bcs", e))
    }

    pub fn sweep_config(&self) -> Result<SweepConfig<Real>, ConfigError> {
        let eps = self
            .sweep
            .as_ref()
            .map(|s| s.eps.clone())
            .ok_or_else(|| invalid("sweep", "missing sweep.eps list"))?;
        if eps.len() < 4 {
            return Err(invalid("sweep", "need at least 4 epsilon values"));
        }
        if eps.iter().any(|&e| !(e > 0.0)) {
            return Err(invalid("sweep", "epsilon values must be positive"));
        }
        Ok(SweepConfig {
            k_max: self.solver.k_max,
            eps_list: eps,
            nx: self.solver.nx,
            shooting: ShootingOptions {
                tol: self.solver.tol,
                lambda_cap: self.solver.lambda_cap,
                ..ShootingOptions::default()
            },
            fem: Fem2Options { tol: self.solver.tol.min(1e-8), seed: self.seed, ..Fem2Options::default() },
        })
    }

    /// Solver settings alone (no sweep section required).
    pub fn solve_config(&self) -> SweepConfig<Real> {
        SweepConfig {
            k_max: self.solver.k_max,
            eps_list: Vec::new(),
            nx: self.solver.nx,
            shooting: ShootingOptions {
                tol: self.solver.tol,
                lambda_cap: self.solver.lambda_cap,
                ..ShootingOptions::default()
            },
            fem: Fem2Options { tol: self.solver.tol.min(1e-8), seed: self.seed, ..Fem2Options::default() },
        }
    }
}
