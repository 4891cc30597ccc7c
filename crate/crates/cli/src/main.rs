//! Configuration-driven front end: solves, sweeps, rate fits, ordering
//! audits, oscillation probes and SVG plots, with a config-hash cache for
//! byte-identical reruns.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver error.

mod config;
mod output;
mod plot;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use homogeig::coefficients::Epsilon;
use homogeig::harness::{audit_ordering, fit_rate, solve_auto, sweep, SweepRow, SweepTable};
use homogeig::operators::check_hypotheses;
use homogeig::oscillation::OscillationProbe;
use homogeig::problems::{BcTag, BoundaryCondition, Domain};
use homogeig::spectrum::SolveError;
use homogeig::{Real, Spectrum};
use serde::{Deserialize, Serialize};

use config::{ConfigError, RunConfig};
use output::{cache_key, to_json, OutputDir, RatesArtifact};

#[derive(Parser)]
#[command(name = "homogeig", about = "Eigenvalue homogenization laboratory", version)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (env HOMOGEIG_OUT overrides).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Upper bound on concurrent solver cells (execution is sequential and
    /// deterministic; the flag is an admission cap, not a guarantee).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Recompute even when a cached result exists.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one spectrum for a single boundary condition.
    Solve {
        /// Boundary condition tag: D, N, R, P, B or S.
        #[arg(long)]
        bc: String,
        /// Oscillation scale; omit together with --averaged for the limit.
        #[arg(long, conflicts_with = "averaged")]
        eps: Option<Real>,
        /// Solve the averaged (homogenized) problem.
        #[arg(long)]
        averaged: bool,
        /// Override the configured number of eigenvalues.
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Run the full (bc, k, eps) sweep from the config.
    Sweep,
    /// Fit homogenization rates from the sweep (cache hit or fresh run).
    Rates,
    /// Audit the eigenvalue ordering chain at a fixed eps.
    Audit {
        /// Scale at which to compare; defaults to the first sweep value.
        #[arg(long)]
        eps: Option<Real>,
    },
    /// Measure oscillating-integral gaps for the configured weight.
    Oscillation,
    /// Render SVG plots from a rates report file.
    Plot {
        /// Path to a rates JSON artifact produced by `rates`.
        #[arg(long)]
        report: PathBuf,
    },
    /// Sample the structural hypotheses of the configured operator.
    CheckOperator,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let out_root = match std::env::var_os("HOMOGEIG_OUT") {
        Some(dir) => PathBuf::from(dir),
        None => cli.out.clone(),
    };
    let out = match OutputDir::new(out_root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory: {e}");
            return 1;
        }
    };

    if let Command::Plot { report } = &cli.command {
        return cmd_plot(report, &out);
    }

    let Some(config_path) = &cli.config else {
        eprintln!("error: --config is required for this command");
        return 1;
    };
    let mut cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let result = match &cli.command {
        Command::Solve { bc, eps, averaged, k_max } => {
            cmd_solve(&cfg, &out, cli.no_cache, bc, *eps, *averaged, *k_max)
        }
        Command::Sweep => cmd_sweep(&cfg, &out, cli.no_cache).map(|_| ()),
        Command::Rates => cmd_rates(&cfg, &out, cli.no_cache),
        Command::Audit { eps } => cmd_audit(&cfg, &out, cli.no_cache, *eps),
        Command::Oscillation => cmd_oscillation(&cfg, &out, cli.no_cache),
        Command::Plot { .. } => unreachable!("handled above"),
        Command::CheckOperator => cmd_check_operator(&cfg),
    };
    match result {
        Ok(()) => 0,
        Err(CmdError::Config(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(CmdError::Solver(e)) => {
            eprintln!("solver error: {e}");
            2
        }
        Err(CmdError::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum CmdError {
    Config(ConfigError),
    Solver(SolveError),
    Io(std::io::Error),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}
impl From<SolveError> for CmdError {
    fn from(e: SolveError) -> Self {
        CmdError::Solver(e)
    }
}
impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

fn parse_bc(cfg: &RunConfig, tag: &str) -> Result<BoundaryCondition<Real>, ConfigError> {
    let bcs = cfg.boundary_conditions()?;
    let wanted = match tag.to_ascii_uppercase().as_str() {
        "D" | "DIRICHLET" => BcTag::Dirichlet,
        "N" | "NEUMANN" => BcTag::Neumann,
        "R" | "ROBIN" => BcTag::Robin,
        "P" | "NONFLUX" | "NON_FLUX" => BcTag::NonFlux,
        "B" | "DEPENDENT" | "DEPENDENT_BC" => BcTag::DependentBc,
        "S" | "STEKLOV" => BcTag::Steklov,
        other => {
            return Err(ConfigError::Invalid {
                field: "bc",
                reason: format!("unknown boundary condition tag `{other}`"),
            })
        }
    };
    bcs.into_iter()
        .find(|b| b.tag() == wanted)
        .ok_or(ConfigError::Invalid {
            field: "bc",
            reason: format!("{} is not in the configured bcs list", wanted.short()),
        })
}

fn spectrum_rows(bc: BcTag, eps: Option<Real>, spec: &Spectrum, wall_ms: f64) -> Vec<SweepRow<Real>> {
    spec.eigenvalues
        .iter()
        .map(|e| SweepRow {
            bc,
            k: e.k,
            epsilon: eps,
            lambda: e.value,
            tol: spec.tol,
            solver: spec.solver.clone(),
            wall_ms,
            error_estimate: e.error_estimate,
        })
        .collect()
}

fn cmd_solve(
    cfg: &RunConfig,
    out: &OutputDir,
    no_cache: bool,
    bc_tag: &str,
    eps: Option<Real>,
    averaged: bool,
    k_max: Option<usize>,
) -> Result<(), CmdError> {
    if eps.is_none() && !averaged {
        return Err(ConfigError::Invalid {
            field: "eps",
            reason: "pass --eps VALUE or --averaged".into(),
        }
        .into());
    }
    let bc = parse_bc(cfg, bc_tag)?;
    let mut scfg = cfg.solve_config();
    if let Some(k) = k_max {
        scfg.k_max = k;
    }
    let base = cfg.problem_with(bc)?;
    let prob = match eps {
        Some(e) => base.at_epsilon(Epsilon::Value(e)),
        None => base.averaged(),
    };
    let eps_label = match eps {
        Some(e) => format!("{e}"),
        None => "averaged".to_string(),
    };
    let key = cache_key(
        &cfg.canonical(),
        &format!("solve:{}:{}:{}", bc.tag().short(), eps_label, scfg.k_max),
    );
    let rows: Vec<SweepRow<Real>> = match (!no_cache).then(|| out.cache_get(&key)).flatten() {
        Some(rows) => {
            eprintln!("cache: hit ({key})");
            rows
        }
        None => {
            let start = Instant::now();
            let spec = solve_auto(&prob, scfg.k_max, &scfg)?;
            let rows = spectrum_rows(bc.tag(), eps, &spec, start.elapsed().as_secs_f64() * 1e3);
            out.cache_put(&key, &rows)?;
            rows
        }
    };
    output::print_rows(&rows);
    let stem = format!("{}-solve-{}-{}", cfg.experiment, bc.tag().short(), eps_label);
    out.write(&format!("{stem}.json"), &to_json(&rows))?;
    out.write(&format!("{stem}.csv"), &output::rows_to_csv(&cfg.experiment, &rows))?;
    Ok(())
}

fn obtain_sweep_table(
    cfg: &RunConfig,
    out: &OutputDir,
    no_cache: bool,
) -> Result<(SweepTable<Real>, String), CmdError> {
    let key = cache_key(&cfg.canonical(), "sweep");
    if !no_cache {
        if let Some(table) = out.cache_get::<SweepTable<Real>>(&key) {
            eprintln!("cache: hit ({key})");
            return Ok((table, key));
        }
    }
    let scfg = cfg.sweep_config()?;
    let base = cfg.base_problem()?;
    let bcs = cfg.boundary_conditions()?;
    let table = sweep(&base, &bcs, &scfg, &cfg.experiment)?;
    out.cache_put(&key, &table)?;
    Ok((table, key))
}

fn cmd_sweep(
    cfg: &RunConfig,
    out: &OutputDir,
    no_cache: bool,
) -> Result<(SweepTable<Real>, String), CmdError> {
    let (table, key) = obtain_sweep_table(cfg, out, no_cache)?;
    out.write(&format!("{}-sweep.json", cfg.experiment), &to_json(&table))?;
    out.write(
        &format!("{}-sweep.csv", cfg.experiment),
        &output::rows_to_csv(&cfg.experiment, &table.rows),
    )?;
    println!(
        "sweep `{}`: {} rows across {} cells",
        cfg.experiment,
        table.rows.len(),
        table.rows.len()
    );
    Ok((table, key))
}

fn cmd_rates(cfg: &RunConfig, out: &OutputDir, no_cache: bool) -> Result<(), CmdError> {
    let (table, key) = cmd_sweep(cfg, out, no_cache)?;
    let report = fit_rate(&table)?;
    let artifact = RatesArtifact::from_table(&cfg.experiment, &key, &table, report);
    out.write(&format!("{}-rates.json", cfg.experiment), &to_json(&artifact))?;
    out.write(
        &format!("{}-rates.csv", cfg.experiment),
        &output::rates_to_csv(&cfg.experiment, &artifact.report),
    )?;
    for c in &artifact.report.cells {
        println!(
            "bc={} k={}: slope {:.3}, C {:.4e}, R2 {:.4}{}{}",
            c.bc.short(),
            c.k,
            c.slope,
            c.constant,
            c.r2,
            if c.degenerate { " [degenerate]" } else { "" },
            if c.unresolved { " [unresolved]" } else { "" },
        );
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct AuditArtifact {
    experiment: String,
    eps: Real,
    spectra: BTreeMap<BcTag, Spectrum>,
    checks: Vec<homogeig::harness::OrderingCheck<Real>>,
}

fn cmd_audit(
    cfg: &RunConfig,
    out: &OutputDir,
    no_cache: bool,
    eps: Option<Real>,
) -> Result<(), CmdError> {
    let eps = match eps.or_else(|| cfg.sweep.as_ref().and_then(|s| s.eps.first().copied())) {
        Some(e) if e > 0.0 => e,
        _ => {
            return Err(ConfigError::Invalid {
                field: "eps",
                reason: "audit needs --eps or a sweep.eps list".into(),
            }
            .into())
        }
    };
    let scfg = cfg.solve_config();
    let key = cache_key(&cfg.canonical(), &format!("audit:{eps}:{}", scfg.k_max));
    let artifact: AuditArtifact = match (!no_cache).then(|| out.cache_get(&key)).flatten() {
        Some(a) => {
            eprintln!("cache: hit ({key})");
            a
        }
        None => {
            let mut spectra = BTreeMap::new();
            for bc in cfg.boundary_conditions()? {
                let prob = cfg.problem_with(bc)?.at_epsilon(Epsilon::Value(eps));
                // common fixed mesh in 2D so the chain is compared like for like
                let spec = match prob.dim() {
                    1 => homogeig::solver1d::solve_1d(&prob, scfg.k_max, &scfg.shooting)?,
                    _ => homogeig::fem2d::solve_fem2(&prob, scfg.nx, scfg.k_max, &scfg.fem)?
                        .spectrum,
                };
                spectra.insert(bc.tag(), spec);
            }
            let checks = audit_ordering(&spectra, scfg.k_max);
            let a = AuditArtifact { experiment: cfg.experiment.clone(), eps, spectra, checks };
            out.cache_put(&key, &a)?;
            a
        }
    };
    out.write(&format!("{}-audit.json", cfg.experiment), &to_json(&artifact))?;
    out.write(
        &format!("{}-audit.csv", cfg.experiment),
        &output::audit_to_text(&artifact.checks),
    )?;
    let failures = artifact.checks.iter().filter(|c| !c.ok).count();
    println!(
        "audit `{}` at eps={}: {} comparisons, {} failures",
        cfg.experiment,
        eps,
        artifact.checks.len(),
        failures
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct OscillationArtifact {
    experiment: String,
    p: Real,
    modes: Vec<OscillationMode>,
}

#[derive(Serialize, Deserialize)]
struct OscillationMode {
    zero_trace: bool,
    slope: Option<Real>,
    constant: Option<Real>,
    degenerate: bool,
    max_gaps: Vec<(Real, Real)>,
}

fn cmd_oscillation(cfg: &RunConfig, out: &OutputDir, no_cache: bool) -> Result<(), CmdError> {
    let eps_list = cfg
        .oscillation
        .as_ref()
        .map(|o| o.eps.clone())
        .or_else(|| cfg.sweep.as_ref().map(|s| s.eps.clone()))
        .ok_or(ConfigError::Invalid {
            field: "oscillation",
            reason: "needs oscillation.eps or sweep.eps".into(),
        })?;
    let domain = cfg.domain()?;
    if !matches!(domain, Domain::Interval { .. }) {
        return Err(ConfigError::Invalid {
            field: "domain",
            reason: "oscillation probes need an interval domain".into(),
        }
        .into());
    }
    let base = cfg.base_problem()?;
    let key = cache_key(&cfg.canonical(), "oscillation");
    let artifact: OscillationArtifact = match (!no_cache).then(|| out.cache_get(&key)).flatten() {
        Some(a) => {
            eprintln!("cache: hit ({key})");
            a
        }
        None => {
            let mut modes = Vec::new();
            for zero_trace in [true, false] {
                let probe = OscillationProbe::seeded(
                    base.rho.base.clone(),
                    domain,
                    cfg.p,
                    zero_trace,
                    cfg.seed,
                )?;
                let max_gaps: Vec<(Real, Real)> =
                    eps_list.iter().map(|&e| (e, probe.max_gap(e))).collect();
                let (slope, constant, degenerate) = match probe.fit_rate(&eps_list) {
                    Ok((s, c)) => (Some(s), Some(c), false),
                    Err(SolveError::DegenerateFit) => (None, None, true),
                    Err(e) => return Err(e.into()),
                };
                modes.push(OscillationMode { zero_trace, slope, constant, degenerate, max_gaps });
            }
            let a = OscillationArtifact { experiment: cfg.experiment.clone(), p: cfg.p, modes };
            out.cache_put(&key, &a)?;
            a
        }
    };
    out.write(
        &format!("{}-oscillation.json", cfg.experiment),
        &to_json(&artifact),
    )?;
    for m in &artifact.modes {
        match (m.slope, m.constant) {
            (Some(s), Some(c)) => println!(
                "{}: slope {:.3}, C {:.4e}",
                if m.zero_trace { "zero-trace" } else { "free-trace" },
                s,
                c
            ),
            _ => println!(
                "{}: degenerate (all gaps at quadrature floor)",
                if m.zero_trace { "zero-trace" } else { "free-trace" }
            ),
        }
    }
    Ok(())
}

fn cmd_plot(report: &std::path::Path, out: &OutputDir) -> i32 {
    let text = match std::fs::read_to_string(report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read report: {e}");
            return 1;
        }
    };
    let artifact: RatesArtifact = match serde_json::from_str(&text) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: malformed report: {e}");
            return 1;
        }
    };
    if artifact.report.cells.is_empty() {
        eprintln!("error: report contains no fitted cells");
        return 1;
    }
    let mut tags: Vec<BcTag> = artifact.curves.iter().map(|c| c.bc).collect();
    tags.extend(artifact.growth_points.iter().map(|g| g.bc));
    tags.sort();
    tags.dedup();
    let mut wrote = 0usize;
    for bc in tags {
        if let Some(svg) = plot::render_bc(&artifact, bc) {
            let name = format!("{}-{}.svg", artifact.experiment, bc.short());
            if let Err(e) = out.write(&name, &svg) {
                eprintln!("error: cannot write {name}: {e}");
                return 1;
            }
            println!("wrote {name}");
            wrote += 1;
        }
    }
    if wrote == 0 {
        eprintln!("error: report contains no plottable data");
        return 1;
    }
    0
}

fn cmd_check_operator(cfg: &RunConfig) -> Result<(), CmdError> {
    let domain = cfg.domain()?;
    let op = cfg.operator()?;
    let bounds: Vec<(Real, Real)> = match domain {
        Domain::Interval { a, b } => vec![(a, b)],
        Domain::Rect { x0, y0, x1, y1 } => vec![(x0, x1), (y0, y1)],
    };
    match check_hypotheses(&op, domain.dim(), &bounds, 400, cfg.seed) {
        Ok(report) => {
            println!("operator accepted over {} samples", report.n_samples);
            println!("  monotonicity gap      {:.3e}", report.h1_monotonicity_gap);
            println!("  coercivity margin     {:.3e}", report.h2_coercivity_margin);
            println!("  continuity margin     {:.3e}", report.h3_continuity_margin);
            println!("  homogeneity residual  {:.3e}", report.h4_homogeneity_residual);
            println!("  oddness residual      {:.3e}", report.h5_oddness_residual);
            Ok(())
        }
        Err(e) => {
            Err(SolveError::Unsupported(format!("operator outside scope: {e}")).into())
        }
    }
}
