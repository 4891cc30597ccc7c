//! Deterministic report files and the config-hash cache.
//!
//! Every artifact is written from in-memory structures with a fixed field
//! order and `serde_json`'s shortest-roundtrip float formatting, so identical
//! configurations always produce byte-identical files.

use std::path::{Path, PathBuf};

use homogeig::harness::{OrderingCheck, RateReport, SweepRow, SweepTable};
use homogeig::problems::BcTag;
use homogeig::Real;
use serde::{de::DeserializeOwned, Serialize};
use sha2::{Digest, Sha256};

/// 16-hex-digit digest of the canonical config serialization plus the
/// command discriminator.
pub fn cache_key(canonical_config: &str, command: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(canonical_config.as_bytes());
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub struct OutputDir {
    pub root: PathBuf,
}

impl OutputDir {
    pub fn new(root: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(root.join("cache"))?;
        Ok(Self { root })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn cache_path(&self, key: &str) -> PathBuf {
        self.root.join("cache").join(format!("{key}.json"))
    }

    /// Load a cached payload; `None` on miss or parse failure.
    pub fn cache_get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = std::fs::read_to_string(self.cache_path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn cache_put<T: Serialize>(&self, key: &str, value: &T) -> std::io::Result<()> {
        write_atomic(&self.cache_path(key), &to_json(value))
    }

    pub fn write(&self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.file(name);
        write_atomic(&path, contents)?;
        Ok(path)
    }
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Shortest round-trip float formatting; deterministic across runs.
fn fmt_float(v: Real) -> String {
    v.to_string()
}

/// Fixed-schema CSV for spectra and sweep tables:
/// `experiment,bc,k,epsilon,lambda,tol,solver,wall_ms`.
pub fn rows_to_csv(experiment: &str, rows: &[SweepRow<Real>]) -> String {
    let mut out = String::from("experiment,bc,k,epsilon,lambda,tol,solver,wall_ms\n");
    for r in rows {
        let eps = match r.epsilon {
            Some(e) => fmt_float(e),
            None => "averaged".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            experiment,
            r.bc.short(),
            r.k,
            eps,
            fmt_float(r.lambda),
            fmt_float(r.tol),
            r.solver,
            fmt_float(r.wall_ms),
        ));
    }
    out
}

/// Rates CSV: one row per fitted (bc, k) cell.
pub fn rates_to_csv(experiment: &str, report: &RateReport<Real>) -> String {
    let mut out =
        String::from("experiment,bc,k,slope,constant,r2,degenerate,unresolved,meets_linear_rate\n");
    for c in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            experiment,
            c.bc.short(),
            c.k,
            fmt_float(c.slope),
            fmt_float(c.constant),
            fmt_float(c.r2),
            c.degenerate,
            c.unresolved,
            match c.meets_linear_rate {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "n/a",
            },
        ));
    }
    out
}

/// Human-readable ordering audit matrix.
pub fn audit_to_text(checks: &[OrderingCheck<Real>]) -> String {
    let mut out = String::from("k,lesser,greater,lesser_value,greater_value,ok\n");
    for c in checks {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.k,
            c.lesser.short(),
            c.greater.short(),
            fmt_float(c.lesser_value),
            fmt_float(c.greater_value),
            c.ok,
        ));
    }
    out
}

/// Stdout table for one spectrum's worth of sweep rows.
pub fn print_rows(rows: &[SweepRow<Real>]) {
    println!("{:<4} {:<4} {:>12} {:>18} {:<16}", "bc", "k", "epsilon", "lambda", "solver");
    for r in rows {
        let eps = match r.epsilon {
            Some(e) => format!("{e}"),
            None => "averaged".to_string(),
        };
        println!(
            "{:<4} {:<4} {:>12} {:>18.12} {:<16}",
            r.bc.short(),
            r.k,
            eps,
            r.lambda,
            r.solver
        );
    }
}

/// Fitted-rate payload written by `rates` and read back by `plot`.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct RatesArtifact {
    pub experiment: String,
    pub p: Real,
    pub dim: usize,
    pub config_hash: String,
    pub report: RateReport<Real>,
    /// Raw error curves per fitted cell: (bc, k, [(epsilon, |λ^ε − λ|)]).
    pub curves: Vec<ErrorCurve>,
    /// Averaged eigenvalues per bc for the growth plot.
    pub growth_points: Vec<GrowthPoints>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ErrorCurve {
    pub bc: BcTag,
    pub k: usize,
    pub points: Vec<(Real, Real)>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct GrowthPoints {
    pub bc: BcTag,
    pub points: Vec<(usize, Real)>,
}

impl RatesArtifact {
    pub fn from_table(
        experiment: &str,
        config_hash: &str,
        table: &SweepTable<Real>,
        report: RateReport<Real>,
    ) -> Self {
        let mut curves = Vec::new();
        for cell in &report.cells {
            let avg = table.cell(cell.bc, cell.k, None).unwrap().lambda;
            let mut points = Vec::new();
            for r in table.rows.iter().filter(|r| r.bc == cell.bc && r.k == cell.k) {
                if let Some(e) = r.epsilon {
                    points.push((e, (r.lambda - avg).abs()));
                }
            }
            curves.push(ErrorCurve { bc: cell.bc, k: cell.k, points });
        }
        let mut tags: Vec<BcTag> = table.rows.iter().map(|r| r.bc).collect();
        tags.sort();
        tags.dedup();
        let growth_points = tags
            .into_iter()
            .map(|bc| {
                let mut points: Vec<(usize, Real)> = table
                    .rows
                    .iter()
                    .filter(|r| r.bc == bc && r.epsilon.is_none())
                    .map(|r| (r.k, r.lambda))
                    .collect();
                points.sort_by_key(|p| p.0);
                GrowthPoints { bc, points }
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            p: table.p,
            dim: table.dim,
            config_hash: config_hash.to_string(),
            report,
            curves,
            growth_points,
        }
    }
}
