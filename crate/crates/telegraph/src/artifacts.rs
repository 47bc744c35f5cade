//! CSV and JSON artifacts of a solve.
//!
//! Column orders:
//!
//! - `trajectory.csv`: `t, u_1..u_M, v_1..v_M, energy_norm, du_norm`
//! - `constraint.csv`: `t, inf, certified, location`
//! - `residuals.csv`: `k, t, residual`
//!
//! Every CSV starts with `# telegraph <version>` and
//! `# config_sha256 <hex>`. Floats use 17 significant digits.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use telegraph_core::solver::{SolveConfig, Trajectory, WeakResiduals};
use telegraph_core::PhysicalParams;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(config_sha256: &str) -> String {
    format!("# telegraph {VERSION}\n# config_sha256 {config_sha256}\n")
}

pub fn trajectory_csv(traj: &Trajectory, params: &PhysicalParams, config_sha256: &str) -> String {
    let cap = traj.states.first().map_or(0, |s| s.capacity());
    let mut out = header(config_sha256);
    out.push('t');
    for k in 1..=cap {
        let _ = write!(out, ",u_{k}");
    }
    for k in 1..=cap {
        let _ = write!(out, ",v_{k}");
    }
    out.push_str(",energy_norm,du_norm\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.push_str(&fmt_f64(*t));
        for a in s.u.coeffs().iter().chain(s.v.coeffs()) {
            out.push(',');
            out.push_str(&fmt_f64(*a));
        }
        let _ = writeln!(
            out,
            ",{},{}",
            fmt_f64(s.energy_norm(params)),
            fmt_f64(s.du_norm(params))
        );
    }
    out
}

pub fn constraint_csv(traj: &Trajectory, config_sha256: &str) -> String {
    let mut out = header(config_sha256);
    out.push_str("t,inf,certified,location\n");
    for (t, c) in traj.times.iter().zip(&traj.constraint) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(c.inf_value),
            fmt_f64(c.certified_lower_bound),
            fmt_f64(c.location)
        );
    }
    out
}

pub fn residuals_csv(res: &WeakResiduals, config_sha256: &str) -> String {
    let mut out = header(config_sha256);
    out.push_str("k,t,residual\n");
    for k in 1..=res.k_test {
        for (t, row) in res.times.iter().zip(&res.table) {
            let _ = writeln!(out, "{k},{},{}", fmt_f64(*t), fmt_f64(row[k - 1]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub t: f64,
    pub x: f64,
    pub certified: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub config_sha256: String,
    pub nu: f64,
    pub kappa: f64,
    pub n: usize,
    pub capacity: usize,
    #[serde(rename = "C")]
    pub radius: f64,
    pub c: f64,
    pub c_forcing: f64,
    pub omega: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub cells: usize,
    pub time_order: usize,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub z_sup_h10: f64,
    pub u_sup_du: f64,
    pub equicontinuity: f64,
    pub alpha: f64,
    pub admissible: bool,
    pub first_violation: Option<ViolationRecord>,
    pub min_certified: f64,
    pub weak_residual_modes: usize,
    pub weak_residual_projected: f64,
    pub weak_residual_tail: f64,
}

impl Summary {
    pub fn new(cfg: &SolveConfig, traj: &Trajectory, res: &WeakResiduals, config_sha256: &str) -> Self {
        let fp = &traj.fixed_point;
        Summary {
            version: VERSION.into(),
            config_sha256: config_sha256.into(),
            nu: cfg.params.nu(),
            kappa: cfg.params.kappa(),
            n: cfg.n,
            capacity: cfg.capacity,
            radius: cfg.radius,
            c: cfg.bound,
            c_forcing: cfg.forcing_bound,
            omega: cfg.omega,
            t0: cfg.t0,
            cells: cfg.mesh.cells(),
            time_order: cfg.mesh.order(),
            iterations: fp.iterations,
            residual: fp.residual,
            residual_history: fp.residual_history.clone(),
            z_sup_h10: fp.z_sup,
            u_sup_du: fp.u_du_sup,
            equicontinuity: traj.equicontinuity,
            alpha: traj.alpha,
            admissible: traj.admissible,
            first_violation: traj.first_violation.map(|v| ViolationRecord {
                t: v.time,
                x: v.location,
                certified: v.certified,
            }),
            min_certified: traj
                .constraint
                .iter()
                .map(|c| c.certified_lower_bound)
                .fold(f64::INFINITY, f64::min),
            weak_residual_modes: res.k_test,
            weak_residual_projected: res.max_over(1, cfg.n),
            weak_residual_tail: if res.k_test > cfg.n {
                res.max_over(cfg.n + 1, res.k_test)
            } else {
                0.0
            },
        }
    }
}

/// Artifact file names, in write order.
pub const FILES: [&str; 4] = ["trajectory.csv", "constraint.csv", "residuals.csv", "summary.json"];

/// Writes all artifacts into `dir`, creating it if needed.
pub fn write_all(
    dir: &Path,
    trajectory: &str,
    constraint: &str,
    residuals: &str,
    summary: &Summary,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(summary).map_err(io::Error::other)? + "\n";
    let contents = [trajectory, constraint, residuals, json.as_str()];
    let mut written = Vec::with_capacity(FILES.len());
    for (name, body) in FILES.iter().zip(contents) {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
