//! Subcommands and exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification check failed |
//! | 2 | configuration error, nothing written |
//! | 3 | fixed-point iteration did not converge |
//! | 4 | trajectory left the admissible set (artifacts written) |
//! | 5 | other numerical failure |
//! | 6 | I/O failure |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use telegraph_core::semigroup::{
    classify_mode, default_norm_grid, default_norm_horizon, du_norm_bound, spectral_abscissa,
    AbscissaBranch,
};
use telegraph_core::solver::{solve_and_monitor, weak_residual, SolveConfig};
use telegraph_core::spectral::{extremal_element, n_width, projection_error_bound_check};
use telegraph_core::{Error, ModalVector};

use crate::artifacts::{self, fmt_f64, Summary};
use crate::config::{config_hash, ConfigError, LoadedConfig, ScenarioConfig};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_INADMISSIBLE: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "telegraph", version, about = "Spectral fixed-point solver for the constrained telegraph equation")]
pub struct Cli {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-point solve with constraint monitoring; writes CSV and JSON artifacts.
    Solve,
    /// Spectral abscissa and per-mode regimes as CSV.
    Spectrum {
        #[arg(long, default_value_t = 16)]
        n_max: usize,
    },
    /// Runs a property battery and prints a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// n-widths of the H1_0 ball and their extremal errors as CSV.
    Widths {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
    },
    /// Weighted operator-norm profile of the semigroup as CSV.
    Decay {
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
}

fn error_json(kind: &str, message: &str, extra: serde_json::Value) -> String {
    let mut v = json!({ "error": kind, "message": message, "version": artifacts::VERSION });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v.to_string()
}

fn config_failure(e: &dyn std::fmt::Display) -> i32 {
    println!("{}", error_json("config", &e.to_string(), json!({})));
    EXIT_CONFIG
}

fn load(cli: &Cli) -> Result<LoadedConfig, ConfigError> {
    let mut loaded = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => LoadedConfig {
            config: ScenarioConfig::default(),
            sha256: config_hash(""),
        },
    };
    if let Some(seed) = cli.seed {
        loaded.config.seed = seed;
    }
    if let Some(out) = &cli.out {
        loaded.config.output.dir = out.clone();
    }
    Ok(loaded)
}

pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_failure(&"--threads must be at least 1");
        }
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let loaded = match load(&cli) {
        Ok(l) => l,
        Err(e) => return config_failure(&e),
    };
    match &cli.command {
        Command::Solve => solve(&loaded),
        Command::Spectrum { n_max } => spectrum(&loaded.config, *n_max),
        Command::Verify { suite } => {
            let report = run_suite(*suite, loaded.config.seed);
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if report.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Command::Widths { n_max, b } => widths(&loaded.config, *n_max, *b),
        Command::Decay { t_max, points } => decay(&loaded.config, *t_max, *points),
    }
}

/// Random directions for the ball-level validation, drawn from the seed.
pub fn validation_directions(seed: u64, count: usize, capacity: usize) -> Vec<ModalVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            ModalVector::from_coeffs(
                (1..=capacity)
                    .map(|k| rng.gen_range(-1.0..1.0) / (k * k) as f64)
                    .collect(),
            )
        })
        .collect()
}

fn solve(loaded: &LoadedConfig) -> i32 {
    let cfg = &loaded.config;
    let prepared = (|| -> Result<_, ConfigError> {
        let params = cfg.params()?;
        let forcing = cfg.forcing()?;
        let constraint = cfg.constraint()?;
        let drive = cfg.drive()?;
        let k_test = cfg.residual_modes()?;
        let solve_cfg = SolveConfig::new(params, &forcing, &cfg.solve_options())
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let dirs = validation_directions(cfg.seed, cfg.constraint.directions, cfg.solver.capacity);
        solve_cfg
            .validate_constraint(&constraint, &dirs)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok((forcing, constraint, drive, k_test, solve_cfg))
    })();
    let (forcing, constraint, drive, k_test, solve_cfg) = match prepared {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let traj = match solve_and_monitor(&solve_cfg, &forcing, &constraint, drive.as_ref()) {
        Ok(t) => t,
        Err(e) => return numerical_failure(&e),
    };
    let residuals = match weak_residual(&traj, &forcing, &solve_cfg.params, k_test) {
        Ok(r) => r,
        Err(e) => return numerical_failure(&e),
    };
    let hash = &loaded.sha256;
    let summary = Summary::new(&solve_cfg, &traj, &residuals, hash);
    let written = artifacts::write_all(
        &cfg.output.dir,
        &artifacts::trajectory_csv(&traj, &solve_cfg.params, hash),
        &artifacts::constraint_csv(&traj, hash),
        &artifacts::residuals_csv(&residuals, hash),
        &summary,
    );
    if let Err(e) = written {
        println!("{}", error_json("io", &e.to_string(), json!({})));
        return EXIT_IO;
    }
    match traj.first_violation {
        Some(v) => {
            let err = Error::Inadmissible {
                time: v.time,
                location: v.location,
                certified: v.certified,
                alpha: traj.alpha,
            };
            println!(
                "{}",
                error_json(
                    "inadmissible",
                    &err.to_string(),
                    json!({ "t": v.time, "x": v.location, "certified": v.certified, "alpha": traj.alpha, "out": cfg.output.dir }),
                )
            );
            EXIT_INADMISSIBLE
        }
        None => {
            println!("{}", serde_json::to_string(&summary).expect("serializable"));
            EXIT_OK
        }
    }
}

fn numerical_failure(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { iterations, residuals } => {
            println!(
                "{}",
                error_json(
                    "nonconvergence",
                    &e.to_string(),
                    json!({ "iterations": iterations, "residuals": residuals }),
                )
            );
            EXIT_NONCONVERGENCE
        }
        Error::BallViolation { iteration, measured, bound } => {
            println!(
                "{}",
                error_json(
                    "ball_violation",
                    &e.to_string(),
                    json!({ "iteration": iteration, "measured": measured, "bound": bound }),
                )
            );
            EXIT_NUMERICAL
        }
        other => {
            println!("{}", error_json("numerical", &other.to_string(), json!({})));
            EXIT_NUMERICAL
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn spectrum_csv(params: &telegraph_core::PhysicalParams, n_max: usize) -> String {
    let s = spectral_abscissa(params, n_max);
    let mut out = format!("# telegraph {}\n", artifacts::VERSION);
    let branch = match s.branch {
        AbscissaBranch::AllNonnegative => "all_nonnegative".to_string(),
        AbscissaBranch::Overdamped { argmax } => format!("overdamped_argmax_{argmax}"),
    };
    let _ = writeln!(out, "# theta {} {branch}", fmt_f64(s.theta));
    out.push_str("n,theta_n,regime,omega_n,rho_n\n");
    for n in 1..=n_max {
        let m = classify_mode(n, params);
        let _ = writeln!(
            out,
            "{n},{},{},{},{}",
            fmt_f64(m.theta_n),
            m.kind.as_str(),
            opt(m.omega_n),
            opt(m.rho_n)
        );
    }
    out
}

fn spectrum(cfg: &ScenarioConfig, n_max: usize) -> i32 {
    if n_max == 0 {
        return config_failure(&"--n-max must be at least 1");
    }
    match cfg.params() {
        Ok(p) => {
            print!("{}", spectrum_csv(&p, n_max));
            EXIT_OK
        }
        Err(e) => config_failure(&e),
    }
}

fn widths(cfg: &ScenarioConfig, n_max: usize, b: f64) -> i32 {
    let p = match cfg.params() {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let mut out = format!("# telegraph {}\nn,width,extremal_error\n", artifacts::VERSION);
    for n in 1..=n_max {
        let row = n_width(b, n, &p).and_then(|d| {
            let e = extremal_element(b, n, &p, n + 1)?;
            Ok((d, projection_error_bound_check(&e, b, n, &p)?.error))
        });
        match row {
            Ok((d, e)) => {
                let _ = writeln!(out, "{n},{},{}", fmt_f64(d), fmt_f64(e));
            }
            Err(e) => return config_failure(&e),
        }
    }
    print!("{out}");
    EXIT_OK
}

fn decay(cfg: &ScenarioConfig, t_max: f64, points: usize) -> i32 {
    let p = match cfg.params() {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    if !(t_max > 0.0) || points < 2 {
        return config_failure(&"decay needs t_max > 0 and at least two points");
    }
    let cap = cfg.solver.capacity;
    let grid: Vec<f64> = (0..points)
        .map(|i| t_max * i as f64 / (points - 1) as f64)
        .collect();
    let omega = du_norm_bound(&p, &default_norm_grid(&p, cap, default_norm_horizon(&p), 1), cap);
    let profile = du_norm_bound(&p, &grid, cap);
    match (omega, profile) {
        (Ok(w), Ok(nb)) => {
            let mut out = format!("# telegraph {}\n# omega {}\nt,sup_norm\n", artifacts::VERSION, fmt_f64(w.omega));
            for (t, s) in nb.profile {
                let _ = writeln!(out, "{},{}", fmt_f64(t), fmt_f64(s));
            }
            print!("{out}");
            EXIT_OK
        }
        (Err(e), _) | (_, Err(e)) => numerical_failure(&e),
    }
}

/// Reads `summary.json` from an artifact directory.
pub fn read_summary(dir: &Path) -> std::io::Result<Summary> {
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}
