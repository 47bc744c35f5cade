//! Scenario files.
//!
//! TOML, every key optional except where noted, unknown keys rejected:
//!
//! ```toml
//! seed = 1
//!
//! [physics]
//! nu = 1.0
//! kappa = 1.0
//!
//! [forcing]
//! kind = "monomial"    # zero | identity | bvp | monomial | sinh
//! power = 3            # monomial only, default 3
//!
//! [constraint]
//! offset = 1.0         # G(u) = offset + gain * u
//! gain = 1.0
//! alpha = 0.5
//! samples = 4096
//! directions = 32      # random directions used to validate alpha on the ball
//!
//! [drive]
//! kind = "modes"       # none | modes | cubic
//! coefficients = [0.5] # modes: amplitudes of phi_1, phi_2, ...
//! amplitude = 1.0      # cubic: amplitude * x (1 - x^2)
//! profile = "constant" # constant | cosine | ramp
//! frequency = 1.0      # cosine
//! duration = 1.0       # ramp
//!
//! [solver]
//! n = 8
//! capacity = 64
//! radius = 1.0
//! bound = 2.0          # optional, must be >= c(C); required for zero forcing
//! omega = 1.05         # optional, replaces the sampled estimate
//! cells = 40
//! time_order = 6
//! fp_tol = 1e-10
//! fp_max_iter = 200
//! relaxation = 1.0
//! norm_refine = 1
//! equicontinuity_fraction = 0.1
//! residual_modes = 16  # default min(2 n, capacity)
//!
//! [output]
//! dir = "out"
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use telegraph_core::constraint::AffineConstraint;
use telegraph_core::forcing::{BvpComposition, ForcingOperator, IdentityForcing, PointwiseForcing, ZeroForcing};
use telegraph_core::solver::{DriveTerm, SolveOptions, TimeProfile};
use telegraph_core::{ModalVector, PhysicalParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub physics: PhysicsSection,
    pub forcing: ForcingSection,
    pub constraint: ConstraintSection,
    pub drive: DriveSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub nu: f64,
    pub kappa: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection { nu: 1.0, kappa: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub kind: String,
    pub power: Option<u32>,
}

impl Default for ForcingSection {
    fn default() -> Self {
        ForcingSection {
            kind: "monomial".into(),
            power: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub offset: f64,
    pub gain: f64,
    pub alpha: f64,
    pub samples: usize,
    pub directions: usize,
}

impl Default for ConstraintSection {
    fn default() -> Self {
        ConstraintSection {
            offset: 1.0,
            gain: 1.0,
            alpha: 0.5,
            samples: telegraph_core::constraint::DEFAULT_SAMPLES,
            directions: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub kind: String,
    pub coefficients: Vec<f64>,
    pub amplitude: f64,
    pub profile: String,
    pub frequency: f64,
    pub duration: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            kind: "none".into(),
            coefficients: Vec::new(),
            amplitude: 1.0,
            profile: "constant".into(),
            frequency: 1.0,
            duration: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub n: usize,
    pub capacity: usize,
    pub radius: f64,
    pub bound: Option<f64>,
    pub omega: Option<f64>,
    pub cells: usize,
    pub time_order: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub relaxation: f64,
    pub norm_refine: usize,
    pub equicontinuity_fraction: f64,
    pub residual_modes: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverSection {
            n: d.n,
            capacity: d.capacity,
            radius: d.radius,
            bound: None,
            omega: None,
            cells: d.cells,
            time_order: d.time_order,
            fp_tol: d.fp_tol,
            fp_max_iter: d.fp_max_iter,
            relaxation: d.relaxation,
            norm_refine: d.norm_refine,
            equicontinuity_fraction: d.equicontinuity_fraction,
            residual_modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

/// Parsed file contents plus the hex SHA-256 of the raw bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub sha256: String,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(LoadedConfig {
            config: Self::from_toml_str(&text)?,
            sha256: config_hash(&text),
        })
    }

    pub fn params(&self) -> Result<PhysicalParams, ConfigError> {
        PhysicalParams::new(self.physics.nu, self.physics.kappa).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn forcing(&self) -> Result<Box<dyn ForcingOperator>, ConfigError> {
        let cap = self.solver.capacity;
        let wrap = |e: telegraph_core::Error| ConfigError::Invalid(e.to_string());
        if self.forcing.power.is_some() && self.forcing.kind != "monomial" {
            return invalid("forcing.power only applies to kind = \"monomial\"");
        }
        Ok(match self.forcing.kind.as_str() {
            "zero" => Box::new(ZeroForcing),
            "identity" => Box::new(IdentityForcing),
            "bvp" => Box::new(BvpComposition),
            "monomial" => {
                let p = self.forcing.power.unwrap_or(3);
                Box::new(PointwiseForcing::monomial(p, cap).map_err(wrap)?)
            }
            "sinh" => Box::new(PointwiseForcing::sinh(cap).map_err(wrap)?),
            other => return invalid(format!("unknown forcing kind `{other}`")),
        })
    }

    pub fn constraint(&self) -> Result<AffineConstraint, ConfigError> {
        AffineConstraint::new(self.constraint.offset, self.constraint.gain)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn drive(&self) -> Result<Option<DriveTerm>, ConfigError> {
        let d = &self.drive;
        let cap = self.solver.capacity;
        let profile = match d.profile.as_str() {
            "constant" => TimeProfile::Constant,
            "cosine" => TimeProfile::Cosine { frequency: d.frequency },
            "ramp" if d.duration > 0.0 => TimeProfile::Ramp { duration: d.duration },
            "ramp" => return invalid("drive.duration must be positive"),
            other => return invalid(format!("unknown drive profile `{other}`")),
        };
        let shape = match d.kind.as_str() {
            "none" => return Ok(None),
            "modes" => {
                if d.coefficients.is_empty() || d.coefficients.len() > cap {
                    return invalid(format!(
                        "drive.coefficients needs between 1 and {cap} entries"
                    ));
                }
                let mut c = d.coefficients.clone();
                c.resize(cap, 0.0);
                ModalVector::from_coeffs(c)
            }
            "cubic" => cubic_drive(d.amplitude, cap),
            other => return invalid(format!("unknown drive kind `{other}`")),
        };
        Ok(Some(DriveTerm { shape, profile }))
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            n: s.n,
            capacity: s.capacity,
            radius: s.radius,
            bound_override: s.bound,
            omega_override: s.omega,
            cells: s.cells,
            time_order: s.time_order,
            fp_tol: s.fp_tol,
            fp_max_iter: s.fp_max_iter,
            relaxation: s.relaxation,
            alpha: self.constraint.alpha,
            constraint_samples: self.constraint.samples,
            equicontinuity_fraction: s.equicontinuity_fraction,
            norm_refine: s.norm_refine,
        }
    }

    pub fn residual_modes(&self) -> Result<usize, ConfigError> {
        let k = self
            .solver
            .residual_modes
            .unwrap_or_else(|| (2 * self.solver.n).min(self.solver.capacity));
        if k == 0 || k > self.solver.capacity {
            return invalid(format!(
                "solver.residual_modes must lie in 1..={}",
                self.solver.capacity
            ));
        }
        Ok(k)
    }
}

/// Sine coefficients of `amplitude * x (1 - x^2)`:
/// `12 (-1)^{k+1} / (k pi)^3`.
pub fn cubic_drive(amplitude: f64, capacity: usize) -> ModalVector {
    ModalVector::from_coeffs(
        (1..=capacity)
            .map(|k| {
                let kp = k as f64 * PI;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                amplitude * 12.0 * sign / (kp * kp * kp)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert!(c.drive().unwrap().is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioConfig::from_toml_str("[physics]\nnu = 1.0\nmass = 2.0\n").is_err());
        assert!(ScenarioConfig::from_toml_str("colour = 3\n").is_err());
    }

    #[test]
    fn cubic_drive_matches_profile() {
        let d = cubic_drive(2.0, 256);
        assert!((d.eval(0.5) - 2.0 * 0.5 * 0.75).abs() < 1e-5);
    }

    #[test]
    fn drive_validation() {
        let mut c = ScenarioConfig::default();
        c.drive.kind = "modes".into();
        assert!(c.drive().is_err());
        c.drive.coefficients = vec![1.0, 0.5];
        let d = c.drive().unwrap().unwrap();
        assert_eq!(d.shape.capacity(), c.solver.capacity);
        c.drive.profile = "square".into();
        assert!(c.drive().is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
