//! Projected fixed-point construction of local solutions.
//!
//! For `z` in `B_n = {z in P_n : |z|_{C(J, H1_0)} <= c}` the map `K` solves
//! the linear problem with velocity source `z` (plus an optional explicit
//! drive) by the Duhamel formula, takes the displacement `u` and returns
//! `P_n F(u)`. With `T0 = C / (omega c)` the displacement stays in the
//! `D`-ball of radius `C`, so `K` maps `B_n` into itself. A fixed point of `K`
//! solves
//!
//! ```text
//! u_tt = -nu u_t + kappa u_xx + P_n F(u) [+ g],   u(0) = u_t(0) = 0
//! ```
//!
//! on `J = [0, T0]`.

use alloc::format;
use alloc::vec::Vec;

use crate::constraint::{validate_ball_level, BallValidation, ConstraintOperator, ConstraintValue};
use crate::duhamel::{interpolate_nodes, DuhamelPlan, DuhamelSolution, TimeMesh};
use crate::error::{Error, Result};
use crate::forcing::ForcingOperator;
use crate::semigroup::{default_norm_grid, default_norm_horizon, du_norm_bound};
use crate::spectral::{project_q, ModalVector, PhysicalParams, StateVector};

/// Relative slack allowed on ball-membership checks.
const BALL_SLACK: f64 = 1e-12;

/// `T0 = C / (omega c)`.
pub fn terminal_time(radius: f64, omega: f64, bound: f64) -> Result<f64> {
    for (name, value) in [("C", radius), ("omega", omega), ("c", bound)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "terminal time needs positive finite inputs",
            });
        }
    }
    Ok(radius / (omega * bound))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `cos(frequency t)`.
    Cosine { frequency: f64 },
    /// `min(t / duration, 1)`.
    Ramp { duration: f64 },
}

impl TimeProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Cosine { frequency } => libm::cos(frequency * t),
            TimeProfile::Ramp { duration } => (t / duration).min(1.0),
        }
    }
}

/// Explicit source `g(t) = profile(t) * shape` added to the velocity
/// equation. Not part of the forcing hypotheses: with quiescent data and
/// `F(0) = 0` the zero function is a solution, and a drive is how nontrivial
/// trajectories are produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub shape: ModalVector,
    pub profile: TimeProfile,
}

impl DriveTerm {
    pub fn constant(shape: ModalVector) -> Self {
        DriveTerm {
            shape,
            profile: TimeProfile::Constant,
        }
    }

    pub fn at(&self, t: f64) -> ModalVector {
        self.shape.scaled(self.profile.at(t))
    }
}

/// Numerical knobs for [`SolveConfig::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Projection order `n`.
    pub n: usize,
    /// Internal capacity `M >= n`.
    pub capacity: usize,
    /// Ball radius `C` in the `D` norm.
    pub radius: f64,
    /// Replaces the forcing's `c(C)`; must not be smaller than it.
    pub bound_override: Option<f64>,
    /// Replaces the sampled `omega`.
    pub omega_override: Option<f64>,
    pub cells: usize,
    pub time_order: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub relaxation: f64,
    /// Constraint level `alpha > 0`.
    pub alpha: f64,
    pub constraint_samples: usize,
    /// Window for the equicontinuity modulus, as a fraction of `T0`.
    pub equicontinuity_fraction: f64,
    /// Refinement factor of the grid used for `omega`.
    pub norm_refine: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n: 8,
            capacity: 64,
            radius: 1.0,
            bound_override: None,
            omega_override: None,
            cells: 40,
            time_order: 6,
            fp_tol: 1e-10,
            fp_max_iter: 200,
            relaxation: 1.0,
            alpha: 0.5,
            constraint_samples: crate::constraint::DEFAULT_SAMPLES,
            equicontinuity_fraction: 0.1,
            norm_refine: 1,
        }
    }
}

/// Validated solve configuration with derived `omega`, `c` and `T0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub params: PhysicalParams,
    pub n: usize,
    pub capacity: usize,
    pub radius: f64,
    pub bound: f64,
    /// `c(C)` as reported by the forcing, before any override.
    pub forcing_bound: f64,
    pub omega: f64,
    pub t0: f64,
    pub mesh: TimeMesh,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub relaxation: f64,
    pub alpha: f64,
    pub constraint_samples: usize,
    pub equicontinuity_delta: f64,
}

impl SolveConfig {
    pub fn new(
        params: PhysicalParams,
        forcing: &dyn ForcingOperator,
        opts: &SolveOptions,
    ) -> Result<Self> {
        if opts.n == 0 {
            return Err(Error::Configuration("projection order n must be at least 1".into()));
        }
        if opts.capacity < opts.n {
            return Err(Error::Configuration(format!(
                "capacity {} smaller than projection order {}",
                opts.capacity, opts.n
            )));
        }
        if !(opts.fp_tol > 0.0) || opts.fp_max_iter == 0 {
            return Err(Error::Configuration("fixed-point tolerance and iteration cap must be positive".into()));
        }
        if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
            return Err(Error::Configuration("relaxation must lie in (0, 1]".into()));
        }
        if !(opts.alpha > 0.0) {
            return Err(Error::Configuration("constraint level alpha must be positive".into()));
        }
        if opts.constraint_samples == 0 {
            return Err(Error::Configuration("constraint sampling needs at least one interval".into()));
        }
        let forcing_bound = forcing.local_bound(opts.radius, &params);
        let bound = match opts.bound_override {
            Some(c) if c < forcing_bound * (1.0 - BALL_SLACK) => {
                return Err(Error::Configuration(format!(
                    "bound override {c} is below the forcing's local bound c(C) = {forcing_bound}"
                )))
            }
            Some(c) => c,
            None => forcing_bound,
        };
        let omega = match opts.omega_override {
            Some(w) => w,
            None => estimate_omega(&params, opts.capacity, opts.norm_refine)?,
        };
        let t0 = terminal_time(opts.radius, omega, bound)?;
        let mesh = TimeMesh::new(t0, opts.cells, opts.time_order)?;
        Ok(SolveConfig {
            params,
            n: opts.n,
            capacity: opts.capacity,
            radius: opts.radius,
            bound,
            forcing_bound,
            omega,
            t0,
            mesh,
            fp_tol: opts.fp_tol,
            fp_max_iter: opts.fp_max_iter,
            relaxation: opts.relaxation,
            alpha: opts.alpha,
            constraint_samples: opts.constraint_samples,
            equicontinuity_delta: opts.equicontinuity_fraction * t0,
        })
    }

    /// Samples the `D`-sphere of radius `C` (single modes plus `directions`)
    /// and checks `inf G >= alpha` there.
    pub fn validate_constraint(
        &self,
        constraint: &dyn ConstraintOperator,
        directions: &[ModalVector],
    ) -> Result<BallValidation> {
        validate_ball_level(
            constraint,
            self.radius,
            self.alpha,
            &self.params,
            self.capacity,
            directions,
            self.constraint_samples,
        )
    }

    pub fn with_mesh(&self, mesh: TimeMesh) -> Self {
        SolveConfig {
            mesh,
            ..self.clone()
        }
    }
}

/// `omega` on the default grid over modes `1 ..= capacity`.
pub fn estimate_omega(params: &PhysicalParams, capacity: usize, refine: usize) -> Result<f64> {
    let horizon = default_norm_horizon(params);
    let grid = default_norm_grid(params, capacity, horizon, refine);
    Ok(du_norm_bound(params, &grid, capacity)?.omega)
}

/// One application of `K`.
#[derive(Debug, Clone)]
pub struct KImage {
    /// `P_n F(u)` at the mesh nodes.
    pub image: Vec<ModalVector>,
    /// `V` from the Duhamel formula with source `(0, z + g)`.
    pub solution: DuhamelSolution,
    /// `max |u|_D` over nodes and cell boundaries.
    pub u_du_sup: f64,
}

/// Applies `K` under a fixed configuration.
#[derive(Debug)]
pub struct FixedPointMap<'a> {
    config: &'a SolveConfig,
    forcing: &'a dyn ForcingOperator,
    plan: DuhamelPlan,
    drive_nodes: Option<Vec<ModalVector>>,
}

impl<'a> FixedPointMap<'a> {
    pub fn new(
        config: &'a SolveConfig,
        forcing: &'a dyn ForcingOperator,
        drive: Option<&DriveTerm>,
    ) -> Result<Self> {
        let plan = DuhamelPlan::new(config.params, config.mesh.clone(), config.capacity)?;
        let drive_nodes = match drive {
            Some(d) => {
                if d.shape.capacity() != config.capacity {
                    return Err(Error::CapacityMismatch {
                        left: d.shape.capacity(),
                        right: config.capacity,
                    });
                }
                Some(config.mesh.node_times().into_iter().map(|t| d.at(t)).collect())
            }
            None => None,
        };
        Ok(FixedPointMap {
            config,
            forcing,
            plan,
            drive_nodes,
        })
    }

    pub fn plan(&self) -> &DuhamelPlan {
        &self.plan
    }

    pub fn zero_iterate(&self) -> Vec<ModalVector> {
        alloc::vec![ModalVector::zeros(self.config.capacity); self.config.mesh.node_count()]
    }

    /// `max_t |z(t)|_{H1_0}` over the nodes.
    pub fn sup_h10(&self, z: &[ModalVector]) -> f64 {
        z.iter()
            .map(|v| v.h10_norm(&self.config.params))
            .fold(0.0, f64::max)
    }

    fn check_iterate(&self, z: &[ModalVector]) -> Result<()> {
        if z.len() != self.config.mesh.node_count() {
            return Err(Error::argument("iterate does not match the time mesh"));
        }
        let n = self.config.n;
        for v in z {
            if v.capacity() != self.config.capacity {
                return Err(Error::CapacityMismatch {
                    left: v.capacity(),
                    right: self.config.capacity,
                });
            }
            if v.highest_mode() > n {
                return Err(Error::precondition(format!(
                    "iterate has modes above n = {n}"
                )));
            }
        }
        Ok(())
    }

    /// Duhamel solve with velocity source `z + g`.
    pub fn displacement(&self, z: &[ModalVector]) -> Result<DuhamelSolution> {
        let source: Vec<ModalVector> = match &self.drive_nodes {
            Some(g) => z.iter().zip(g).map(|(a, b)| a + b).collect(),
            None => z.to_vec(),
        };
        self.plan.integrate_velocity(&source, None)
    }

    /// `K(z) = P_n F(u)`; `z` must lie in `B_n`.
    pub fn apply(&self, z: &[ModalVector]) -> Result<KImage> {
        self.check_iterate(z)?;
        let norm = self.sup_h10(z);
        if norm > self.config.bound * (1.0 + BALL_SLACK) {
            return Err(Error::precondition(format!(
                "|z|_C(J,H1_0) = {norm} exceeds the ball radius c = {}",
                self.config.bound
            )));
        }
        self.apply_unchecked(z)
    }

    fn apply_unchecked(&self, z: &[ModalVector]) -> Result<KImage> {
        let solution = self.displacement(z)?;
        let image = solution
            .nodes
            .iter()
            .map(|s| project_q(&self.forcing.evaluate(&s.u)?, self.config.n))
            .collect::<Result<Vec<_>>>()?;
        let u_du_sup = du_sup(&solution, &self.config.params);
        Ok(KImage {
            image,
            solution,
            u_du_sup,
        })
    }
}

/// `max |u|_D` over the nodes and cell boundaries of a Duhamel solution.
pub fn du_sup(solution: &DuhamelSolution, params: &PhysicalParams) -> f64 {
    solution
        .nodes
        .iter()
        .chain(&solution.endpoints)
        .map(|s| s.u.du_norm(params))
        .fold(0.0, f64::max)
}

/// `K(z)` for a single call.
pub fn apply_k(
    z: &[ModalVector],
    config: &SolveConfig,
    forcing: &dyn ForcingOperator,
    drive: Option<&DriveTerm>,
) -> Result<KImage> {
    FixedPointMap::new(config, forcing, drive)?.apply(z)
}

#[derive(Debug, Clone)]
pub struct FixedPointState {
    /// Iterate at the mesh nodes, in `P_n`.
    pub z: Vec<ModalVector>,
    /// Duhamel solution driven by `z` (+ drive).
    pub solution: DuhamelSolution,
    /// `max_t |z - K z|_{H1_0}` over the nodes.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_relaxation: f64,
    /// `|z|_{C(J, H1_0)}`.
    pub z_sup: f64,
    /// `|u|_{C(J, D)}`.
    pub u_du_sup: f64,
}

/// Relaxed Picard iteration `z <- (1 - r) z + r K(z)` from
/// `z0 = P_n F(u_drive)`; `r` halves whenever the residual grows.
pub fn fixed_point_solve(
    config: &SolveConfig,
    forcing: &dyn ForcingOperator,
    drive: Option<&DriveTerm>,
) -> Result<FixedPointState> {
    let map = FixedPointMap::new(config, forcing, drive)?;
    let params = &config.params;
    let mut z = match drive {
        Some(_) => map.apply_unchecked(&map.zero_iterate())?.image,
        None => map.zero_iterate(),
    };
    let mut relaxation = config.relaxation;
    let mut history: Vec<f64> = Vec::new();
    for iteration in 1..=config.fp_max_iter {
        let z_sup = map.sup_h10(&z);
        if z_sup > config.bound * (1.0 + BALL_SLACK) {
            return Err(Error::BallViolation {
                iteration,
                measured: z_sup,
                bound: config.bound,
            });
        }
        let k = map.apply_unchecked(&z)?;
        let residual = z
            .iter()
            .zip(&k.image)
            .map(|(a, b)| (a - b).h10_norm(params))
            .fold(0.0, f64::max);
        if let Some(&prev) = history.last() {
            if residual > prev {
                relaxation = (relaxation / 2.0).max(1.0 / 1024.0);
            }
        }
        history.push(residual);
        if residual <= config.fp_tol {
            return Ok(FixedPointState {
                z,
                solution: k.solution,
                residual,
                iterations: iteration,
                residual_history: history,
                final_relaxation: relaxation,
                z_sup,
                u_du_sup: k.u_du_sup,
            });
        }
        for (a, b) in z.iter_mut().zip(&k.image) {
            *a = a.scaled(1.0 - relaxation).axpy(relaxation, b)?;
        }
    }
    Err(Error::NonConvergence {
        iterations: config.fp_max_iter,
        residuals: history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub time: f64,
    pub location: f64,
    pub certified: f64,
}

/// A converged solution sampled at the cell boundaries of the mesh.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Projected source `z` interpolated to `times`.
    pub z_at_times: Vec<ModalVector>,
    /// Drive `g` evaluated at `times` (zero without drive).
    pub drive_at_times: Vec<ModalVector>,
    pub constraint: Vec<ConstraintValue>,
    pub alpha: f64,
    pub admissible: bool,
    pub first_violation: Option<Violation>,
    /// `max_{|t1 - t2| <= delta} |u(t1) - u(t2)|_{H1_0}` over `times`.
    pub equicontinuity: f64,
    pub fixed_point: FixedPointState,
}

impl Trajectory {
    pub fn displacement(&self) -> impl Iterator<Item = &ModalVector> {
        self.states.iter().map(|s| &s.u)
    }
}

/// Fixed-point solve followed by the constraint report on every mesh time.
/// Never fails on constraint violation; see [`constrained_solve`].
pub fn solve_and_monitor(
    config: &SolveConfig,
    forcing: &dyn ForcingOperator,
    constraint: &dyn ConstraintOperator,
    drive: Option<&DriveTerm>,
) -> Result<Trajectory> {
    let fp = fixed_point_solve(config, forcing, drive)?;
    let mesh = &config.mesh;
    let times = mesh.endpoints();
    let states = fp.solution.endpoints.clone();
    let z_at_times = times
        .iter()
        .map(|&t| interpolate_nodes(mesh, &fp.z, t))
        .collect::<Result<Vec<_>>>()?;
    let drive_at_times = times
        .iter()
        .map(|&t| match drive {
            Some(d) => d.at(t),
            None => ModalVector::zeros(config.capacity),
        })
        .collect();
    let constraint_values: Vec<ConstraintValue> = states
        .iter()
        .map(|s| constraint.evaluate_inf(&s.u, config.constraint_samples))
        .collect();
    let first_violation = constraint_values
        .iter()
        .enumerate()
        .find(|(_, v)| v.certified_lower_bound < config.alpha)
        .map(|(index, v)| Violation {
            index,
            time: times[index],
            location: v.location,
            certified: v.certified_lower_bound,
        });
    let equicontinuity = equicontinuity_modulus(&times, &states, config.equicontinuity_delta, &config.params);
    Ok(Trajectory {
        times,
        states,
        z_at_times,
        drive_at_times,
        constraint: constraint_values,
        alpha: config.alpha,
        admissible: first_violation.is_none(),
        first_violation,
        equicontinuity,
        fixed_point: fp,
    })
}

/// Validates `inf G >= alpha` on the `D`-ball, solves, and rejects
/// trajectories whose certified constraint bound drops below `alpha`.
pub fn constrained_solve(
    config: &SolveConfig,
    forcing: &dyn ForcingOperator,
    constraint: &dyn ConstraintOperator,
    drive: Option<&DriveTerm>,
) -> Result<Trajectory> {
    config.validate_constraint(constraint, &[])?;
    let traj = solve_and_monitor(config, forcing, constraint, drive)?;
    match traj.first_violation {
        Some(v) => Err(Error::Inadmissible {
            time: v.time,
            location: v.location,
            certified: v.certified,
            alpha: config.alpha,
        }),
        None => Ok(traj),
    }
}

fn equicontinuity_modulus(
    times: &[f64],
    states: &[StateVector],
    delta: f64,
    params: &PhysicalParams,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            if times[j] - times[i] > delta * (1.0 + 1e-12) {
                break;
            }
            let d = (&states[j].u - &states[i].u).h10_norm(params);
            worst = worst.max(d);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResiduals {
    pub k_test: usize,
    /// `residual[j][k - 1]` at `times[j]`, `j >= 1`.
    pub table: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    /// `max_t |r_k(t)|` per test mode.
    pub max_per_mode: Vec<f64>,
}

impl WeakResiduals {
    /// Largest residual over test modes `lo ..= hi`.
    pub fn max_over(&self, lo: usize, hi: usize) -> f64 {
        self.max_per_mode[lo.max(1) - 1..hi.min(self.k_test)]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Residual of the weak form against `phi_k`, `k <= k_test`:
///
/// ```text
/// r_k(t) = (u_tt, phi_k) + nu (u_t, phi_k) + kappa (u_x, phi_k') - (F(u) + g, phi_k)
/// ```
///
/// with `u_tt` taken from the modal equation driven by the solver's source.
pub fn weak_residual(
    traj: &Trajectory,
    forcing: &dyn ForcingOperator,
    params: &PhysicalParams,
    k_test: usize,
) -> Result<WeakResiduals> {
    let cap = traj.states.first().map_or(0, |s| s.capacity());
    if k_test == 0 || k_test > cap {
        return Err(Error::Capacity {
            requested: k_test,
            capacity: cap,
        });
    }
    let nu = params.nu();
    let mut table = Vec::with_capacity(traj.times.len().saturating_sub(1));
    let mut max_per_mode = alloc::vec![0.0f64; k_test];
    for j in 1..traj.times.len() {
        let s = &traj.states[j];
        let fu = forcing.evaluate(&s.u)?;
        let z = &traj.z_at_times[j];
        let g = &traj.drive_at_times[j];
        let row: Vec<f64> = (1..=k_test)
            .map(|k| {
                let stiff = params.stiffness(k);
                let (u, v) = (s.u.coeff(k), s.v.coeff(k));
                let utt = -nu * v - stiff * u + z.coeff(k) + g.coeff(k);
                utt + nu * v + stiff * u - (fu.coeff(k) + g.coeff(k))
            })
            .collect();
        for (m, r) in max_per_mode.iter_mut().zip(&row) {
            *m = m.max(libm::fabs(*r));
        }
        table.push(row);
    }
    Ok(WeakResiduals {
        k_test,
        table,
        times: traj.times[1..].to_vec(),
        max_per_mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::AffineConstraint;
    use crate::forcing::{IdentityForcing, PointwiseForcing, ZeroForcing};

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    fn small_opts() -> SolveOptions {
        SolveOptions {
            n: 4,
            capacity: 8,
            radius: 1.0,
            cells: 8,
            time_order: 4,
            constraint_samples: 256,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn terminal_time_examples() {
        assert_eq!(terminal_time(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!((terminal_time(2.0, 1.05, 4.0).unwrap() - 0.476_190_476_190_476_2).abs() < 1e-15);
        let a = terminal_time(3.0, 1.2, 0.7).unwrap();
        let b = terminal_time(3.0, 1.2, 1.4).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert!(terminal_time(0.0, 1.0, 1.0).is_err());
        assert!(terminal_time(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn zero_forcing_needs_override() {
        let err = SolveConfig::new(params(), &ZeroForcing, &small_opts()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "c", .. }));
        let opts = SolveOptions {
            bound_override: Some(1.0),
            ..small_opts()
        };
        assert!(SolveConfig::new(params(), &ZeroForcing, &opts).is_ok());
    }

    #[test]
    fn override_below_local_bound_is_rejected() {
        let opts = SolveOptions {
            bound_override: Some(0.5),
            ..small_opts()
        };
        assert!(matches!(
            SolveConfig::new(params(), &IdentityForcing, &opts),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn config_validation() {
        let bad = [
            SolveOptions { n: 0, ..small_opts() },
            SolveOptions { capacity: 2, ..small_opts() },
            SolveOptions { relaxation: 0.0, ..small_opts() },
            SolveOptions { alpha: 0.0, ..small_opts() },
        ];
        for o in &bad {
            assert!(SolveConfig::new(params(), &IdentityForcing, o).is_err());
        }
    }

    #[test]
    fn zero_drive_converges_immediately() {
        let cfg = SolveConfig::new(params(), &PointwiseForcing::monomial(3, 8).unwrap(), &small_opts()).unwrap();
        let fp = fixed_point_solve(&cfg, &PointwiseForcing::monomial(3, 8).unwrap(), None).unwrap();
        assert_eq!(fp.iterations, 1);
        assert_eq!(fp.residual, 0.0);
        assert!(fp.solution.endpoints.iter().all(|s| s.u.is_zero() && s.v.is_zero()));
    }

    #[test]
    fn zero_drive_is_admissible() {
        let f = IdentityForcing;
        let cfg = SolveConfig::new(params(), &f, &small_opts()).unwrap();
        let traj = constrained_solve(&cfg, &f, &AffineConstraint::one_plus(), None).unwrap();
        assert!(traj.admissible);
        assert!(traj.constraint.iter().all(|v| v.inf_value == 1.0));
        assert_eq!(traj.equicontinuity, 0.0);
    }

    #[test]
    fn k_rejects_iterates_outside_ball() {
        let f = IdentityForcing;
        let cfg = SolveConfig::new(params(), &f, &small_opts()).unwrap();
        let map = FixedPointMap::new(&cfg, &f, None).unwrap();
        let big = ModalVector::single_mode(8, 1, 10.0).unwrap();
        let z = alloc::vec![big; cfg.mesh.node_count()];
        assert!(matches!(map.apply(&z), Err(Error::Precondition(_))));
        let high = ModalVector::single_mode(8, 6, 1e-3).unwrap();
        let z = alloc::vec![high; cfg.mesh.node_count()];
        assert!(map.apply(&z).is_err());
    }

    #[test]
    fn nonconvergence_carries_history() {
        let f = IdentityForcing;
        let opts = SolveOptions {
            fp_max_iter: 2,
            fp_tol: 1e-300,
            radius: 10.0,
            ..small_opts()
        };
        let cfg = SolveConfig::new(params(), &f, &opts).unwrap();
        let drive = DriveTerm::constant(ModalVector::single_mode(8, 1, 1.0).unwrap());
        match fixed_point_solve(&cfg, &f, Some(&drive)) {
            Err(Error::NonConvergence { iterations, residuals }) => {
                assert_eq!(iterations, 2);
                assert_eq!(residuals.len(), 2);
            }
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }
}
