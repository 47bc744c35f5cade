//! Property batteries behind `telegraph verify` and the acceptance suite.
//!
//! Random inputs are drawn sequentially from a seeded ChaCha stream before
//! any parallel work, so reports do not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use telegraph_core::constraint::{constraint_inf, AffineConstraint};
use telegraph_core::forcing::{IdentityForcing, PointwiseForcing, PointwiseSymbol, ZeroForcing};
use telegraph_core::oracle::{
    fd_solve, modal_ode_closed_form, projection_error_by_quadrature, taylor_propagator, FdForcing,
};
use telegraph_core::semigroup::{
    apply_generator, apply_semigroup, default_norm_grid, default_norm_horizon, du_norm_bound,
    propagate_mode, resolvent_apply, shifted_generator, spectral_norm_2x2,
};
use telegraph_core::solver::{
    constrained_solve, solve_and_monitor, weak_residual, DriveTerm, FixedPointMap, SolveConfig,
    SolveOptions,
};
use telegraph_core::spectral::{extremal_element, n_width, projection_error_bound_check};
use telegraph_core::{Error, ModalVector, PhysicalParams, StateVector};

use crate::config::cubic_drive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Semigroup,
    Resolvent,
    Widths,
    Invariance,
    Convergence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Semigroup => "semigroup",
            Suite::Resolvent => "resolvent",
            Suite::Widths => "widths",
            Suite::Invariance => "invariance",
            Suite::Convergence => "convergence",
        }
    }

    /// Acceptance criteria covered by the suite.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Semigroup => &[1, 2, 4],
            Suite::Resolvent => &[3],
            Suite::Widths => &[6],
            Suite::Invariance => &[5, 7, 9],
            Suite::Convergence => &[8, 10],
        }
    }

    pub const ALL: [Suite; 5] = [
        Suite::Semigroup,
        Suite::Resolvent,
        Suite::Widths,
        Suite::Invariance,
        Suite::Convergence,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    /// `threshold - measured` for upper bounds, `measured - threshold` for
    /// lower bounds.
    pub margin: f64,
    pub counterexample: Option<String>,
}

impl Check {
    fn at_most(criterion: u8, name: &str, measured: f64, threshold: f64) -> Self {
        Check {
            criterion,
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            margin: threshold - measured,
            counterexample: None,
        }
    }

    fn at_least(criterion: u8, name: &str, measured: f64, threshold: f64) -> Self {
        Check {
            criterion,
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            margin: measured - threshold,
            counterexample: None,
        }
    }

    fn within(criterion: u8, name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Check {
            criterion,
            name: name.into(),
            passed: (lo..=hi).contains(&measured),
            measured,
            threshold: hi,
            margin: (measured - lo).min(hi - measured),
            counterexample: None,
        }
    }

    fn failed(criterion: u8, name: &str, err: &Error) -> Self {
        Check {
            criterion,
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            threshold: f64::NAN,
            margin: f64::NAN,
            counterexample: Some(err.to_string()),
        }
    }

    fn witness(mut self, text: Option<String>) -> Self {
        if !self.passed {
            self.counterexample = text;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let checks: Vec<Check> = suite
        .criteria()
        .iter()
        .flat_map(|&c| criterion_checks(c, seed))
        .collect();
    SuiteReport {
        suite: suite.name().into(),
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Checks for one acceptance criterion (1 ..= 10).
pub fn criterion_checks(criterion: u8, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(criterion) << 32));
    match criterion {
        1 => contraction(&mut rng),
        2 => energy(&mut rng),
        3 => resolvent(&mut rng),
        4 => propagator(),
        5 => decay(),
        6 => widths(&mut rng),
        7 => invariance(&mut rng),
        8 => fixed_point(),
        9 => constraint(),
        10 => projection_tail(),
        _ => Vec::new(),
    }
}

fn unit() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0).expect("valid")
}

/// Parameter sets covering the three regimes for the first mode.
fn regime_params() -> [PhysicalParams; 4] {
    [
        PhysicalParams::new(1.0, 1.0).expect("valid"),
        PhysicalParams::new(2.0 * PI, 1.0).expect("valid"),
        PhysicalParams::new(10.0, 0.1).expect("valid"),
        PhysicalParams::new(0.3, 2.0).expect("valid"),
    ]
}

fn random_modal(rng: &mut ChaCha8Rng, cap: usize, modes: usize) -> ModalVector {
    let mut c = vec![0.0; cap];
    for (k, a) in c.iter_mut().take(modes).enumerate() {
        *a = rng.gen_range(-1.0..1.0) / (k + 1) as f64;
    }
    ModalVector::from_coeffs(c)
}

fn random_state(rng: &mut ChaCha8Rng, cap: usize, modes: usize) -> StateVector {
    StateVector {
        u: random_modal(rng, cap, modes),
        v: random_modal(rng, cap, modes),
    }
}

fn describe(f: &StateVector) -> String {
    format!("u = {:?}, v = {:?}", f.u.active(), f.v.active())
}

fn worst<T: Send>(items: Vec<(f64, T)>) -> (f64, Option<T>) {
    items
        .into_iter()
        .fold((f64::NEG_INFINITY, None), |(m, w), (x, t)| if x > m { (x, Some(t)) } else { (m, w) })
}

fn contraction(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let ps = regime_params();
    let samples: Vec<(usize, StateVector, f64, f64)> = (0..1000)
        .map(|i| {
            let f = random_state(rng, 16, 16);
            (i % ps.len(), f, rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0))
        })
        .collect();
    let results: Vec<(f64, f64, String)> = samples
        .par_iter()
        .map(|(pi, f, t, s)| {
            let p = &ps[*pi];
            let norm = f.energy_norm(p);
            let ts = apply_semigroup(f, *s, p).expect("finite t");
            let tt = apply_semigroup(f, *t, p).expect("finite t");
            let ratio = tt.energy_norm(p) / norm;
            let direct = apply_semigroup(f, t + s, p).expect("finite t");
            let split = apply_semigroup(&ts, *t, p).expect("finite t");
            let diff = StateVector { u: &direct.u - &split.u, v: &direct.v - &split.v };
            let comp = diff.energy_norm(p) / norm;
            (ratio, comp, format!("{p:?}, t = {t}, s = {s}, {}", describe(f)))
        })
        .collect();
    let violations = results.iter().filter(|r| r.0 > 1.0).count();
    let (ratio, w_ratio) = worst(results.iter().map(|r| (r.0, r.2.clone())).collect());
    let (comp, w_comp) = worst(results.iter().map(|r| (r.1, r.2.clone())).collect());

    // monotone decay along a t grid
    let p = unit();
    let mut monotone_breaks = 0usize;
    for _ in 0..50 {
        let f = random_state(rng, 16, 16);
        let mut prev = f.energy_norm(&p);
        for i in 1..=40 {
            let e = apply_semigroup(&f, 0.5 * i as f64, &p).expect("finite t").energy_norm(&p);
            if e > prev {
                monotone_breaks += 1;
            }
            prev = e;
        }
    }
    vec![
        Check::at_most(1, "contraction_violations", violations as f64, 0.0).witness(w_ratio.clone()),
        Check::at_most(1, "max_norm_ratio", ratio, 1.0).witness(w_ratio),
        Check::at_most(1, "composition_relative_error", comp, 1e-12).witness(w_comp),
        Check::at_most(1, "monotonicity_breaks", monotone_breaks as f64, 0.0),
    ]
}

fn energy(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let ps = regime_params();
    let mut identity_err: f64 = 0.0;
    let mut identity_witness = None;
    for i in 0..1000 {
        let p = &ps[i % ps.len()];
        let f = random_state(rng, 16, 16);
        let inner = apply_generator(&f, p).energy_inner(&f, p);
        let want = -p.nu() * f.v.l2_norm_sq();
        let scale = apply_generator(&f, p).energy_norm(p) * f.energy_norm(p);
        let e = (inner - want).abs() / scale;
        if e > identity_err {
            identity_err = e;
            identity_witness = Some(format!("{p:?}, {}", describe(&f)));
        }
    }
    let p = unit();
    let h = 1e-4;
    let mut rate_err: f64 = 0.0;
    let mut rate_witness = None;
    for _ in 0..100 {
        let f = random_state(rng, 8, 8);
        let t = rng.gen_range(0.0..5.0);
        let e = |s: f64| apply_semigroup(&f, s, &p).expect("finite t").energy_norm_sq(&p);
        let fd = (-e(t + 2.0 * h) + 8.0 * e(t + h) - 8.0 * e(t - h) + e(t - 2.0 * h)) / (12.0 * h);
        let v = apply_semigroup(&f, t, &p).expect("finite t").v;
        let want = -2.0 * p.nu() * v.l2_norm_sq();
        let rel = (fd - want).abs() / want.abs();
        if rel > rate_err {
            rate_err = rel;
            rate_witness = Some(format!("t = {t}, {}", describe(&f)));
        }
    }
    vec![
        Check::at_most(2, "modal_energy_identity", identity_err, 1e-12).witness(identity_witness),
        Check::at_most(2, "energy_rate_fd_relative", rate_err, 1e-6).witness(rate_witness),
    ]
}

fn resolvent(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let p = unit();
    let mut checks = Vec::new();
    let mut all_violations = 0usize;
    let mut min_slack = f64::INFINITY;
    let mut round_trip: f64 = 0.0;
    let mut witness = None;
    for &lambda in &[0.1, 1.0, 10.0, 100.0] {
        let samples: Vec<StateVector> = (0..1000).map(|_| random_state(rng, 16, 16)).collect();
        let results: Vec<(f64, f64)> = samples
            .par_iter()
            .map(|f| {
                let r = resolvent_apply(lambda, f, &p).expect("lambda > 0");
                let norm = f.energy_norm(&p);
                let ratio = r.energy_norm(&p) / norm;
                let back = shifted_generator(lambda, &r, &p);
                let diff = StateVector { u: &back.u - &f.u, v: &back.v - &f.v };
                (ratio, diff.energy_norm(&p) / norm)
            })
            .collect();
        for (f, (ratio, rt)) in samples.iter().zip(&results) {
            let slack = 1.0 / lambda - ratio;
            if slack < 0.0 {
                all_violations += 1;
                witness.get_or_insert_with(|| format!("lambda = {lambda}, {}", describe(f)));
            }
            min_slack = min_slack.min(slack * lambda);
            round_trip = round_trip.max(*rt);
        }
    }
    checks.push(Check::at_most(3, "bound_violations", all_violations as f64, 0.0).witness(witness));
    checks.push(Check::at_least(3, "min_relative_slack", min_slack, 0.0));
    checks.push(Check::at_most(3, "round_trip_relative_error", round_trip, 1e-12));
    checks
}

fn propagator() -> Vec<Check> {
    let ps = [
        PhysicalParams::new(1.0, 1.0).expect("valid"),
        PhysicalParams::new(2.0 * PI, 1.0).expect("valid"),
        PhysicalParams::new(10.0, 0.1).expect("valid"),
    ];
    let jobs: Vec<(usize, usize, f64)> = (0..ps.len())
        .flat_map(|pi| (1..=16).flat_map(move |n| (0..=20).map(move |i| (pi, n, 0.5 * i as f64))))
        .collect();
    let results: Vec<(f64, f64, String)> = jobs
        .par_iter()
        .map(|&(pi, n, t)| {
            let p = &ps[pi];
            let exact = propagate_mode(n, t, p).expect("valid");
            let m = exact.matrix();
            let r = taylor_propagator(n, p, t).expect("valid");
            let w = p.stiffness(n).sqrt();
            let diff = spectral_norm_2x2(
                m[0][0] - r[0][0],
                (m[0][1] - r[0][1]) * w,
                (m[1][0] - r[1][0]) / w,
                m[1][1] - r[1][1],
            );
            let size = spectral_norm_2x2(m[0][0], m[0][1] * w, m[1][0] / w, m[1][1]);
            let target = (-p.nu() * t).exp();
            let det = (exact.det() - target).abs() / target.max(exact.det_scale());
            (diff / size, det, format!("{p:?}, n = {n}, t = {t}, {}", exact.kind.as_str()))
        })
        .collect();
    let (rel, w_rel) = worst(results.iter().map(|r| (r.0, r.2.clone())).collect());
    let (det, w_det) = worst(results.iter().map(|r| (r.1, r.2.clone())).collect());
    vec![
        Check::at_most(4, "taylor_relative_error", rel, 1e-10).witness(w_rel),
        Check::at_most(4, "abel_determinant_error", det, 1e-12).witness(w_det),
    ]
}

fn decay() -> Vec<Check> {
    let p = unit();
    let profile = match du_norm_bound(&p, &[0.0, 20.0], 64) {
        Ok(nb) => nb.profile,
        Err(e) => return vec![Check::failed(5, "profile", &e)],
    };
    let horizon = default_norm_horizon(&p);
    let coarse = du_norm_bound(&p, &default_norm_grid(&p, 64, horizon, 1), 64);
    let fine = du_norm_bound(&p, &default_norm_grid(&p, 64, horizon, 2), 64);
    let (coarse, fine) = match (coarse, fine) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::failed(5, "omega", &e)],
    };
    vec![
        Check::at_most(5, "profile_ratio_t20", profile[1].1 / profile[0].1, 1e-3),
        Check::at_most(5, "omega_refinement_relative", (coarse.omega - fine.omega).abs() / fine.omega, 0.01),
        Check::at_least(5, "omega_at_least_one", coarse.omega, 1.0),
    ]
}

fn widths(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut exact_err: f64 = 0.0;
    let mut oracle_err: f64 = 0.0;
    let mut violations = 0usize;
    let mut witness = None;
    for &(kappa, b) in &[(1.0, 1.0), (0.5, 2.0)] {
        let p = PhysicalParams::new(1.0, kappa).expect("valid");
        for n in 1..=8 {
            let d = b / ((n + 1) as f64 * PI * kappa.sqrt());
            let formula = n_width(b, n, &p).expect("valid");
            let e = extremal_element(b, n, &p, 16).expect("valid");
            let r = projection_error_bound_check(&e, b, n, &p).expect("in ball");
            exact_err = exact_err.max((r.error - d).abs()).max((formula - d).abs());
            oracle_err = oracle_err.max((projection_error_by_quadrature(&e, n, 64) - d).abs());
            for _ in 0..100 {
                let u = random_modal(rng, 24, 24);
                let u = u.scaled(b * rng.gen_range(0.0..1.0) / u.h10_norm(&p));
                let r = projection_error_bound_check(&u, b, n, &p).expect("in ball");
                if !r.within_width {
                    violations += 1;
                    witness.get_or_insert_with(|| format!("n = {n}, u = {:?}", u.active()));
                }
            }
        }
    }
    vec![
        Check::at_most(6, "extremal_error_vs_width", exact_err, 1e-12),
        Check::at_most(6, "extremal_error_quadrature_oracle", oracle_err, 1e-12),
        Check::at_most(6, "random_ball_violations", violations as f64, 0.0).witness(witness),
    ]
}

/// Reference nonlinear setup used by the invariance audit.
pub fn invariance_config() -> Result<(SolveConfig, PointwiseForcing), Error> {
    let f = PointwiseForcing::monomial(3, 16)?;
    let opts = SolveOptions { n: 4, capacity: 16, radius: 1.0, cells: 16, ..SolveOptions::default() };
    Ok((SolveConfig::new(unit(), &f, &opts)?, f))
}

fn invariance(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let (cfg, f) = match invariance_config() {
        Ok(x) => x,
        Err(e) => return vec![Check::failed(7, "setup", &e)],
    };
    let map = match FixedPointMap::new(&cfg, &f, None) {
        Ok(m) => m,
        Err(e) => return vec![Check::failed(7, "setup", &e)],
    };
    let times = cfg.mesh.node_times();
    let iterates: Vec<Vec<ModalVector>> = (0..50)
        .map(|_| {
            let amp: Vec<(f64, f64, f64)> = (0..cfg.n)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..PI)))
                .collect();
            let z: Vec<ModalVector> = times
                .iter()
                .map(|t| {
                    let mut c = vec![0.0; cfg.capacity];
                    for (k, (a, w, ph)) in amp.iter().enumerate() {
                        c[k] = a * (w * t + ph).cos();
                    }
                    ModalVector::from_coeffs(c)
                })
                .collect();
            let s = rng.gen_range(0.05..1.0) * cfg.bound / map.sup_h10(&z);
            z.iter().map(|v| v.scaled(s)).collect()
        })
        .collect();
    let results: Vec<Result<(f64, f64), Error>> = iterates
        .par_iter()
        .map(|z| map.apply(z).map(|k| (k.u_du_sup, map.sup_h10(&k.image))))
        .collect();
    let mut u_worst: f64 = 0.0;
    let mut k_worst: f64 = 0.0;
    let mut violations = 0usize;
    for r in &results {
        match r {
            Ok((u, k)) => {
                u_worst = u_worst.max(u / cfg.radius);
                k_worst = k_worst.max(k / cfg.bound);
                if *u > cfg.radius || *k > cfg.bound {
                    violations += 1;
                }
            }
            Err(e) => return vec![Check::failed(7, "apply_k", e)],
        }
    }
    vec![
        Check::at_most(7, "ball_violations", violations as f64, 0.0),
        Check::at_most(7, "max_u_du_over_C", u_worst, 1.0),
        Check::at_most(7, "max_kz_h10_over_c", k_worst, 1.0),
    ]
}

/// Identity forcing with drive `phi_1`: the displacement solves the
/// mode-1 equation with stiffness `kappa pi^2 - 1`.
pub fn linear_scenario() -> Result<(SolveConfig, IdentityForcing, DriveTerm), Error> {
    let opts = SolveOptions { n: 4, capacity: 16, radius: 5.0, cells: 40, ..SolveOptions::default() };
    let cfg = SolveConfig::new(unit(), &IdentityForcing, &opts)?;
    let drive = DriveTerm::constant(ModalVector::single_mode(16, 1, 1.0)?);
    Ok((cfg, IdentityForcing, drive))
}

fn fixed_point() -> Vec<Check> {
    let mut checks = Vec::new();
    match linear_case() {
        Ok((err, weak)) => {
            checks.push(Check::at_most(8, "linear_closed_form_c_l2", err, 1e-7));
            checks.push(Check::at_most(8, "weak_residual_projected_modes", weak, 1e-6));
        }
        Err(e) => checks.push(Check::failed(8, "linear_scenario", &e)),
    }
    match monomial_vs_fd() {
        Ok((dist, weak)) => {
            checks.push(Check::at_most(8, "monomial2_vs_fd_c_l2", dist, 5e-4));
            checks.push(Check::at_most(8, "monomial2_weak_residual", weak, 1e-6));
        }
        Err(e) => checks.push(Check::failed(8, "monomial_scenario", &e)),
    }
    match fd_order() {
        Ok(orders) => {
            for (i, o) in orders.iter().enumerate() {
                checks.push(Check::within(8, &format!("fd_convergence_order_{i}"), *o, 1.8, 2.2));
            }
        }
        Err(e) => checks.push(Check::failed(8, "fd_order", &e)),
    }
    checks
}

fn linear_case() -> Result<(f64, f64), Error> {
    let (cfg, f, drive) = linear_scenario()?;
    let p = cfg.params;
    let traj = solve_and_monitor(&cfg, &f, &AffineConstraint::one_plus(), Some(&drive))?;
    let mut err: f64 = 0.0;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let (a, _) = modal_ode_closed_form(1, &p, -1.0, 1.0, *t);
        let mut e = s.u.clone();
        e.coeffs_mut()[0] -= a;
        err = err.max(e.l2_norm());
    }
    let wr = weak_residual(&traj, &f, &p, cfg.n)?;
    Ok((err, wr.max_over(1, cfg.n)))
}

fn monomial_vs_fd() -> Result<(f64, f64), Error> {
    let p = unit();
    let f = PointwiseForcing::monomial(2, 32)?;
    let opts = SolveOptions { n: 8, capacity: 32, cells: 40, ..SolveOptions::default() };
    let cfg = SolveConfig::new(p, &f, &opts)?;
    let amp = 0.5;
    let drive = DriveTerm::constant(ModalVector::single_mode(32, 1, amp)?);
    let traj = solve_and_monitor(&cfg, &f, &AffineConstraint::one_plus(), Some(&drive))?;
    let g = move |x: f64, _t: f64| amp * (PI * x).sin();
    let fd = fd_solve(&p, FdForcing::Pointwise(PointwiseSymbol::Monomial(2)), Some(&g), &traj.times, 512)?;
    let refs: Vec<ModalVector> = traj.states.iter().map(|s| s.u.clone()).collect();
    let wr = weak_residual(&traj, &f, &p, cfg.n)?;
    Ok((fd.c_l2_distance(&refs)?, wr.max_over(1, cfg.n)))
}

fn fd_order() -> Result<Vec<f64>, Error> {
    let p = unit();
    let times = [0.0, 0.5, 1.0];
    let g = |x: f64, _t: f64| (PI * x).sin();
    let mut errors = Vec::new();
    for m in [63usize, 127, 255] {
        let fd = fd_solve(&p, FdForcing::Zero, Some(&g), &times, m)?;
        let refs = times
            .iter()
            .map(|t| ModalVector::single_mode(1, 1, modal_ode_closed_form(1, &p, 0.0, 1.0, *t).0))
            .collect::<Result<Vec<_>, _>>()?;
        errors.push(fd.c_l2_distance(&refs)?);
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Zero forcing pushed by `-amplitude phi_1`; returns the configuration,
/// drive and the analytic first time where `inf (1 + u) = alpha`.
pub fn crossing_scenario(cells: usize) -> Result<(SolveConfig, DriveTerm, f64), Error> {
    let p = unit();
    let opts = SolveOptions {
        n: 2,
        capacity: 8,
        radius: 1.0,
        bound_override: Some(1.0),
        cells,
        alpha: 0.5,
        ..SolveOptions::default()
    };
    let cfg = SolveConfig::new(p, &ZeroForcing, &opts)?;
    let amplitude = 5.0;
    let drive = DriveTerm::constant(ModalVector::single_mode(8, 1, -amplitude)?);
    let (mut lo, mut hi) = (0.0, cfg.t0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (a, _) = modal_ode_closed_form(1, &p, 0.0, 1.0, mid);
        if 1.0 - amplitude * a > cfg.alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((cfg, drive, 0.5 * (lo + hi)))
}

fn constraint() -> Vec<Check> {
    let g = AffineConstraint::one_plus();
    let u = ModalVector::single_mode(1, 1, -0.5).expect("valid");
    let errors: Vec<f64> = (4..=22)
        .map(|e| (constraint_inf(&g, &u, 1usize << e).1 - 0.5).abs())
        .collect();
    let increases = errors.windows(2).filter(|w| w[1] > w[0]).count();
    let mut checks = vec![
        Check::at_most(9, "certified_error_finest", *errors.last().expect("nonempty"), 1e-6),
        Check::at_most(9, "certified_error_increases", increases as f64, 0.0),
    ];
    match crossing_scenario(40).and_then(|(cfg, drive, t_star)| {
        let dt = cfg.mesh.dt();
        match constrained_solve(&cfg, &ZeroForcing, &g, Some(&drive)) {
            Err(Error::Inadmissible { time, .. }) => Ok((time - t_star).abs() / dt),
            Err(e) => Err(e),
            Ok(_) => Ok(f64::INFINITY),
        }
    }) {
        Ok(cells_off) => checks.push(Check::at_most(9, "crossing_offset_cells", cells_off, 1.0)),
        Err(e) => checks.push(Check::failed(9, "crossing", &e)),
    }
    match refinement_shift() {
        Ok(shift) => checks.push(Check::at_most(9, "admissible_refinement_shift", shift, 1e-6)),
        Err(e) => checks.push(Check::failed(9, "refinement", &e)),
    }
    checks
}

fn refinement_shift() -> Result<f64, Error> {
    let (cfg, f) = invariance_config()?;
    let drive = DriveTerm::constant(ModalVector::single_mode(16, 1, 0.5)?);
    let g = AffineConstraint::one_plus();
    let coarse = constrained_solve(&cfg, &f, &g, Some(&drive))?;
    let fine = constrained_solve(&cfg.with_mesh(cfg.mesh.refined(2)?), &f, &g, Some(&drive))?;
    Ok(coarse
        .constraint
        .iter()
        .enumerate()
        .map(|(j, c)| (c.certified_lower_bound - fine.constraint[2 * j].certified_lower_bound).abs())
        .fold(0.0, f64::max))
}

/// Cubic forcing with drive `2 x (1 - x^2)`: weak-residual tail beyond `n`.
pub fn tail_residuals(ns: &[usize], capacity: usize) -> Result<Vec<f64>, Error> {
    let p = unit();
    let f = PointwiseForcing::monomial(3, capacity)?;
    let drive = DriveTerm::constant(cubic_drive(2.0, capacity));
    let omega = telegraph_core::solver::estimate_omega(&p, capacity, 1)?;
    ns.par_iter()
        .map(|&n| {
            let opts = SolveOptions {
                n,
                capacity,
                cells: 20,
                omega_override: Some(omega),
                ..SolveOptions::default()
            };
            let cfg = SolveConfig::new(p, &f, &opts)?;
            let traj = solve_and_monitor(&cfg, &f, &AffineConstraint::one_plus(), Some(&drive))?;
            let wr = weak_residual(&traj, &f, &p, capacity)?;
            Ok(wr.max_over(n + 1, capacity))
        })
        .collect()
}

fn projection_tail() -> Vec<Check> {
    let ns = [4usize, 8, 16, 32];
    match tail_residuals(&ns, 128) {
        Ok(tails) => {
            let worst_ratio = tails.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            let c = Check::at_most(10, "tail_ratio_per_doubling", worst_ratio, 1.05);
            vec![c.witness(Some(format!("tails {tails:?} for n = {ns:?}")))]
        }
        Err(e) => vec![Check::failed(10, "tail", &e)],
    }
}
