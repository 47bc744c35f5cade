//! The generator
//!
//! ```text
//! U = [ 0            I      ]
//!     [ kappa d2/dx2 -nu I  ]
//! ```
//!
//! its exact modal semigroup `T(t)`, the resolvent for real `lambda > 0`,
//! the spectral abscissa and the operator-norm profile of `T(t)` on `D(U)`.
//!
//! On `phi_n` the generator reduces to the 2x2 system `a' = b`,
//! `b' = -kappa (n pi)^2 a - nu b`, with discriminant
//! `theta_n = 4 n^2 pi^2 kappa - nu^2` selecting the damping regime.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{check_capacity, du_weight_sq, ModalVector, PhysicalParams, StateVector};

/// Relative width of the band around `theta_n = 0` routed to the critical
/// formulas.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Multiplier applied to the sampled supremum when reporting `omega`.
pub const OMEGA_SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Underdamped,
    Critical,
    Overdamped,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Underdamped => "underdamped",
            RegimeKind::Critical => "critical",
            RegimeKind::Overdamped => "overdamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRegime {
    pub n: usize,
    /// `4 n^2 pi^2 kappa - nu^2`.
    pub theta_n: f64,
    pub kind: RegimeKind,
    /// `sqrt(theta_n) / 2`, underdamped only.
    pub omega_n: Option<f64>,
    /// `sqrt(-theta_n) / 2`, overdamped only.
    pub rho_n: Option<f64>,
}

pub fn classify_mode(n: usize, params: &PhysicalParams) -> ModeRegime {
    let four_stiff = 4.0 * params.stiffness(n);
    let nu2 = params.nu() * params.nu();
    let theta_n = four_stiff - nu2;
    let band = CRITICAL_TOLERANCE * four_stiff.max(nu2);
    if libm::fabs(theta_n) <= band {
        ModeRegime {
            n,
            theta_n,
            kind: RegimeKind::Critical,
            omega_n: None,
            rho_n: None,
        }
    } else if theta_n > 0.0 {
        ModeRegime {
            n,
            theta_n,
            kind: RegimeKind::Underdamped,
            omega_n: Some(libm::sqrt(theta_n) / 2.0),
            rho_n: None,
        }
    } else {
        ModeRegime {
            n,
            theta_n,
            kind: RegimeKind::Overdamped,
            omega_n: None,
            rho_n: Some(libm::sqrt(-theta_n) / 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaBranch {
    /// Every `theta_n >= 0`: `theta = -nu / 2`.
    AllNonnegative,
    /// Some `theta_n < 0`: maximum of `-nu/2 + rho_n` over those modes.
    Overdamped { argmax: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub theta: f64,
    pub branch: AbscissaBranch,
    pub per_mode: Vec<ModeRegime>,
}

/// Number of modes with `theta_n < 0`, i.e. `n < nu / (2 pi sqrt(kappa))`,
/// exclusive of modes routed to the critical band.
pub fn overdamped_mode_count(params: &PhysicalParams) -> usize {
    let bound = params.nu() / (2.0 * PI * libm::sqrt(params.kappa()));
    let mut n = libm::floor(bound) as usize + 1;
    while n > 0 && classify_mode(n, params).kind != RegimeKind::Overdamped {
        n -= 1;
    }
    n
}

/// Spectral abscissa bound `theta` with `{Re lambda > theta}` in the resolvent
/// set. The per-mode table covers `1 ..= max(n_max, overdamped modes)`.
pub fn spectral_abscissa(params: &PhysicalParams, n_max: usize) -> SpectralSummary {
    let over = overdamped_mode_count(params);
    let half_nu = params.nu() / 2.0;
    let mut theta = -half_nu;
    let mut branch = AbscissaBranch::AllNonnegative;
    for n in 1..=over {
        if let Some(rho) = classify_mode(n, params).rho_n {
            let candidate = -half_nu + rho;
            if matches!(branch, AbscissaBranch::AllNonnegative) || candidate > theta {
                theta = candidate;
                branch = AbscissaBranch::Overdamped { argmax: n };
            }
        }
    }
    let per_mode = (1..=n_max.max(over))
        .map(|n| classify_mode(n, params))
        .collect();
    SpectralSummary {
        theta,
        branch,
        per_mode,
    }
}

/// `T(t)` restricted to `span{(phi_n, 0), (0, phi_n)}`: maps the mode-`n`
/// coefficients `(a, b)` of `(u, v)` at time 0 to time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator {
    pub n: usize,
    pub t: f64,
    pub kind: RegimeKind,
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl ModePropagator {
    pub fn apply(&self, a: f64, b: f64) -> (f64, f64) {
        (self.m11 * a + self.m12 * b, self.m21 * a + self.m22 * b)
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `|m11 m22| + |m12 m21|`, the magnitude the determinant is computed
    /// from; roundoff in [`det`](Self::det) is relative to this.
    pub fn det_scale(&self) -> f64 {
        libm::fabs(self.m11 * self.m22) + libm::fabs(self.m12 * self.m21)
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    /// `|W M W^{-1}|_2` with `W = diag(sqrt((n pi)^4 + kappa (n pi)^2), sqrt(kappa) n pi)`,
    /// the operator norm of this block on `D(U)`.
    pub fn du_operator_norm(&self, params: &PhysicalParams) -> f64 {
        let w1 = libm::sqrt(du_weight_sq(self.n, params));
        let w2 = libm::sqrt(params.stiffness(self.n));
        spectral_norm_2x2(
            self.m11,
            self.m12 * w1 / w2,
            self.m21 * w2 / w1,
            self.m22,
        )
    }

    /// Same as [`du_operator_norm`](Self::du_operator_norm) for the phase
    /// space `H1_0 x L2`, weights `(sqrt(kappa) n pi, 1)`.
    pub fn energy_operator_norm(&self, params: &PhysicalParams) -> f64 {
        let w1 = libm::sqrt(params.stiffness(self.n));
        spectral_norm_2x2(self.m11, self.m12 * w1, self.m21 / w1, self.m22)
    }
}

/// Largest singular value of `[[a, b], [c, d]]`.
pub fn spectral_norm_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let frob = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (frob * frob - 4.0 * det * det).max(0.0);
    libm::sqrt((frob + libm::sqrt(disc)) / 2.0)
}

/// Exact propagator of mode `n` over time `t >= 0`.
///
/// Second column (action on `(0, phi_n)`), with `h = nu / 2`:
/// underdamped `(S/omega, C - h S/omega)`, critical `(t e, e - h t e)`,
/// overdamped `((D - E)/(2 rho), ((1 - h/rho) D + (1 + h/rho) E)/2)`.
/// The first column solves the same system with `a(0) = 1, b(0) = 0`.
pub fn propagate_mode(n: usize, t: f64, params: &PhysicalParams) -> Result<ModePropagator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "propagation time must be finite and nonnegative",
        });
    }
    if n == 0 {
        return Err(Error::argument("mode index must be at least 1"));
    }
    Ok(propagate_unchecked(n, t, params))
}

pub(crate) fn propagate_unchecked(n: usize, t: f64, params: &PhysicalParams) -> ModePropagator {
    let regime = classify_mode(n, params);
    let h = params.nu() / 2.0;
    let stiff = params.stiffness(n);
    let (m11, m12, m21, m22) = match regime.kind {
        RegimeKind::Underdamped => {
            let w = regime.omega_n.unwrap_or(0.0);
            let e = libm::exp(-h * t);
            let c = e * libm::cos(w * t);
            let s = e * libm::sin(w * t);
            (c + h / w * s, s / w, -stiff * s / w, c - h / w * s)
        }
        RegimeKind::Critical => {
            let e = libm::exp(-h * t);
            let s = t * e;
            (e + h * s, s, -h * h * s, e - h * s)
        }
        RegimeKind::Overdamped => {
            let r = regime.rho_n.unwrap_or(0.0);
            // D = exp((-h + rho) t), E = exp((-h - rho) t);
            // e^{-ht} sinh(rho t) = -D expm1(-2 rho t) / 2 avoids cancellation.
            let d = libm::exp((-h + r) * t);
            let e = libm::exp((-h - r) * t);
            let sh = -d * libm::expm1(-2.0 * r * t) / 2.0;
            let ch = (d + e) / 2.0;
            (ch + h / r * sh, sh / r, -stiff * sh / r, ch - h / r * sh)
        }
    };
    ModePropagator {
        n,
        t,
        kind: regime.kind,
        m11,
        m12,
        m21,
        m22,
    }
}

/// `T(t) f` mode by mode.
pub fn apply_semigroup(
    state: &StateVector,
    t: f64,
    params: &PhysicalParams,
) -> Result<StateVector> {
    check_capacity(state.u.capacity(), state.v.capacity())?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "propagation time must be finite and nonnegative",
        });
    }
    let cap = state.capacity();
    let mut out = StateVector::zeros(cap);
    for k in 1..=cap {
        let a = state.u.coeff(k);
        let b = state.v.coeff(k);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let (a1, b1) = propagate_unchecked(k, t, params).apply(a, b);
        out.u.coeffs_mut()[k - 1] = a1;
        out.v.coeffs_mut()[k - 1] = b1;
    }
    Ok(out)
}

/// `U f = (v, kappa u'' - nu v)`.
pub fn apply_generator(state: &StateVector, params: &PhysicalParams) -> StateVector {
    let cap = state.capacity();
    let mut second = ModalVector::zeros(cap);
    for k in 1..=cap {
        second.coeffs_mut()[k - 1] =
            -params.stiffness(k) * state.u.coeff(k) - params.nu() * state.v.coeff(k);
    }
    StateVector {
        u: state.v.clone(),
        v: second,
    }
}

/// `(U f, f)` in the phase-space inner product, which reduces to
/// `-nu |v|_{L2}^2`.
pub fn energy_rate(state: &StateVector, params: &PhysicalParams) -> f64 {
    -params.nu() * state.v.l2_norm_sq()
}

/// `R(lambda, U) f` for real `lambda > 0`.
///
/// Per mode, with right-hand side `(w, z)`:
/// `u = (z + (lambda + nu) w) / (kappa (n pi)^2 + lambda (lambda + nu))`,
/// `v = lambda u - w`.
pub fn resolvent_apply(
    lambda: f64,
    rhs: &StateVector,
    params: &PhysicalParams,
) -> Result<StateVector> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::OutOfScope(
            "resolvent is implemented for real lambda > 0 only",
        ));
    }
    check_capacity(rhs.u.capacity(), rhs.v.capacity())?;
    let cap = rhs.capacity();
    let mut out = StateVector::zeros(cap);
    let lp = lambda + params.nu();
    for k in 1..=cap {
        let w = rhs.u.coeff(k);
        let z = rhs.v.coeff(k);
        let u = (z + lp * w) / (params.stiffness(k) + lambda * lp);
        out.u.coeffs_mut()[k - 1] = u;
        out.v.coeffs_mut()[k - 1] = lambda * u - w;
    }
    Ok(out)
}

/// `(lambda I - U) f`.
pub fn shifted_generator(lambda: f64, state: &StateVector, params: &PhysicalParams) -> StateVector {
    let uf = apply_generator(state, params);
    state
        .scaled(lambda)
        .axpy(-1.0, &uf)
        .expect("generator preserves capacity")
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBound {
    /// Sampled supremum times [`OMEGA_SAFETY`].
    pub omega: f64,
    /// Sampled supremum of `|T(t)|_{D(U)}` over grid and modes.
    pub raw_sup: f64,
    /// `(t, max_n |T(t)|_{D(U), mode n})` along the grid.
    pub profile: Vec<(f64, f64)>,
}

/// Grid supremum of the per-mode `D(U)` operator norm of `T(t)` over modes
/// `1 ..= n_max`.
pub fn du_norm_bound(params: &PhysicalParams, t_grid: &[f64], n_max: usize) -> Result<NormBound> {
    if n_max == 0 {
        return Err(Error::argument("n_max must be at least 1"));
    }
    if t_grid.is_empty() {
        return Err(Error::argument("empty time grid"));
    }
    let mut raw_sup: f64 = 0.0;
    let mut profile = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::argument("time grid must be nonnegative"));
        }
        let mut sup: f64 = 0.0;
        for n in 1..=n_max {
            sup = sup.max(propagate_unchecked(n, t, params).du_operator_norm(params));
        }
        raw_sup = raw_sup.max(sup);
        profile.push((t, sup));
    }
    Ok(NormBound {
        omega: OMEGA_SAFETY * raw_sup,
        raw_sup,
        profile,
    })
}

/// Uniform grid on `[0, t_max]` resolving the fastest mode among
/// `1 ..= n_max`: spacing `min(0.1, 0.1 / |lambda_max|) / refine`.
pub fn default_norm_grid(params: &PhysicalParams, n_max: usize, t_max: f64, refine: usize) -> Vec<f64> {
    let fastest = libm::sqrt(params.stiffness(n_max)).max(params.nu());
    let dt = (0.1f64).min(0.1 / fastest) / refine.max(1) as f64;
    let steps = libm::ceil(t_max / dt) as usize;
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

/// Horizon used for `omega` by default: long enough for the slowest mode
/// envelope `exp(theta t)` to fall below `1e-3`.
pub fn default_norm_horizon(params: &PhysicalParams) -> f64 {
    let theta = spectral_abscissa(params, 1).theta;
    (7.0 / -theta).max(20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(nu: f64, kappa: f64) -> PhysicalParams {
        PhysicalParams::new(nu, kappa).unwrap()
    }

    #[test]
    fn classify_examples() {
        let r = classify_mode(1, &p(1.0, 1.0));
        assert_eq!(r.kind, RegimeKind::Underdamped);
        assert!((r.theta_n - (4.0 * PI * PI - 1.0)).abs() < 1e-12);
        assert!((r.omega_n.unwrap() - 3.101_548_710_094_580_7).abs() < 1e-9);

        let r = classify_mode(1, &p(2.0 * PI, 1.0));
        assert_eq!(r.kind, RegimeKind::Critical);

        let r = classify_mode(1, &p(10.0, 0.1));
        assert_eq!(r.kind, RegimeKind::Overdamped);
        assert!((r.rho_n.unwrap() - 4.900_310_149_356_984).abs() < 1e-9);
    }

    #[test]
    fn regime_identities() {
        let prm = p(3.0, 0.2);
        for n in 1..=20 {
            let r = classify_mode(n, &prm);
            match r.kind {
                RegimeKind::Underdamped => {
                    let w = r.omega_n.unwrap();
                    let lhs = w * w + 2.25;
                    assert!((lhs - prm.stiffness(n)).abs() < 1e-10 * lhs);
                }
                RegimeKind::Overdamped => assert!(r.rho_n.unwrap() < 1.5),
                RegimeKind::Critical => panic!("no critical mode expected"),
            }
        }
    }

    #[test]
    fn abscissa_examples() {
        let s = spectral_abscissa(&p(1.0, 1.0), 4);
        assert_eq!(s.theta, -0.5);
        assert_eq!(s.branch, AbscissaBranch::AllNonnegative);

        let s = spectral_abscissa(&p(10.0, 0.1), 4);
        let expected = -5.0 + libm::sqrt(100.0 - 0.4 * PI * PI) / 2.0;
        assert!((s.theta - expected).abs() < 1e-14);
        assert!((s.theta + 0.099_689_850_643_016_16).abs() < 1e-9);
        assert_eq!(s.branch, AbscissaBranch::Overdamped { argmax: 1 });
        assert_eq!(overdamped_mode_count(&p(10.0, 0.1)), 5);

        let s = spectral_abscissa(&p(2.0 * PI, 1.0), 3);
        assert!((s.theta + PI).abs() < 1e-15);
        assert_eq!(s.branch, AbscissaBranch::AllNonnegative);
    }

    #[test]
    fn abscissa_is_negative() {
        for &(nu, kappa) in &[(0.1, 5.0), (50.0, 0.01), (7.0, 1.0), (1e-3, 1e-4)] {
            assert!(spectral_abscissa(&p(nu, kappa), 1).theta < 0.0);
        }
    }

    #[test]
    fn propagator_identity_at_zero() {
        for prm in [p(1.0, 1.0), p(2.0 * PI, 1.0), p(10.0, 0.1)] {
            for n in 1..=6 {
                let m = propagate_mode(n, 0.0, &prm).unwrap();
                assert_eq!(m.matrix(), [[1.0, 0.0], [0.0, 1.0]]);
            }
        }
    }

    #[test]
    fn propagator_second_column_matches_printed_formulas() {
        let prm = p(1.0, 1.0);
        let w = libm::sqrt(4.0 * PI * PI - 1.0) / 2.0;
        let t = 0.5;
        let s = libm::exp(-0.25) * libm::sin(w * t);
        let c = libm::exp(-0.25) * libm::cos(w * t);
        let m = propagate_mode(1, t, &prm).unwrap();
        assert!((m.m12 - s / w).abs() < 1e-15);
        assert!((m.m22 - (c - s / (2.0 * w))).abs() < 1e-15);

        let prm = p(10.0, 0.1);
        let rho = libm::sqrt(100.0 - 0.4 * PI * PI) / 2.0;
        let t = 0.7;
        let d = libm::exp((-5.0 + rho) * t);
        let e = libm::exp((-5.0 - rho) * t);
        let m = propagate_mode(1, t, &prm).unwrap();
        assert!((m.m12 - (d - e) / (2.0 * rho)).abs() < 1e-14);
        let v = 0.5 * ((1.0 - 10.0 / (2.0 * rho)) * d + (1.0 + 10.0 / (2.0 * rho)) * e);
        assert!((m.m22 - v).abs() < 1e-14);

        let prm = p(2.0 * PI, 1.0);
        let t = 0.3;
        let e = libm::exp(-PI * t);
        let m = propagate_mode(1, t, &prm).unwrap();
        assert!((m.m12 - t * e).abs() < 1e-15);
        assert!((m.m22 - (e - PI * t * e)).abs() < 1e-15);
    }

    #[test]
    fn abel_identity() {
        for prm in [p(1.0, 1.0), p(2.0 * PI, 1.0), p(10.0, 0.1)] {
            for n in 1..=8 {
                for i in 0..=40 {
                    let t = 0.25 * i as f64;
                    let m = propagate_mode(n, t, &prm).unwrap();
                    let target = libm::exp(-prm.nu() * t);
                    let scale = target.max(m.det_scale());
                    assert!((m.det() - target).abs() <= 1e-12 * scale,
                        "n={n} t={t}: {} vs {target}", m.det());
                }
            }
        }
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(propagate_mode(1, -1.0, &p(1.0, 1.0)).is_err());
        let s = StateVector::zeros(3);
        assert!(apply_semigroup(&s, -0.1, &p(1.0, 1.0)).is_err());
    }

    #[test]
    fn energy_rate_examples() {
        let prm = p(0.7, 1.3);
        let u = ModalVector::from_coeffs(alloc::vec![1.0, 2.0]);
        assert_eq!(energy_rate(&StateVector::new(u, ModalVector::zeros(2)).unwrap(), &prm), 0.0);
        let v = ModalVector::single_mode(2, 1, 1.0).unwrap();
        let f = StateVector::new(ModalVector::zeros(2), v).unwrap();
        assert!((energy_rate(&f, &prm) + 0.7).abs() < 1e-15);
    }

    #[test]
    fn resolvent_rejects_nonpositive_lambda() {
        let s = StateVector::zeros(2);
        assert!(matches!(resolvent_apply(0.0, &s, &p(1.0, 1.0)), Err(Error::OutOfScope(_))));
        assert_eq!(resolvent_apply(1.0, &s, &p(1.0, 1.0)).unwrap(), s);
    }

    #[test]
    fn du_norm_is_one_at_zero_and_decays() {
        let prm = p(1.0, 1.0);
        let b = du_norm_bound(&prm, &[0.0, 20.0], 32).unwrap();
        assert!((b.profile[0].1 - 1.0).abs() < 1e-14);
        assert!(b.profile[1].1 <= 1e-3 * b.profile[0].1);
        assert!(b.omega >= 1.0);
    }
}
