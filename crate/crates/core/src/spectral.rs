//! Sine basis on `I = (-1, 1)`, modal state vectors, the projections `Q_n`
//! and `P_n`, the norms of the phase spaces and the `L2` n-widths of
//! `H1_0` balls.
//!
//! Norms use the equivalent inner products
//!
//! ```text
//! (u, w)_{H1_0} = kappa (u', w')_{L2}
//! (u, w)_{D}    = (u'', w'')_{L2} + (u, w)_{H1_0}
//! ```
//!
//! so for `u = sum a_k phi_k` one has `|u|_{L2}^2 = sum a_k^2`,
//! `|u|_{H1_0}^2 = kappa sum (k pi)^2 a_k^2` and
//! `|u|_D^2 = sum ((k pi)^4 + kappa (k pi)^2) a_k^2`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;

/// The constants `nu` (damping) and `kappa` (stiffness).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    nu: f64,
    kappa: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, kappa: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
                reason: "must be positive and finite",
            });
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must be positive and finite",
            });
        }
        Ok(PhysicalParams { nu, kappa })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `kappa (k pi)^2`, the eigenvalue of `-kappa d^2/dx^2` on `phi_k`.
    pub fn stiffness(&self, k: usize) -> f64 {
        let kp = k as f64 * PI;
        self.kappa * kp * kp
    }
}

/// Evaluates `phi_k(x) = sin(k pi x)`.
pub fn basis(k: usize, x: f64) -> f64 {
    libm::sin(k as f64 * PI * x)
}

/// Coefficients `a_1 .. a_M` of `u = sum a_k sin(k pi x)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModalVector {
    coeffs: Vec<f64>,
}

impl ModalVector {
    pub fn zeros(capacity: usize) -> Self {
        ModalVector {
            coeffs: alloc::vec![0.0; capacity],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        ModalVector { coeffs }
    }

    /// `amplitude * phi_k` in a vector of the given capacity.
    pub fn single_mode(capacity: usize, k: usize, amplitude: f64) -> Result<Self> {
        if k == 0 || k > capacity {
            return Err(Error::Capacity {
                requested: k,
                capacity,
            });
        }
        let mut v = Self::zeros(capacity);
        v.coeffs[k - 1] = amplitude;
        Ok(v)
    }

    pub fn capacity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `phi_k`, zero beyond the capacity.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Coefficients up to the last nonzero one.
    pub fn active(&self) -> &[f64] {
        let len = self
            .coeffs
            .iter()
            .rposition(|&a| a != 0.0)
            .map_or(0, |i| i + 1);
        &self.coeffs[..len]
    }

    /// Highest mode index carrying a nonzero coefficient (0 for the zero
    /// vector).
    pub fn highest_mode(&self) -> usize {
        self.active().len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }

    /// Copy with a different capacity, truncating or zero-padding.
    pub fn resized(&self, capacity: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(capacity, 0.0);
        ModalVector { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        sine_series(self.active(), x)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.active()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let kp = (i + 1) as f64 * PI;
                a * kp * libm::cos(kp * x)
            })
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_sq())
    }

    pub fn h10_norm_sq(&self, params: &PhysicalParams) -> f64 {
        self.weighted_sq(|k| params.stiffness(k))
    }

    pub fn h10_norm(&self, params: &PhysicalParams) -> f64 {
        libm::sqrt(self.h10_norm_sq(params))
    }

    pub fn du_norm_sq(&self, params: &PhysicalParams) -> f64 {
        self.weighted_sq(|k| du_weight_sq(k, params))
    }

    pub fn du_norm(&self, params: &PhysicalParams) -> f64 {
        libm::sqrt(self.du_norm_sq(params))
    }

    pub fn l2_inner(&self, other: &ModalVector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn h10_inner(&self, other: &ModalVector, params: &PhysicalParams) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| params.stiffness(i + 1) * a * b)
            .sum()
    }

    /// `sum |a_k| k pi`, an upper bound for `sup |u'|`.
    pub fn derivative_sup_bound(&self) -> f64 {
        self.active()
            .iter()
            .enumerate()
            .map(|(i, a)| libm::fabs(*a) * (i + 1) as f64 * PI)
            .sum()
    }

    fn weighted_sq(&self, weight: impl Fn(usize) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| weight(i + 1) * a * a)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ModalVector {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// `self + s * other`, capacities must agree.
    pub fn axpy(&self, s: f64, other: &ModalVector) -> Result<Self> {
        check_capacity(self.capacity(), other.capacity())?;
        Ok(ModalVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }
}

/// `(k pi)^4 + kappa (k pi)^2`.
pub fn du_weight_sq(k: usize, params: &PhysicalParams) -> f64 {
    let kp = k as f64 * PI;
    let kp2 = kp * kp;
    kp2 * kp2 + params.kappa() * kp2
}

/// `sum a_k sin(k pi x)` by the Chebyshev-type recurrence
/// `sin((k+1) t) = 2 cos(t) sin(k t) - sin((k-1) t)`.
pub(crate) fn sine_series(coeffs: &[f64], x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    // Clenshaw for the sine series.
    let theta = PI * x;
    let two_cos = 2.0 * libm::cos(theta);
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &a in coeffs.iter().rev() {
        let b0 = a + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * libm::sin(theta)
}

pub(crate) fn check_capacity(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::CapacityMismatch { left, right });
    }
    Ok(())
}

impl Add<&ModalVector> for &ModalVector {
    type Output = ModalVector;

    /// Panics on capacity mismatch; use [`ModalVector::axpy`] for a
    /// fallible variant.
    fn add(self, rhs: &ModalVector) -> ModalVector {
        assert_eq!(self.capacity(), rhs.capacity(), "capacity mismatch");
        self.axpy(1.0, rhs).expect("capacities checked")
    }
}

impl Sub<&ModalVector> for &ModalVector {
    type Output = ModalVector;

    fn sub(self, rhs: &ModalVector) -> ModalVector {
        assert_eq!(self.capacity(), rhs.capacity(), "capacity mismatch");
        self.axpy(-1.0, rhs).expect("capacities checked")
    }
}

impl AddAssign<&ModalVector> for ModalVector {
    fn add_assign(&mut self, rhs: &ModalVector) {
        assert_eq!(self.capacity(), rhs.capacity(), "capacity mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<f64> for &ModalVector {
    type Output = ModalVector;

    fn mul(self, rhs: f64) -> ModalVector {
        self.scaled(rhs)
    }
}

impl Neg for &ModalVector {
    type Output = ModalVector;

    fn neg(self) -> ModalVector {
        self.scaled(-1.0)
    }
}

/// The pair `(u, v) = (u, u_t)` in modal form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector {
    pub u: ModalVector,
    pub v: ModalVector,
}

impl StateVector {
    pub fn new(u: ModalVector, v: ModalVector) -> Result<Self> {
        check_capacity(u.capacity(), v.capacity())?;
        Ok(StateVector { u, v })
    }

    pub fn zeros(capacity: usize) -> Self {
        StateVector {
            u: ModalVector::zeros(capacity),
            v: ModalVector::zeros(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.u.capacity()
    }

    /// `|u|_{H1_0}^2 + |v|_{L2}^2`.
    pub fn energy_norm_sq(&self, params: &PhysicalParams) -> f64 {
        self.u.h10_norm_sq(params) + self.v.l2_norm_sq()
    }

    pub fn energy_norm(&self, params: &PhysicalParams) -> f64 {
        libm::sqrt(self.energy_norm_sq(params))
    }

    /// The phase-space inner product `(u1, u2)_{H1_0} + (v1, v2)_{L2}`.
    pub fn energy_inner(&self, other: &StateVector, params: &PhysicalParams) -> f64 {
        self.u.h10_inner(&other.u, params) + self.v.l2_inner(&other.v)
    }

    /// `|u|_D^2 + |v|_{H1_0}^2`.
    pub fn du_norm_sq(&self, params: &PhysicalParams) -> f64 {
        self.u.du_norm_sq(params) + self.v.h10_norm_sq(params)
    }

    pub fn du_norm(&self, params: &PhysicalParams) -> f64 {
        libm::sqrt(self.du_norm_sq(params))
    }

    pub fn axpy(&self, s: f64, other: &StateVector) -> Result<Self> {
        Ok(StateVector {
            u: self.u.axpy(s, &other.u)?,
            v: self.v.axpy(s, &other.v)?,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateVector {
            u: self.u.scaled(s),
            v: self.v.scaled(s),
        }
    }
}

/// `Q_n u`: keeps `a_1 .. a_n`, zeroes the rest, capacity unchanged.
pub fn project_q(u: &ModalVector, n: usize) -> Result<ModalVector> {
    if n == 0 {
        return Err(Error::argument("projection order must be at least 1"));
    }
    if n > u.capacity() {
        return Err(Error::Capacity {
            requested: n,
            capacity: u.capacity(),
        });
    }
    let mut out = u.clone();
    for a in &mut out.coeffs[n..] {
        *a = 0.0;
    }
    Ok(out)
}

/// `Q_n f` for a sampled function, through quadrature inner products
/// `(f, phi_k)_{L2}`. The result has the grid's capacity.
pub fn project_function(
    f: impl Fn(f64) -> f64,
    n: usize,
    grid: &QuadratureGrid,
) -> Result<ModalVector> {
    if n == 0 {
        return Err(Error::argument("projection order must be at least 1"));
    }
    if n > grid.capacity() {
        return Err(Error::Capacity {
            requested: n,
            capacity: grid.capacity(),
        });
    }
    let values: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
    let coeffs = grid.analyze(&values, n)?;
    Ok(coeffs.resized(grid.capacity()))
}

/// `P_n` on a time-indexed trajectory: `Q_n` at every sample.
pub fn project_p(traj: &[ModalVector], n: usize) -> Result<Vec<ModalVector>> {
    if traj.is_empty() {
        return Err(Error::argument("empty trajectory"));
    }
    let cap = traj[0].capacity();
    traj.iter()
        .map(|u| {
            check_capacity(cap, u.capacity())?;
            project_q(u, n)
        })
        .collect()
}

/// `L2` n-width of the `H1_0` ball of radius `b`: `b / ((n + 1) pi sqrt(kappa))`.
pub fn n_width(b: f64, n: usize, params: &PhysicalParams) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            reason: "ball radius must be positive",
        });
    }
    if n == 0 {
        return Err(Error::argument("n-width order must be at least 1"));
    }
    Ok(b / ((n + 1) as f64 * PI * libm::sqrt(params.kappa())))
}

/// The element of the `H1_0` ball of radius `b` furthest (in `L2`) from
/// `span{phi_1 .. phi_n}`: `b / (sqrt(kappa) (n+1) pi) phi_{n+1}`.
pub fn extremal_element(
    b: f64,
    n: usize,
    params: &PhysicalParams,
    capacity: usize,
) -> Result<ModalVector> {
    let amp = n_width(b, n, params)?;
    ModalVector::single_mode(capacity, n + 1, amp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionReport {
    /// `|Q_n h - h|_{L2}`.
    pub error: f64,
    pub width: f64,
    pub within_width: bool,
}

/// Measures `|Q_n h - h|_{L2}` against the n-width for `h` in the
/// `H1_0` ball of radius `b`.
pub fn projection_error_bound_check(
    h: &ModalVector,
    b: f64,
    n: usize,
    params: &PhysicalParams,
) -> Result<ProjectionReport> {
    let norm = h.h10_norm(params);
    if norm > b * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "|h|_H1_0 = {norm} exceeds ball radius {b}"
        )));
    }
    let width = n_width(b, n, params)?;
    let error = if n >= h.capacity() {
        0.0
    } else {
        h.coeffs[n..].iter().map(|a| a * a).sum::<f64>()
    };
    let error = libm::sqrt(error);
    Ok(ProjectionReport {
        error,
        width,
        within_width: error <= width + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn params_reject_nonpositive() {
        assert!(PhysicalParams::new(0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -2.0).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn q_kills_high_modes() {
        let u = ModalVector::from_coeffs(vec![1.0, 0.0, 3.0]);
        let q = project_q(&u, 2).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 0.0, 0.0]);
        assert_eq!(project_q(&q, 2).unwrap(), q);
    }

    #[test]
    fn q_rejects_bad_orders() {
        let u = ModalVector::zeros(4);
        assert!(matches!(project_q(&u, 5), Err(Error::Capacity { .. })));
        assert!(project_q(&u, 0).is_err());
    }

    #[test]
    fn p_is_pointwise_q() {
        let traj: Vec<ModalVector> = (0..5)
            .map(|j| {
                let t = j as f64 * 0.25;
                ModalVector::from_coeffs((1..=6).map(|k| libm::pow(t, k as f64)).collect())
            })
            .collect();
        let p = project_p(&traj, 2).unwrap();
        for (orig, proj) in traj.iter().zip(&p) {
            assert_eq!(proj.coeffs()[..2], orig.coeffs()[..2]);
            assert!(proj.coeffs()[2..].iter().all(|&a| a == 0.0));
            assert_eq!(proj, &project_q(orig, 2).unwrap());
        }
        assert!(project_p(&[], 2).is_err());
    }

    #[test]
    fn constant_trajectory_is_unchanged() {
        let phi1 = ModalVector::single_mode(4, 1, 1.0).unwrap();
        let traj = vec![phi1.clone(); 3];
        assert_eq!(project_p(&traj, 2).unwrap(), traj);
    }

    #[test]
    fn width_examples() {
        let p = params();
        assert!((n_width(PI, 3, &p).unwrap() - 0.25).abs() < 1e-15);
        assert!((n_width(1.0, 1, &p).unwrap() - 0.159_154_943_091_895_35).abs() < 1e-15);
        let k2 = PhysicalParams::new(1.0, 4.0).unwrap();
        assert!((n_width(PI * 2.0, 1, &k2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn extremal_element_attains_width() {
        let p = PhysicalParams::new(0.3, 2.5).unwrap();
        for n in 1..=8 {
            let e = extremal_element(1.7, n, &p, 16).unwrap();
            assert!((e.h10_norm(&p) - 1.7).abs() < 1e-12);
            let r = projection_error_bound_check(&e, 1.7, n, &p).unwrap();
            assert!((r.error - r.width).abs() < 1e-12);
            assert!(r.within_width);
        }
    }

    #[test]
    fn projection_check_rejects_outside_ball() {
        let u = ModalVector::single_mode(4, 1, 1.0).unwrap();
        assert!(projection_error_bound_check(&u, 0.5, 1, &params()).is_err());
        let r = projection_error_bound_check(&u, 10.0, 1, &params()).unwrap();
        assert_eq!(r.error, 0.0);
    }

    #[test]
    fn norms_of_single_modes() {
        let p = PhysicalParams::new(1.0, 2.0).unwrap();
        let u = ModalVector::single_mode(5, 3, 2.0).unwrap();
        let kp = 3.0 * PI;
        assert!((u.l2_norm_sq() - 4.0).abs() < 1e-14);
        assert!((u.h10_norm_sq(&p) - 4.0 * 2.0 * kp * kp).abs() < 1e-10);
        assert!((u.du_norm_sq(&p) - 4.0 * (kp.powi(4) + 2.0 * kp * kp)).abs() < 1e-8);
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let u = ModalVector::from_coeffs(vec![0.3, -0.2, 0.7, 0.0, 1.1]);
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            let direct: f64 = (1..=5).map(|k| u.coeff(k) * basis(k, x)).sum();
            assert!((u.eval(x) - direct).abs() < 1e-14);
        }
    }
}
