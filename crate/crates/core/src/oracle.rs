//! Independent reference computations.
//!
//! Nothing here reuses the modal propagator, the Gauss-Legendre generator or
//! the Duhamel weights, so agreement with the main path is evidence rather
//! than a tautology.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forcing::PointwiseSymbol;
use crate::spectral::{ModalVector, PhysicalParams};

/// Exact solution of `a'' + nu a' + s a = drive`, `a(0) = a'(0) = 0`, with
/// `s = kappa n^2 pi^2 + shift`. Returns `(a(t), a'(t))`.
pub fn modal_ode_closed_form(
    n: usize,
    params: &PhysicalParams,
    shift: f64,
    drive: f64,
    t: f64,
) -> (f64, f64) {
    if drive == 0.0 || t == 0.0 {
        return (0.0, 0.0);
    }
    let nu = params.nu();
    let kn = n as f64 * PI;
    let s = params.kappa() * kn * kn + shift;
    if s == 0.0 {
        let e = -libm::expm1(-nu * t);
        return (drive * (t / nu - e / (nu * nu)), drive * e / nu);
    }
    // phi solves the homogeneous problem with phi(0) = 1, phi'(0) = 0.
    let half = nu / 2.0;
    let disc = nu * nu - 4.0 * s;
    let (phi, dphi) = if libm::fabs(disc) <= 1e-12 * (nu * nu).max(4.0 * libm::fabs(s)) {
        let e = libm::exp(-half * t);
        (e * (1.0 + half * t), -half * half * t * e)
    } else if disc < 0.0 {
        let w = libm::sqrt(-disc) / 2.0;
        let e = libm::exp(-half * t);
        let (sn, cs) = (libm::sin(w * t), libm::cos(w * t));
        (e * (cs + half / w * sn), -e * s / w * sn)
    } else {
        let r = libm::sqrt(disc) / 2.0;
        let (r1, r2) = (-half + r, -half - r);
        let (e1, e2) = (libm::exp(r1 * t), libm::exp(r2 * t));
        ((r1 * e2 - r2 * e1) / (r1 - r2), r1 * r2 * (e2 - e1) / (r1 - r2))
    };
    (drive / s * (1.0 - phi), -drive / s * dphi)
}

/// Fundamental matrix of `a'' + nu a' + kappa n^2 pi^2 a = 0` at time `t`
/// by piecewise Taylor expansion. Rows map `(a(0), a'(0))` to
/// `(a(t), a'(t))`.
pub fn taylor_propagator(n: usize, params: &PhysicalParams, t: f64) -> Result<[[f64; 2]; 2]> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::argument("time must be finite and nonnegative"));
    }
    let nu = params.nu();
    let kn = n as f64 * PI;
    let s = params.kappa() * kn * kn;
    // Work in (sqrt(s) a, a'), where the generator is close to normal.
    let w = libm::sqrt(s);
    let a = [[0.0, w], [-w, -nu]];
    let size = w + nu;
    let steps = libm::ceil(size * t / 1.0).max(1.0) as usize;
    let h = t / steps as f64;
    let step = taylor_exp(a, h);
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..steps {
        m = mat_mul(step, m);
    }
    Ok([[m[0][0], m[0][1] / w], [m[1][0] * w, m[1][1]]])
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn taylor_exp(a: [[f64; 2]; 2], h: f64) -> [[f64; 2]; 2] {
    let ah = [[a[0][0] * h, a[0][1] * h], [a[1][0] * h, a[1][1] * h]];
    let mut sum = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = sum;
    for k in 1..60 {
        term = mat_mul(ah, term);
        let inv = 1.0 / k as f64;
        let mut big: f64 = 0.0;
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x *= inv;
                big = big.max(libm::fabs(*x));
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
        if big < 1e-20 {
            break;
        }
    }
    sum
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss rule for `int_{-1}^{1} f`.
pub fn composite_integral(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = 2.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -1.0 + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for (x, w) in GAUSS5_NODES.iter().zip(&GAUSS5_WEIGHTS) {
            acc += w * f(mid + 0.5 * width * x);
        }
        total += 0.5 * width * acc;
    }
    total
}

/// `(f, sin(k pi x))` on `(-1, 1)` by composite quadrature.
pub fn sine_coefficient(f: impl Fn(f64) -> f64, k: usize, panels: usize) -> f64 {
    let kp = k as f64 * PI;
    composite_integral(|x| f(x) * libm::sin(kp * x), panels)
}

/// First `capacity` sine coefficients of `f`.
pub fn sine_coefficients(f: impl Fn(f64) -> f64, capacity: usize, panels: usize) -> ModalVector {
    let coeffs = (1..=capacity).map(|k| sine_coefficient(&f, k, panels)).collect();
    ModalVector::from_coeffs(coeffs)
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Pointwise sum of the sine series, without the Clenshaw recurrence.
fn naive_eval(u: &ModalVector, x: f64) -> f64 {
    u.coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a * libm::sin((i + 1) as f64 * PI * x))
        .sum()
}

fn naive_derivative(u: &ModalVector, x: f64) -> f64 {
    u.coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let kp = (i + 1) as f64 * PI;
            a * kp * libm::cos(kp * x)
        })
        .sum()
}

/// `|u|_{L^2}` by quadrature of the synthesized function.
pub fn l2_norm_by_quadrature(u: &ModalVector, panels: usize) -> f64 {
    libm::sqrt(composite_integral(|x| sq(naive_eval(u, x)), panels))
}

/// `kappa^{1/2} |u_x|_{L^2}` by quadrature.
pub fn h10_norm_by_quadrature(u: &ModalVector, params: &PhysicalParams, panels: usize) -> f64 {
    let d = composite_integral(|x| sq(naive_derivative(u, x)), panels);
    libm::sqrt(params.kappa() * d)
}

/// `|u - Q_n u|_{L^2}` from the synthesized functions.
pub fn projection_error_by_quadrature(u: &ModalVector, n: usize, panels: usize) -> f64 {
    let mut head = u.clone();
    for (i, a) in head.coeffs_mut().iter_mut().enumerate() {
        if i >= n {
            *a = 0.0;
        }
    }
    libm::sqrt(composite_integral(
        |x| sq(naive_eval(u, x) - naive_eval(&head, x)),
        panels,
    ))
}

/// Brute-force n-width proxy: worst `L^2` projection error over the given
/// elements after scaling each onto the `H1_0`-sphere of radius `b`.
pub fn sampled_width(
    elements: &[ModalVector],
    b: f64,
    n: usize,
    params: &PhysicalParams,
    panels: usize,
) -> f64 {
    elements
        .iter()
        .filter(|e| !e.is_zero())
        .map(|e| {
            let scaled = e.scaled(b / h10_norm_by_quadrature(e, params, panels));
            projection_error_by_quadrature(&scaled, n, panels)
        })
        .fold(0.0, f64::max)
}

/// Uniform interior grid `x_j = -1 + j h`, `h = 2 / (m + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    m: usize,
    h: f64,
}

impl FdGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 16 {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m as f64,
                reason: "finite-difference grid needs at least 16 interior points",
            });
        }
        Ok(FdGrid {
            m,
            h: 2.0 / (m + 1) as f64,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn point(&self, j: usize) -> f64 {
        -1.0 + j as f64 * self.h
    }

    /// Interior points `x_1 .. x_m`.
    pub fn points(&self) -> Vec<f64> {
        (1..=self.m).map(|j| self.point(j)).collect()
    }

    /// Eigenvalue of the second difference for `sin(k pi x)`.
    pub fn laplacian_eigenvalue(&self, k: usize) -> f64 {
        let s = libm::sin(k as f64 * PI * self.h / 2.0);
        -4.0 / (self.h * self.h) * s * s
    }

    /// `out = Delta_h u` with homogeneous Dirichlet values.
    pub fn apply_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let m = self.m;
        let inv = 1.0 / (self.h * self.h);
        for j in 0..m {
            let left = if j == 0 { 0.0 } else { u[j - 1] };
            let right = if j + 1 == m { 0.0 } else { u[j + 1] };
            out[j] = (left - 2.0 * u[j] + right) * inv;
        }
    }

    /// Solves `(-Delta_h + 1) w = u` by the Thomas algorithm.
    pub fn solve_shifted(&self, u: &[f64]) -> Vec<f64> {
        let m = self.m;
        let inv = 1.0 / (self.h * self.h);
        let diag = 2.0 * inv + 1.0;
        let off = -inv;
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = off / diag;
        d[0] = u[0] / diag;
        for j in 1..m {
            let denom = diag - off * c[j - 1];
            c[j] = off / denom;
            d[j] = (u[j] - off * d[j - 1]) / denom;
        }
        let mut w = vec![0.0; m];
        w[m - 1] = d[m - 1];
        for j in (0..m - 1).rev() {
            w[j] = d[j] - c[j] * w[j + 1];
        }
        w
    }

    /// `sqrt(h sum e_j^2)`.
    pub fn discrete_l2(&self, e: &[f64]) -> f64 {
        libm::sqrt(self.h * e.iter().map(|x| x * x).sum::<f64>())
    }

    /// Samples a modal vector at the interior points.
    pub fn sample(&self, u: &ModalVector) -> Vec<f64> {
        self.points().into_iter().map(|x| u.eval(x)).collect()
    }
}

/// Forcing applied to grid values.
#[derive(Debug, Clone, Copy)]
pub enum FdForcing {
    Zero,
    /// `F(u) = lambda u`.
    Linear(f64),
    Pointwise(PointwiseSymbol),
    /// `F(u) = (-Delta_h + 1)^{-1} u`.
    Bvp,
}

/// Grid samples `u(t_i, x_j)`, `u_t(t_i, x_j)`.
#[derive(Debug, Clone)]
pub struct FdTrajectory {
    pub grid: FdGrid,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub dt: f64,
}

impl FdTrajectory {
    /// `max_i |u(t_i) - reference_i|_h` for per-time modal references.
    pub fn c_l2_distance(&self, reference: &[ModalVector]) -> Result<f64> {
        if reference.len() != self.times.len() {
            return Err(Error::argument("reference does not match the sample times"));
        }
        Ok(self
            .u
            .iter()
            .zip(reference)
            .map(|(u, r)| {
                let e: Vec<f64> = u.iter().zip(self.grid.sample(r)).map(|(a, b)| a - b).collect();
                self.grid.discrete_l2(&e)
            })
            .fold(0.0, f64::max))
    }
}

/// RK4 step limit: 0.8 of the imaginary-axis (`2 sqrt 2`) and real-axis
/// (`2.785`) stability bounds.
pub fn fd_stable_step(params: &PhysicalParams, grid: &FdGrid) -> f64 {
    let wave = 2.0 * libm::sqrt(params.kappa()) / grid.h();
    0.8 * (2.0 * core::f64::consts::SQRT_2 / wave).min(2.785 / params.nu())
}

/// Method-of-lines solve of `u_tt = -nu u_t + kappa Delta_h u + F(u) + g(x, t)`
/// from rest with classical RK4, sampled at the increasing times `t_grid`.
pub fn fd_solve(
    params: &PhysicalParams,
    forcing: FdForcing,
    drive: Option<&dyn Fn(f64, f64) -> f64>,
    t_grid: &[f64],
    m: usize,
) -> Result<FdTrajectory> {
    let grid = FdGrid::new(m)?;
    if t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite())
        || t_grid.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::argument("sample times must be finite, nonnegative and sorted"));
    }
    let dt_max = fd_stable_step(params, &grid);
    let xs = grid.points();
    let nu = params.nu();
    let kappa = params.kappa();
    let rhs = |t: f64, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]| {
        du.copy_from_slice(v);
        grid.apply_laplacian(u, dv);
        let f: Vec<f64> = match forcing {
            FdForcing::Zero => vec![0.0; m],
            FdForcing::Linear(l) => u.iter().map(|x| l * x).collect(),
            FdForcing::Pointwise(sym) => u.iter().map(|&x| sym.apply(x)).collect(),
            FdForcing::Bvp => grid.solve_shifted(u),
        };
        for j in 0..m {
            let g = drive.map_or(0.0, |d| d(xs[j], t));
            dv[j] = kappa * dv[j] - nu * v[j] + f[j] + g;
        }
    };
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut t = 0.0;
    let mut out_u = Vec::with_capacity(t_grid.len());
    let mut out_v = Vec::with_capacity(t_grid.len());
    let zero = vec![0.0; m];
    let (mut k1u, mut k1v) = (zero.clone(), zero.clone());
    let (mut k2u, mut k2v) = (zero.clone(), zero.clone());
    let (mut k3u, mut k3v) = (zero.clone(), zero.clone());
    let (mut k4u, mut k4v) = (zero.clone(), zero.clone());
    let (mut tu, mut tv) = (zero.clone(), zero);
    let mut dt_used: f64 = 0.0;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = libm::ceil(span / dt_max).max(1.0) as usize;
            let dt = span / steps as f64;
            dt_used = dt_used.max(dt);
            for _ in 0..steps {
                rhs(t, &u, &v, &mut k1u, &mut k1v);
                for j in 0..m {
                    tu[j] = u[j] + 0.5 * dt * k1u[j];
                    tv[j] = v[j] + 0.5 * dt * k1v[j];
                }
                rhs(t + 0.5 * dt, &tu, &tv, &mut k2u, &mut k2v);
                for j in 0..m {
                    tu[j] = u[j] + 0.5 * dt * k2u[j];
                    tv[j] = v[j] + 0.5 * dt * k2v[j];
                }
                rhs(t + 0.5 * dt, &tu, &tv, &mut k3u, &mut k3v);
                for j in 0..m {
                    tu[j] = u[j] + dt * k3u[j];
                    tv[j] = v[j] + dt * k3v[j];
                }
                rhs(t + dt, &tu, &tv, &mut k4u, &mut k4v);
                let mut big: f64 = 0.0;
                for j in 0..m {
                    u[j] += dt / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
                    v[j] += dt / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
                    big = big.max(libm::fabs(u[j])).max(libm::fabs(v[j]));
                }
                t += dt;
                if !big.is_finite() || big > 1e12 {
                    return Err(Error::Instability { time: t });
                }
            }
            t = target;
        }
        out_u.push(u.clone());
        out_v.push(v.clone());
    }
    Ok(FdTrajectory {
        grid,
        times: t_grid.to_vec(),
        u: out_u,
        v: out_v,
        dt: dt_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::propagate_mode;

    fn params(nu: f64, kappa: f64) -> PhysicalParams {
        PhysicalParams::new(nu, kappa).unwrap()
    }

    #[test]
    fn closed_form_trivial_and_steady_state() {
        let p = params(1.0, 1.0);
        assert_eq!(modal_ode_closed_form(3, &p, 0.0, 0.0, 2.0), (0.0, 0.0));
        let (a, b) = modal_ode_closed_form(1, &p, 0.0, 1.0, 80.0);
        assert!((a - 1.0 / (PI * PI)).abs() < 1e-14);
        assert!(b.abs() < 1e-14);
    }

    #[test]
    fn closed_form_satisfies_ode() {
        for &(nu, kappa, shift) in &[(1.0, 1.0, 0.0), (10.0, 0.1, 0.0), (2.0, 1.0, -1.0), (1.0, 0.01, -0.5)] {
            let p = params(nu, kappa);
            let h = 1e-4;
            for &t in &[0.3, 1.7] {
                let (a, b) = modal_ode_closed_form(1, &p, shift, 1.0, t);
                let (ap, bp) = modal_ode_closed_form(1, &p, shift, 1.0, t + h);
                let (am, bm) = modal_ode_closed_form(1, &p, shift, 1.0, t - h);
                let s = kappa * PI * PI + shift;
                assert!(((ap - am) / (2.0 * h) - b).abs() < 1e-7);
                let acc = (bp - bm) / (2.0 * h);
                assert!((acc + nu * b + s * a - 1.0).abs() < 1e-6, "{nu} {kappa} {shift}");
            }
        }
    }

    #[test]
    fn taylor_matches_propagator() {
        for &(nu, kappa) in &[(1.0, 1.0), (10.0, 0.1), (0.5, 2.0)] {
            let p = params(nu, kappa);
            for n in [1usize, 2, 7] {
                let m = taylor_propagator(n, &p, 3.0).unwrap();
                let q = propagate_mode(n, 3.0, &p).unwrap().matrix();
                let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((m[i][j] - q[i][j]).abs() <= 1e-9 * scale.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn composite_rule_integrates_sine_coefficients() {
        let c = sine_coefficient(|x| libm::sin(2.0 * PI * x), 2, 16);
        assert!((c - 1.0).abs() < 1e-12);
        let c = sine_coefficient(|x| libm::sin(2.0 * PI * x), 3, 16);
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn grid_eigenvalues_converge() {
        let g = FdGrid::new(255).unwrap();
        let err = (g.laplacian_eigenvalue(1) + PI * PI).abs();
        assert!(err < 2.0 * g.h() * g.h() * PI.powi(4) / 12.0);
        let x = g.points();
        let u: Vec<f64> = x.iter().map(|x| libm::sin(3.0 * PI * x)).collect();
        let mut out = vec![0.0; g.m()];
        g.apply_laplacian(&u, &mut out);
        let lam = g.laplacian_eigenvalue(3);
        for j in 0..g.m() {
            assert!((out[j] - lam * u[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn thomas_inverts_shifted_laplacian() {
        let g = FdGrid::new(31).unwrap();
        let u: Vec<f64> = g.points().iter().map(|x| x * (1.0 - x * x)).collect();
        let w = g.solve_shifted(&u);
        let mut lw = vec![0.0; g.m()];
        g.apply_laplacian(&w, &mut lw);
        for j in 0..g.m() {
            assert!((-lw[j] + w[j] - u[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn fd_zero_forcing_stays_zero() {
        let p = params(1.0, 1.0);
        let traj = fd_solve(&p, FdForcing::Zero, None, &[0.0, 0.5, 1.0], 16).unwrap();
        assert!(traj.u.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn fd_rejects_small_grid() {
        assert!(FdGrid::new(8).is_err());
    }
}
