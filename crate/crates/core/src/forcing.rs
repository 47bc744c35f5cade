//! Forcing operators `F: D -> H1_0` with `F(0) = 0` and a local bound
//! `|F(u)|_{H1_0} <= c(C)` on `{|u|_D <= C}`.
//!
//! Pointwise forcings `u -> f(u(x))` are evaluated pseudo-spectrally: sample
//! `u` on a Gauss-Legendre grid, apply `f`, project back with quadrature
//! inner products. Their local bound follows from
//! `sup |u| <= |u'|_{L2} / sqrt(2) = |u|_{H1_0} / sqrt(2 kappa) <= C / sqrt(2 kappa)`
//! and `|f(u)|_{H1_0} <= sup_{|s| <= rho} |f'(s)| |u|_{H1_0}`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::quadrature::{dealiased_order, QuadratureGrid};
use crate::spectral::{du_weight_sq, ModalVector, PhysicalParams};

/// Name plus numeric parameters, as written in configuration files.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub name: String,
    pub params: Vec<(String, f64)>,
}

impl Descriptor {
    pub fn new(name: &str) -> Self {
        Descriptor {
            name: name.into(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }
}

pub trait ForcingOperator: fmt::Debug + Send + Sync {
    /// Modal representation of `F(u)`, same capacity as `u`.
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector>;

    /// `c(C)` with `|F(u)|_{H1_0} <= c(C)` whenever `|u|_D <= C`.
    fn local_bound(&self, radius: f64, params: &PhysicalParams) -> f64;

    fn descriptor(&self) -> Descriptor;

    /// `true` when `F` is linear.
    fn is_linear(&self) -> bool {
        false
    }
}

impl<T: ForcingOperator + ?Sized> ForcingOperator for Box<T> {
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector> {
        (**self).evaluate(u)
    }

    fn local_bound(&self, radius: f64, params: &PhysicalParams) -> f64 {
        (**self).local_bound(radius, params)
    }

    fn descriptor(&self) -> Descriptor {
        (**self).descriptor()
    }

    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
}

/// Upper bound for `sup |u|` over the `D`-ball of radius `radius`.
pub fn sup_bound(radius: f64, params: &PhysicalParams) -> f64 {
    radius / libm::sqrt(2.0 * params.kappa())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroForcing;

impl ForcingOperator for ZeroForcing {
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector> {
        Ok(ModalVector::zeros(u.capacity()))
    }

    fn local_bound(&self, _radius: f64, _params: &PhysicalParams) -> f64 {
        0.0
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("zero")
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// `F(u) = u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityForcing;

impl ForcingOperator for IdentityForcing {
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector> {
        Ok(u.clone())
    }

    fn local_bound(&self, radius: f64, _params: &PhysicalParams) -> f64 {
        radius
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("identity")
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// `F(u) = w` where `-w'' + w = u` on `I`, `w(+-1) = 0`; diagonal in the
/// sine basis with `w_k = u_k / ((k pi)^2 + 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BvpComposition;

impl BvpComposition {
    pub fn symbol(k: usize) -> f64 {
        let kp = k as f64 * PI;
        1.0 / (kp * kp + 1.0)
    }
}

impl ForcingOperator for BvpComposition {
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector> {
        Ok(bvp_composition_forcing(u))
    }

    fn local_bound(&self, radius: f64, params: &PhysicalParams) -> f64 {
        // Ratio |F(phi_k)|_{H1_0} / |phi_k|_D is decreasing in k.
        let k = 1;
        radius * Self::symbol(k) * libm::sqrt(params.stiffness(k) / du_weight_sq(k, params))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("bvp")
    }

    fn is_linear(&self) -> bool {
        true
    }
}

pub fn bvp_composition_forcing(u: &ModalVector) -> ModalVector {
    ModalVector::from_coeffs(
        u.coeffs()
            .iter()
            .enumerate()
            .map(|(i, a)| a * BvpComposition::symbol(i + 1))
            .collect(),
    )
}

/// A smooth scalar function with `f(0) = 0`, for pointwise forcing.
#[derive(Clone, Copy)]
pub struct SmoothFn {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    /// `rho -> sup_{|s| <= rho} |f'(s)|`.
    pub derivative_sup: fn(f64) -> f64,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PointwiseSymbol {
    /// `s -> s^p`, `p >= 1`.
    Monomial(u32),
    Sinh,
    Custom(SmoothFn),
}

impl PointwiseSymbol {
    pub fn apply(&self, s: f64) -> f64 {
        match *self {
            PointwiseSymbol::Monomial(p) => libm::pow(s, p as f64),
            PointwiseSymbol::Sinh => libm::sinh(s),
            PointwiseSymbol::Custom(g) => (g.f)(s),
        }
    }

    pub fn derivative_sup(&self, rho: f64) -> f64 {
        match *self {
            PointwiseSymbol::Monomial(p) => p as f64 * libm::pow(rho, p as f64 - 1.0),
            PointwiseSymbol::Sinh => libm::cosh(rho),
            PointwiseSymbol::Custom(g) => (g.derivative_sup)(rho),
        }
    }

    /// Effective polynomial degree for the dealiasing rule.
    fn dealias_degree(&self) -> u32 {
        match *self {
            PointwiseSymbol::Monomial(p) => p,
            _ => 3,
        }
    }
}

/// `F(u)(x) = f(u(x))`.
#[derive(Debug, Clone)]
pub struct PointwiseForcing {
    symbol: PointwiseSymbol,
    grid: QuadratureGrid,
}

impl PointwiseForcing {
    /// Builds the dealiased grid for `capacity` modes.
    pub fn new(symbol: PointwiseSymbol, capacity: usize) -> Result<Self> {
        let order = dealiased_order(capacity, symbol.dealias_degree());
        let grid = QuadratureGrid::with_order(capacity, order)?;
        Self::with_grid(symbol, grid)
    }

    /// Uses a caller-supplied grid; rejected if it is coarser than the
    /// dealiasing rule requires.
    pub fn with_grid(symbol: PointwiseSymbol, grid: QuadratureGrid) -> Result<Self> {
        if let PointwiseSymbol::Monomial(0) = symbol {
            return Err(Error::Configuration("monomial power must be at least 1 (F(0) = 0)".into()));
        }
        if libm::fabs(symbol.apply(0.0)) > 1e-14 {
            return Err(Error::Configuration("pointwise symbol must vanish at 0".into()));
        }
        let needed = dealiased_order(grid.capacity(), symbol.dealias_degree());
        if grid.order() < needed {
            return Err(Error::Configuration(format!(
                "quadrature order {} below dealiasing requirement {needed} for capacity {}",
                grid.order(),
                grid.capacity()
            )));
        }
        Ok(PointwiseForcing { symbol, grid })
    }

    pub fn monomial(power: u32, capacity: usize) -> Result<Self> {
        Self::new(PointwiseSymbol::Monomial(power), capacity)
    }

    pub fn sinh(capacity: usize) -> Result<Self> {
        Self::new(PointwiseSymbol::Sinh, capacity)
    }

    pub fn symbol(&self) -> PointwiseSymbol {
        self.symbol
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }
}

impl ForcingOperator for PointwiseForcing {
    fn evaluate(&self, u: &ModalVector) -> Result<ModalVector> {
        if u.capacity() != self.grid.capacity() {
            return Err(Error::CapacityMismatch {
                left: u.capacity(),
                right: self.grid.capacity(),
            });
        }
        if u.is_zero() {
            return Ok(ModalVector::zeros(u.capacity()));
        }
        pointwise_forcing(&self.symbol, u, &self.grid)
    }

    fn local_bound(&self, radius: f64, params: &PhysicalParams) -> f64 {
        radius * self.symbol.derivative_sup(sup_bound(radius, params))
    }

    fn descriptor(&self) -> Descriptor {
        match self.symbol {
            PointwiseSymbol::Monomial(p) => Descriptor::new("monomial").with("power", p as f64),
            PointwiseSymbol::Sinh => Descriptor::new("sinh"),
            PointwiseSymbol::Custom(g) => Descriptor::new(g.name),
        }
    }

    fn is_linear(&self) -> bool {
        matches!(self.symbol, PointwiseSymbol::Monomial(1))
    }
}

/// Modal representation of `x -> f(u(x))` on `grid`, truncated to the
/// capacity of `u`.
pub fn pointwise_forcing(
    symbol: &PointwiseSymbol,
    u: &ModalVector,
    grid: &QuadratureGrid,
) -> Result<ModalVector> {
    if u.capacity() > grid.capacity() {
        return Err(Error::Configuration(format!(
            "capacity {} exceeds the dealiased grid capacity {}",
            u.capacity(),
            grid.capacity()
        )));
    }
    let values: Vec<f64> = grid
        .synthesize(u)?
        .into_iter()
        .map(|s| symbol.apply(s))
        .collect();
    grid.analyze(&values, u.capacity())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosureStatus {
    /// Inputs converge and outputs converge with bounded `H1_0` norms.
    Verified,
    /// Inputs converge but outputs do not settle.
    Failed,
    /// The input sequence does not converge, nothing to check.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub status: ClosureStatus,
    /// `|u_k - u|_{H1_0}`.
    pub input_errors: Vec<f64>,
    /// `|F(u_k) - F(u)|_{L2}`.
    pub output_errors: Vec<f64>,
    /// `|F(u_k)|_{H1_0}`.
    pub output_h10_norms: Vec<f64>,
}

/// Checks the closure property along `u_k -> limit`: `F(u_k) -> F(limit)` in
/// `L2` with `H1_0`-bounded images.
pub fn closure_property_check(
    forcing: &dyn ForcingOperator,
    sequence: &[ModalVector],
    limit: &ModalVector,
    params: &PhysicalParams,
) -> Result<ClosureReport> {
    if sequence.is_empty() {
        return Err(Error::argument("empty sequence"));
    }
    let f_limit = forcing.evaluate(limit)?;
    let mut input_errors = Vec::with_capacity(sequence.len());
    let mut output_errors = Vec::with_capacity(sequence.len());
    let mut output_h10_norms = Vec::with_capacity(sequence.len());
    for u in sequence {
        input_errors.push(u.axpy(-1.0, limit)?.h10_norm(params));
        let fu = forcing.evaluate(u)?;
        output_errors.push(fu.axpy(-1.0, &f_limit)?.l2_norm());
        output_h10_norms.push(fu.h10_norm(params));
    }
    let scale_in = input_errors.iter().cloned().fold(0.0, f64::max).max(limit.h10_norm(params));
    let tail_in = *input_errors.last().unwrap_or(&0.0);
    let converging_in = tail_in <= 1e-8 * scale_in.max(1.0) || tail_in < 0.1 * input_errors[0];
    if !converging_in {
        return Ok(ClosureReport {
            status: ClosureStatus::NotApplicable,
            input_errors,
            output_errors,
            output_h10_norms,
        });
    }
    let tail_out = *output_errors.last().unwrap_or(&0.0);
    let head_out = output_errors[0];
    let bounded = output_h10_norms.iter().all(|n| n.is_finite());
    let converging_out = tail_out <= 1e-10 * f_limit.l2_norm().max(1.0) || tail_out < 0.1 * head_out;
    let status = if bounded && converging_out {
        ClosureStatus::Verified
    } else {
        ClosureStatus::Failed
    };
    Ok(ClosureReport {
        status,
        input_errors,
        output_errors,
        output_h10_norms,
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
    fn every_builtin_vanishes_at_zero() {
        let z = ModalVector::zeros(8);
        let ops: Vec<Box<dyn ForcingOperator>> = vec![
            Box::new(ZeroForcing),
            Box::new(IdentityForcing),
            Box::new(BvpComposition),
            Box::new(PointwiseForcing::monomial(2, 8).unwrap()),
            Box::new(PointwiseForcing::monomial(3, 8).unwrap()),
            Box::new(PointwiseForcing::sinh(8).unwrap()),
        ];
        for op in &ops {
            assert!(op.evaluate(&z).unwrap().is_zero(), "{:?}", op.descriptor());
        }
    }

    #[test]
    fn bvp_on_first_mode() {
        let u = ModalVector::single_mode(4, 1, 1.0).unwrap();
        let w = bvp_composition_forcing(&u);
        assert!((w.coeff(1) - 1.0 / (PI * PI + 1.0)).abs() < 1e-16);
        assert_eq!(w.coeff(2), 0.0);
    }

    #[test]
    fn bvp_local_bound_is_attained_on_first_mode() {
        let p = PhysicalParams::new(0.5, 2.0).unwrap();
        let u = ModalVector::single_mode(6, 1, 1.0).unwrap();
        let u = u.scaled(3.0 / u.du_norm(&p));
        let fu = BvpComposition.evaluate(&u).unwrap();
        assert!((fu.h10_norm(&p) - BvpComposition.local_bound(3.0, &p)).abs() < 1e-14);
    }

    #[test]
    fn monomial_zero_is_rejected() {
        assert!(PointwiseForcing::monomial(0, 4).is_err());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = QuadratureGrid::new(8).unwrap();
        assert!(PointwiseForcing::with_grid(PointwiseSymbol::Monomial(3), g.clone()).is_ok());
        assert!(matches!(
            PointwiseForcing::with_grid(PointwiseSymbol::Monomial(9), g),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn cube_of_first_mode() {
        // sin^3 = (3 sin t - sin 3t) / 4
        let f = PointwiseForcing::monomial(3, 6).unwrap();
        let u = ModalVector::single_mode(6, 1, 1.0).unwrap();
        let fu = f.evaluate(&u).unwrap();
        assert!((fu.coeff(1) - 0.75).abs() < 1e-14);
        assert!((fu.coeff(3) + 0.25).abs() < 1e-14);
        for k in [2, 4, 5, 6] {
            assert!(fu.coeff(k).abs() < 1e-14);
        }
    }

    #[test]
    fn closure_on_constant_sequence() {
        let f = PointwiseForcing::monomial(2, 4).unwrap();
        let u = ModalVector::from_coeffs(vec![0.2, 0.1, 0.0, 0.0]);
        let r = closure_property_check(&f, &vec![u.clone(); 3], &u, &params()).unwrap();
        assert_eq!(r.status, ClosureStatus::Verified);
        assert!(r.output_errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn closure_reports_divergent_input() {
        let f = IdentityForcing;
        let limit = ModalVector::zeros(3);
        let seq: Vec<ModalVector> = (1..=5)
            .map(|k| ModalVector::single_mode(3, 1, k as f64).unwrap())
            .collect();
        let r = closure_property_check(&f, &seq, &limit, &params()).unwrap();
        assert_eq!(r.status, ClosureStatus::NotApplicable);
    }
}
