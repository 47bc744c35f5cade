//! Constraint operators `G: D -> C(closure of I)` and the certified infimum
//! used to decide admissibility (`inf_I G(u) > 0`).

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::forcing::Descriptor;
use crate::spectral::{sine_series, ModalVector, PhysicalParams};

/// Default number of sampling intervals on `[-1, 1]`.
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintValue {
    /// Minimum of `G(u)` over the sample points.
    pub inf_value: f64,
    /// Rigorous lower bound for `inf_I G(u)`.
    pub certified_lower_bound: f64,
    /// Sample point attaining `inf_value`.
    pub location: f64,
}

pub trait ConstraintOperator: fmt::Debug + Send + Sync {
    /// Sampled infimum of `G(u)` over `[-1, 1]` with `samples` uniform
    /// intervals, plus a certified lower bound.
    fn evaluate_inf(&self, u: &ModalVector, samples: usize) -> ConstraintValue;

    fn descriptor(&self) -> Descriptor;
}

/// `G(u) = offset + gain * u`; `offset = gain = 1` is the usual `1 + u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineConstraint {
    offset: f64,
    gain: f64,
}

impl AffineConstraint {
    pub fn new(offset: f64, gain: f64) -> Result<Self> {
        if !(offset > 0.0) || !offset.is_finite() {
            return Err(Error::InvalidParameter {
                name: "offset",
                value: offset,
                reason: "inf G(0) = offset must be positive",
            });
        }
        if !gain.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gain",
                value: gain,
                reason: "must be finite",
            });
        }
        Ok(AffineConstraint { offset, gain })
    }

    /// `G(u) = 1 + u`.
    pub fn one_plus() -> Self {
        AffineConstraint {
            offset: 1.0,
            gain: 1.0,
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

impl ConstraintOperator for AffineConstraint {
    fn evaluate_inf(&self, u: &ModalVector, samples: usize) -> ConstraintValue {
        let samples = samples.max(1);
        let active = u.active();
        let h = 2.0 / samples as f64;
        let mut inf_value = f64::INFINITY;
        let mut location = -1.0;
        for i in 0..=samples {
            let x = -1.0 + i as f64 * h;
            let g = self.offset + self.gain * sine_series(active, x);
            if g < inf_value {
                inf_value = g;
                location = x;
            }
        }
        // Every x lies within h of a sample; |d/dx G(u)| <= |gain| sum |a_k| k pi.
        let lipschitz = libm::fabs(self.gain) * u.derivative_sup_bound();
        ConstraintValue {
            inf_value,
            certified_lower_bound: inf_value - h * lipschitz,
            location,
        }
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::new("affine")
            .with("offset", self.offset)
            .with("gain", self.gain)
    }
}

/// `(inf_value, certified_lower_bound)` of `G(u)`.
pub fn constraint_inf(
    g: &dyn ConstraintOperator,
    u: &ModalVector,
    samples: usize,
) -> (f64, f64) {
    let v = g.evaluate_inf(u, samples);
    (v.inf_value, v.certified_lower_bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallValidation {
    /// Smallest certified lower bound over the tested directions.
    pub worst_certified: f64,
    pub worst_direction: ModalVector,
    pub directions_tested: usize,
}

/// Heuristic check that `inf_I G(u) >= alpha` on the sphere `|u|_D = radius`:
/// every single mode `+-phi_k` scaled to the sphere plus the supplied
/// directions (normalised, both signs). Not a proof.
pub fn validate_ball_level(
    g: &dyn ConstraintOperator,
    radius: f64,
    alpha: f64,
    params: &PhysicalParams,
    capacity: usize,
    directions: &[ModalVector],
    samples: usize,
) -> Result<BallValidation> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            reason: "must be positive",
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "constraint level must be positive",
        });
    }
    let mut candidates: Vec<ModalVector> = (1..=capacity)
        .map(|k| ModalVector::single_mode(capacity, k, 1.0).expect("k <= capacity"))
        .collect();
    for d in directions {
        if d.capacity() != capacity {
            return Err(Error::CapacityMismatch {
                left: d.capacity(),
                right: capacity,
            });
        }
        if !d.is_zero() {
            candidates.push(d.clone());
        }
    }
    let zero = g.evaluate_inf(&ModalVector::zeros(capacity), samples);
    let mut worst_certified = zero.certified_lower_bound;
    let mut worst_direction = ModalVector::zeros(capacity);
    let mut tested = 0;
    for d in &candidates {
        let unit = d.scaled(radius / d.du_norm(params));
        for sign in [1.0, -1.0] {
            let u = unit.scaled(sign);
            let v = g.evaluate_inf(&u, samples);
            tested += 1;
            if v.certified_lower_bound < worst_certified {
                worst_certified = v.certified_lower_bound;
                worst_direction = u;
            }
        }
    }
    if worst_certified < alpha {
        return Err(Error::Configuration(format!(
            "inf G >= alpha = {alpha} fails on the D-ball of radius {radius}: certified bound {worst_certified}"
        )));
    }
    Ok(BallValidation {
        worst_certified,
        worst_direction,
        directions_tested: tested,
    })
}
