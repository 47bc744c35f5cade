//! Spectral solver for the one-dimensional constrained nonlinear telegraph
//! equation
//!
//! ```text
//! u_tt = -nu u_t + kappa u_xx + F(u),   x in I = (-1, 1),
//! u(+-1, t) = 0,   u(x, 0) = u_t(x, 0) = 0,   inf_I G(u) > 0,
//! ```
//!
//! built from the exact modal semigroup of the linear part, a Duhamel
//! convolution in time, Fourier-projected fixed-point problems and a
//! terminal time chosen so that the iterates stay in a fixed ball.
//!
//! Everything here is `no_std` + `alloc`; IO, configuration files and the
//! command-line driver live in the `telegraph` crate.
//!
//! # Basis
//!
//! Functions are represented by coefficients in the family
//! `phi_k(x) = sin(k pi x)`, which is orthonormal in `L2(-1, 1)`. This family
//! spans the odd-symmetric part of the Dirichlet space only; all operators
//! in this crate act inside that span.

#![no_std]
#![warn(rust_2018_idioms, missing_debug_implementations)]
// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraint;
pub mod duhamel;
pub mod error;
pub mod forcing;
pub mod oracle;
pub mod quadrature;
pub mod semigroup;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{ModalVector, PhysicalParams, StateVector};
