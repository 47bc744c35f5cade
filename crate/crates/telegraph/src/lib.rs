//! Command-line driver, scenario files and artifact formats around
//! [`telegraph_core`].

#![warn(rust_2018_idioms, missing_debug_implementations)]
// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod verify;
