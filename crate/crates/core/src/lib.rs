//! Low-density homogeneous hyperplane estimation.
//!
//! Three estimators search for the hyperplane through the origin that cuts
//! an unknown distribution where its density is lowest: bucketing and
//! hard-margin on `[0, 1]`, and the soft-margin strip count in `R^d`. The
//! [`experiments`] module checks their consistency on synthetic densities
//! whose optimal cut is known in closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod densities;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod rng;

pub use error::{Error, Result};
