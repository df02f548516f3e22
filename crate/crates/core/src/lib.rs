//! A finite-dimensional laboratory for off-diagonal perturbations of
//! self-adjoint operators whose spectrum has an inner component inside a
//! finite gap of the outer one.
//!
//! The pipeline is: build an instance ([`disposition`]), split the spectrum
//! of the perturbed operator and extract the angular operator
//! ([`riccati`]), then compare the measured subspace rotation with the
//! closed-form bounds ([`bounds`]). [`harness`] drives campaigns, sweeps
//! and sharpness searches on top of that.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod disposition;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod json;
pub mod riccati;
pub mod sampling;

pub use error::{DispositionError, DomainError, Error, Result};
