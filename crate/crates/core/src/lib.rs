//! Numerical and symbolic checks for the CR Yamabe equation on the
//! Heisenberg group `ℍⁿ`.
//!
//! - [`hgroup`]: group law, dilations, Korányi norm, sampling.
//! - [`expr`]: expression trees, simplification and the left-invariant frame.
//! - [`jets`]: order-3 jets, symbolic and by finite differences.
//! - [`jltensor`]: the tensors of `f = (1/n) log u` and pointwise checks.
//! - [`solutions`]: the bubble family, its Euclidean analogue, integrals.
//! - [`suite`]: named check suites and their JSON reports.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod expr;
pub mod hgroup;
pub mod jets;
pub mod jltensor;
pub mod mc;
pub mod solutions;
pub mod suite;
pub mod tolerances;

pub use error::{Error, Result};
