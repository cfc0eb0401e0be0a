//! Field reconstruction for interior Helmholtz problems.
//!
//! Two halves share one geometry layer:
//!
//! * [`bem`] solves box-shaped interior boundary-value problems with constant
//!   collocation elements and produces ground-truth boundary Cauchy data,
//!   sensor readings and reference fields.
//! * [`model`] is a network shaped like the boundary-integral representation:
//!   two dense stacks learn the Green's function and its normal derivative,
//!   and a frozen integration layer sums them against the boundary data.
//!   [`training`] fits it to a handful of interior sensors.
//!
//! [`experiments`] wires both into the reproducible studies exposed by the
//! `bemnet` binary.

pub mod bem;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod nn;
pub mod persistence;
pub mod training;

pub use error::{Error, Result};
