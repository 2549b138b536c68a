//! Four-ended solutions of the planar Allen-Cahn equation `Delta u = F'(u)`.
//!
//! Solutions even in both axes are computed on a quadrant grid by Newton's
//! method, classified by their end data `(theta, r)` through the balancing
//! integrals, continued in `theta` from the saddle solution and checked
//! spectrally.

// `!(a < b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod continuation;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod io;
pub mod potential;
pub mod solver;
pub mod spectra;

pub use error::{Error, Result};
