//! Numerical potential theory for compact planar sets: equilibrium measures,
//! logarithmic capacity, Green functions, Levin strip data and monic
//! Chebyshev polynomials, plus the harness that measures Widom factors
//! `t_n(K) = ‖T_n‖_K / cap(K)^n` across degrees and set families.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod levin;
pub mod minimax;
pub mod numeric;

pub use error::{Error, Result};
