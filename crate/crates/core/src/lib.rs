//! Desk-scale model of a generic linear holomorphic foliation near a hyperbolic
//! singular point.
//!
//! Leaves through `x` are parametrized by `φ_x(ζ) = (x_j e^{λ_j ζ})` on a convex
//! domain `Π_x`; the modules below give the hyperbolic geometry of these
//! domains, a Bowen-type distance between leaves, a logarithmic cell lattice,
//! leaf-to-leaf projections and disc-covering combinatorics.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_range_contains, clippy::too_many_arguments)]

pub mod bowen;
pub mod cells;
pub mod cmath;
pub mod covering;
pub mod hyperbolic;
pub mod linear_model;
pub mod projections;

pub use num_complex::Complex64;
