//! Spectral toolkit for the indefinite Sturm–Liouville operator
//! `A f = sgn(x) (-f'' + q f)` on the real line, with `q` real and integrable.
//!
//! The non-real spectrum of `A` consists of isolated eigenvalues placed
//! symmetrically about the real axis. This crate locates the ones in the
//! upper half-plane with two independent characteristic functions:
//!
//! - [`birman_schwinger`]: `det(I + M(λ))`, a Nyström discretization of
//!   `φ ↦ q T_λ (sgn φ)`, where `T_λ` is the explicit free resolvent from
//!   [`resolvent`];
//! - [`shooting`]: the Wronskian of the two recessive solutions matched at 0.
//!
//! Zeros are found by argument-principle subdivision in [`eigensearch`],
//! inside a rectangle derived from the a-priori bounds
//! `|λ| ≤ ‖q‖₁²`, `|Im λ| ≤ 24√3 ‖q₋‖₁²` and `|λ| ≤ (24√3 + 18) ‖q₋‖₁²`.
//! [`bounds`] checks those bounds and a set of eigenfunction inequalities
//! against every eigenpair found. [`pipeline`] ties the stages together for
//! the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails validation, and the
// triangular solves read best with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod birman_schwinger;
pub mod bounds;
pub mod config;
pub mod eigensearch;
mod error;
pub mod linalg;
pub mod ode;
pub mod pipeline;
pub mod potential;
pub mod quadrature;
pub mod resolvent;
pub mod shooting;

pub use error::{Error, Result};
pub use num_complex::Complex64;
