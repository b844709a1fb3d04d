//! Numerical toolkit for the generalized Lagrangian mean curvature flow.
//!
//! The crate is organised along the mathematical dependency chain:
//!
//! * [`lattice`]: flat-torus lattices of weighted Clifford tori and the
//!   exact first eigenvalue of their Laplacian.
//! * [`ambient`]: weighted Kähler backgrounds `(M, ω, J, g, f, C)`.
//! * [`immersion`]: discrete Lagrangian curves, torus orbits and the
//!   weighted variational calculus on them.
//! * [`spectral`]: the weighted Laplacian `Δ_f` and Hamiltonian f-stability.
//! * [`flow`]: the flow `∂F/∂t = K` with its diagnostics.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
mod error;
pub mod flow;
pub mod immersion;
pub mod lattice;
pub mod numeric;
pub mod spectral;

pub use error::{Error, Result};
