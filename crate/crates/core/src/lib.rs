//! Penalty-method solver for degenerate and singular semilinear elliptic
//! boundary value problems
//!
//! ```text
//! -div(w ∇u) + b f(u) = h   in Ω,      u = g   on ∂Ω,
//! ```
//!
//! sandwiched between a subsolution and a supersolution, together with the
//! nested-domain construction of boundary blow-up ("large") solutions and the
//! explicit blow-up profiles of the radial problem
//!
//! ```text
//! ψ'' + ((N-1)/r - α/(R-r)) ψ' = a(r) (R-r)^(γ-α) ψ^p,   ψ'(0) = 0,   ψ(R-) = +∞.
//! ```
//!
//! Everything is reduced to one radial coordinate `r`. The modules are layered
//! bottom-up:
//!
//! - [`weights`]: boundary-distance weights `w = τ(d)` and the local
//!   integrability (B₂) surrogate check.
//! - [`grid`]: boundary-graded radial meshes and the nested subdomains `D_n`.
//! - [`assembly`]: conservative finite-volume discretization of the weighted
//!   operator, the truncated nonlinearity and the penalty term.
//! - [`penalty_solver`]: damped Newton for the penalized problem plus the
//!   sandwich certificate.
//! - [`subsuper`]: the explicit blow-up sub/supersolutions and their
//!   inequality checks.
//! - [`exhaustion`]: large solutions as limits of solves on `D_n`.
//! - [`asymptotics`]: blow-up rate fits and ε-envelope checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod asymptotics;
mod error;
pub mod exhaustion;
pub mod grid;
pub mod penalty_solver;
pub mod subsuper;
pub mod tridiag;
pub mod weights;

pub use error::{Error, Result};

use std::sync::Arc;

/// Shared scalar coefficient `r ↦ value`.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wraps a closure as a [`ScalarFn`].
pub fn scalar_fn<F>(f: F) -> ScalarFn
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Constant coefficient.
pub fn constant_fn(value: f64) -> ScalarFn {
    Arc::new(move |_| value)
}
