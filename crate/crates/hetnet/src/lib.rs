//! Stability analysis for simple heteroclinic networks in `R^4`.
//!
//! Two network types are supported: a pair of three-node cycles sharing one
//! connection (the `B3B3` network, nodes `xi_1..xi_4`) and a pair of two-node
//! cycles sharing one connection (the `B2B2` network, nodes `xi_a`, `xi_b`).
//! For each network the crate computes
//!
//! - local stability indices of every connecting trajectory with respect to
//!   each cycle (*c-indices*, via the closed-form case tables),
//! - local stability indices with respect to the whole network (*n-indices*,
//!   via cusp/wedge measure asymptotics and escape-set iteration),
//! - predominant-asymptotic-stability flags for each cycle and the network,
//!
//! and verifies all of it against an independent Monte-Carlo basin estimator
//! built on the exact Poincaré return maps ([`simkit`]).
//!
//! Indices take values in the extended reals ([`extreal::ExtReal`]); `+inf`
//! means almost every nearby point is attracted, `-inf` almost none.

pub mod b2b2;
pub mod b3b3;
pub mod error;
pub mod extreal;
pub mod index_kernel;
pub mod network;
pub mod report;
pub mod simkit;
pub mod wedge;

pub use error::Error;
pub use extreal::ExtReal;

/// Relative tolerance below which a dispatch quantity counts as sitting on a
/// case boundary. Boundary inputs are rejected rather than resolved.
pub const TOL_GENERIC: f64 = 1e-9;

/// Default margin applied to all return-map domain inequalities, standing in
/// for the suppressed `(1 - eps)` factors of the global maps. Indices are
/// margin-invariant; the value only sets how much measure the escape bands
/// carry at finite sampling resolution.
pub const DOMAIN_MARGIN: f64 = 0.9;

/// Returns true when `value` is within [`TOL_GENERIC`] (relative to `scale`,
/// floored at 1) of zero, i.e. too close to a case boundary to trust.
pub(crate) fn is_degenerate(value: f64, scale: f64) -> bool {
    value.abs() <= TOL_GENERIC * scale.abs().max(1.0)
}
