//! Exact symbolic Lie and conditional symmetry analysis on jet spaces.
//!
//! The crate provides, in layers:
//!
//! - [`expr`] — a small exact computer-algebra kernel: canonical sums of
//!   monomials in jet coordinates, parameters, exponential and rational-power
//!   atoms over Gaussian-rational coefficients. Equality of canonical forms
//!   decides "identically zero".
//! - [`prolong`] — vector fields on `(x, u)`-space and their prolongations to
//!   jet space, applied as derivations.
//! - [`rewrite`] — differential constraints turned into solved-form rewrite
//!   rules closed under total derivatives; reduction to normal form modulo a
//!   constraint system.
//! - [`invariance`] — decision procedures for absolute, relative, and
//!   conditional differential invariance.
//! - [`catalog`] — the executable encyclopedia: Poincaré and Galilei algebras,
//!   dilation and projective operators, trace/contraction constructors and the
//!   invariant bases they generate.
//! - [`reduction`] — the exponential-phase ansatz, the substitution that maps
//!   wave-side jet expressions to reduced-side ones, and the dictionary of
//!   identities between the two.
//! - [`numeric`] — an independent floating-point oracle: seeded random jet
//!   points, constraint-satisfying points generated from the ansatz, and
//!   functional-independence certification by Jacobian rank.
//! - [`parse`] — a textual syntax for expressions with a canonical printer.
//! - [`report`] — named verification suites with deterministic, serializable
//!   reports; this is what the `jetlie` binary drives.

pub mod catalog;
pub mod coeff;
pub mod expr;
pub mod invariance;
pub mod numeric;
pub mod parse;
pub mod prolong;
pub mod reduction;
pub mod report;
pub mod rewrite;

pub use coeff::GaussRat;
pub use expr::{Atom, BaseVar, Expr, ExprError, FunctionId, JetVar, MultiIndex, Param};
