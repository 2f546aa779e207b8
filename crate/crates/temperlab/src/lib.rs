//! Numerical laboratory for asymptotic growth of matrix-coefficient ball
//! integrals on rank-one groups, together with the supporting machinery:
//! an exact growth engine for squared exponential sums/integrals over
//! dilated polytopes, p-adic oscillatory sums, and Folner-condition
//! checks for discrete groups.
//!
//! The crate is organized around four computational subsystems plus an
//! experiment orchestration layer and shared plumbing:
//!
//! * [`expsum`] — predicted growth degree and limit value for squared
//!   exponential sums over lattice points of dilated polytopes, and their
//!   continuous analogues, with brute-force oracles.
//! * [`sl2`] — the real group: Iwasawa decomposition, principal-series
//!   matrix coefficients, the spherical function, ball integrals and
//!   growth fits.
//! * [`pgl2`] — the p-adic group: fixed-precision p-adic arithmetic,
//!   the compact anisotropic torus and its character theory at finite
//!   level, exact matrix coefficients, oscillatory sums.
//! * [`folner`] — two-sided symmetric-difference ratios along ball/box
//!   sequences in discrete groups.
//! * [`experiments`] — configuration-driven experiment runners emitting
//!   CSV records and JSON verdict summaries.

pub mod config;
pub mod error;
pub mod experiments;
pub mod expsum;
pub mod fitting;
pub mod folner;
pub mod pgl2;
pub mod quad;
pub mod report;
pub mod sl2;
pub mod tolerances;

pub use error::{Error, Result};
