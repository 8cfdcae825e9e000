//! Exact computation of minus-4-hyperbolic Belyi maps — the rational
//! coverings realizing hypergeometric-to-Heun pull-back transformations —
//! via branching-pattern enumeration, a probabilistic modular scan, Hensel
//! lifting, lattice-based algebraic recognition, and exact verification.
//!
//! The core is generic over the exact scalar type (prime fields, ℚ, number
//! fields ℚ(α), and the local rings ℤ/p^κ used while lifting); concrete
//! aliases for the common instantiations live at the crate root.

pub mod algebra;
pub mod catalog;
pub mod error;
pub mod invariants;
pub mod lift;
pub mod patterns;
pub mod pullback;
pub mod schwarz;
pub mod search;

pub use error::{AResult, AlgebraError, PResult, PipelineError};

use algebra::fp::Fp;
use algebra::numfield::NfElem;
use algebra::rat::Rat;
use algebra::zpk::ZpK;

/// Polynomials over the stock coefficient domains.
pub type QPoly = algebra::poly::Polynomial<Rat>;
pub type FpPoly = algebra::poly::Polynomial<Fp>;
pub type NfPoly = algebra::poly::Polynomial<NfElem>;
pub type ZpPoly = algebra::poly::Polynomial<ZpK>;

/// Rational maps over the stock coefficient domains.
pub type QMap = algebra::ratfun::RationalMap<Rat>;
pub type FpMap = algebra::ratfun::RationalMap<Fp>;
pub type NfMap = algebra::ratfun::RationalMap<NfElem>;

/// Truncated power series over the stock coefficient domains.
pub type QSeries = algebra::series::PowerSeries<Rat>;
pub type FpSeries = algebra::series::PowerSeries<Fp>;
