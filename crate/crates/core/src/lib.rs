//! Exact symbolic algebra of densities, second-order operators and their
//! brackets on supermanifolds.
//!
//! Everything is computed in a single coordinate chart with exact rational
//! coefficients. The layers are:
//!
//! * [`scalar`]: graded-commutative rational expressions and charts
//! * [`phasespace`]: functions on the extended cotangent bundle and the canonical bracket
//! * [`densities`]: the algebra of densities, derivations and divergence
//! * [`operators`]: normal-ordered differential operators on densities
//! * [`brackets`]: long brackets, canonical pencils and the Jacobi hierarchy
//! * [`geometry`]: coordinate changes, volume forms, recovery and the BV equation

pub mod brackets;
pub mod densities;
mod error;
pub mod geometry;
pub mod operators;
pub mod phasespace;
pub mod probes;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Chart, Parity, ScalarExpr};

pub type Rational = num_rational::BigRational;

/// `n/d` as an exact rational.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
