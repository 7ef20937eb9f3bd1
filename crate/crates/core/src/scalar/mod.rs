//! Exact graded-commutative scalars and the charts they live on.

mod chart;
mod expr;
mod matrix;
mod parse;
pub mod poly;
pub mod ratfunc;

use std::fmt;
use std::ops::Add;

pub use chart::Chart;
pub(crate) use expr::merge_sign;
pub use expr::{OddMono, ScalarExpr, MAX_ODD};
pub use matrix::{berezinian, determinant, left_inverse, mat_mul, Matrix};

use crate::Rational;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn is_even(self) -> bool {
        self == Parity::Even
    }

    pub fn bit(self) -> u32 {
        self as u32
    }

    /// Whether the Koszul sign (-1)^{ab} is negative.
    pub fn koszul(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }

    pub fn parse(s: &str) -> Option<Parity> {
        match s {
            "even" | "0" => Some(Parity::Even),
            "odd" | "1" => Some(Parity::Odd),
            _ => None,
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.is_odd() != rhs.is_odd())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// `-1` if `neg`, else `1`.
pub fn sign(neg: bool) -> Rational {
    if neg {
        -Rational::from_integer(1.into())
    } else {
        Rational::from_integer(1.into())
    }
}

/// Apply a sign to an expression.
pub fn signed(neg: bool, e: ScalarExpr) -> ScalarExpr {
    if neg {
        -e
    } else {
        e
    }
}
