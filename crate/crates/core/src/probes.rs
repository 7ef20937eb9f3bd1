//! Probe families for commutator orders and identity checks.
//!
//! The identities checked by the engine are polynomial in the coefficients
//! of their density arguments and involve at most second derivatives of
//! each argument, with coefficients polynomial of degree at most two in
//! each argument's weight. A monomial family of coordinate degree up to
//! three with at least three distinct weights therefore separates every
//! coefficient that can appear.

use crate::densities::Density;
use crate::scalar::{Chart, ScalarExpr};
use crate::{q, Rational};

/// Coordinate monomials of degree at most `max_degree` (odd coordinates at
/// most once each), including the constant one.
pub fn monomials(chart: &Chart, max_degree: u32) -> Vec<ScalarExpr> {
    fn go(chart: &Chart, a: usize, left: u32, cur: ScalarExpr, out: &mut Vec<ScalarExpr>) {
        if a == chart.dim() {
            out.push(cur);
            return;
        }
        let cap = if chart.parity(a).is_odd() {
            left.min(1)
        } else {
            left
        };
        let x = chart.coordinate(a);
        let mut f = cur;
        for e in 0..=cap {
            go(chart, a + 1, left - e, f.clone(), out);
            f = &f * &x;
        }
    }
    let mut out = Vec::new();
    go(chart, 0, max_degree, ScalarExpr::one(), &mut out);
    out
}

/// Monomials times each of the given weights.
pub fn monomial_family(chart: &Chart, max_degree: u32, weights: &[Rational]) -> Vec<Density> {
    let ms = monomials(chart, max_degree);
    weights
        .iter()
        .flat_map(|w| ms.iter().map(move |m| Density::new(w.clone(), m.clone())))
        .collect()
}

/// The weights used for identity checks.
pub fn standard_weights() -> Vec<Rational> {
    vec![q(0, 1), q(1, 2), q(1, 1), q(-1, 2), q(2, 1)]
}

/// Multiplication probes for the commutator order: coordinates, their
/// quadratic monomials, `t`, `t^{-1}` and `t x`.
pub fn default_probes(chart: &Chart) -> Vec<Density> {
    let mut out: Vec<Density> = monomials(chart, 2)
        .into_iter()
        .filter(|m| m.as_constant().is_none())
        .map(Density::function)
        .collect();
    out.push(Density::t_power(q(1, 1)));
    out.push(Density::t_power(q(-1, 1)));
    out.push(Density::new(q(1, 1), chart.coordinate(0)));
    out
}
