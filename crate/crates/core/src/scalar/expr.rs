//! Graded-commutative scalars: rational functions in the even coordinates
//! tensored with the exterior algebra on the odd coordinates.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::Parity;
use crate::{Error, Rational, Result};

/// Square-free word in the odd generators, stored as a bit mask over odd
/// slots. The canonical ordering of the word is by increasing slot.
pub type OddMono = u64;

pub const MAX_ODD: usize = 64;

/// Sign of `m1 * m2` when both words are rewritten in increasing order;
/// `None` if they share a generator.
pub(crate) fn merge_sign(m1: OddMono, m2: OddMono) -> Option<bool> {
    if m1 & m2 != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = m2;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (m1 >> (j + 1)).count_ones();
    }
    Some(swaps % 2 == 1)
}

fn mono_parity(m: OddMono) -> Parity {
    Parity::from_bit(m.count_ones() % 2 == 1)
}

#[derive(Clone, Debug, Default)]
pub struct ScalarExpr {
    terms: BTreeMap<OddMono, RatFunc>,
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.sub_ref(other).is_zero()
    }
}

impl Eq for ScalarExpr {}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::default()
    }

    pub fn one() -> Self {
        ScalarExpr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        ScalarExpr::from_ratfunc(RatFunc::constant(c))
    }

    pub fn int(n: i64) -> Self {
        ScalarExpr::constant(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ScalarExpr::constant(Rational::new(n.into(), d.into()))
    }

    pub fn from_ratfunc(r: RatFunc) -> Self {
        let mut e = ScalarExpr::zero();
        e.insert(0, r);
        e
    }

    pub(crate) fn even_var(slot: usize) -> Self {
        ScalarExpr::from_ratfunc(RatFunc::from_poly(Poly::var(slot)))
    }

    pub(crate) fn odd_var(slot: usize) -> Self {
        assert!(
            slot < MAX_ODD,
            "at most {MAX_ODD} odd coordinates are supported"
        );
        let mut e = ScalarExpr::zero();
        e.insert(1u64 << slot, RatFunc::one());
        e
    }

    fn insert(&mut self, m: OddMono, r: RatFunc) {
        if r.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(r);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&r);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (OddMono, &RatFunc)> {
        self.terms.iter().map(|(m, r)| (*m, r))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value as a rational constant, if it is one.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, r) = self.terms.iter().next().unwrap();
                if *m != 0 {
                    return None;
                }
                r.as_constant()
            }
            _ => None,
        }
    }

    /// The component free of odd generators.
    pub fn body(&self) -> RatFunc {
        self.terms.get(&0).cloned().unwrap_or_else(RatFunc::zero)
    }

    /// Parity of the expression; zero is even, mixed expressions give `None`.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| mono_parity(*m));
        let first = it.next().unwrap_or(Parity::Even);
        it.all(|p| p == first).then_some(first)
    }

    pub fn part(&self, p: Parity) -> ScalarExpr {
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| mono_parity(**m) == p)
                .map(|(m, r)| (*m, r.clone()))
                .collect(),
        }
    }

    /// Split into nonzero parity-homogeneous parts.
    pub fn homogeneous_parts(&self) -> Vec<(Parity, ScalarExpr)> {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|p| (p, self.part(p)))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }

    pub fn add_ref(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut r = self.clone();
        for (m, t) in &other.terms {
            r.insert(*m, t.clone());
        }
        r
    }

    pub fn sub_ref(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut r = self.clone();
        for (m, t) in &other.terms {
            r.insert(*m, t.neg());
        }
        r
    }

    pub fn neg_ref(&self) -> ScalarExpr {
        ScalarExpr {
            terms: self.terms.iter().map(|(m, r)| (*m, r.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> ScalarExpr {
        if k.is_zero() {
            return ScalarExpr::zero();
        }
        ScalarExpr {
            terms: self.terms.iter().map(|(m, r)| (*m, r.scale(k))).collect(),
        }
    }

    /// Graded product.
    pub fn mul_ref(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m1, r1) in &self.terms {
            for (m2, r2) in &other.terms {
                let Some(neg) = merge_sign(*m1, *m2) else {
                    continue;
                };
                let p = r1.mul(r2);
                out.insert(m1 | m2, if neg { p.neg() } else { p });
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> ScalarExpr {
        let mut r = ScalarExpr::one();
        for _ in 0..n {
            r = r.mul_ref(self);
        }
        r
    }

    /// Multiplicative inverse. Exists exactly when the body is nonzero; the
    /// nilpotent remainder is inverted by a terminating geometric series.
    pub fn inverse(&self) -> Result<ScalarExpr> {
        let body = self.body();
        let binv = body.inverse().ok_or(if self.is_zero() {
            Error::DivisionByZero
        } else {
            Error::NotInvertible("expression is nilpotent".into())
        })?;
        let binv = ScalarExpr::from_ratfunc(binv);
        let nil = self.sub_ref(&ScalarExpr::from_ratfunc(body));
        if nil.is_zero() {
            return Ok(binv);
        }
        // (b + n)^{-1} = b^{-1} * sum_k (-n b^{-1})^k
        let step = nil.mul_ref(&binv).neg_ref();
        let mut acc = ScalarExpr::one();
        let mut power = ScalarExpr::one();
        loop {
            power = power.mul_ref(&step);
            if power.is_zero() {
                break;
            }
            acc = acc.add_ref(&power);
        }
        Ok(binv.mul_ref(&acc))
    }

    pub fn div_ref(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        Ok(self.mul_ref(&other.inverse()?))
    }

    /// Derivative along the even coordinate stored in `slot`.
    pub(crate) fn diff_even(&self, slot: usize) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, r) in &self.terms {
            out.insert(*m, r.derivative(slot));
        }
        out
    }

    /// Left derivative along the odd coordinate stored in `slot`: the
    /// generator is moved to the front of each word before it is removed.
    pub(crate) fn diff_odd(&self, slot: usize) -> ScalarExpr {
        let bit = 1u64 << slot;
        let mut out = ScalarExpr::zero();
        for (m, r) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let before = (m & (bit - 1)).count_ones();
            let rest = m & !bit;
            out.insert(rest, if before % 2 == 1 { r.neg() } else { r.clone() });
        }
        out
    }

    /// Simultaneous substitution of every coordinate.
    pub(crate) fn substitute_slots(
        &self,
        even: &[ScalarExpr],
        odd: &[ScalarExpr],
    ) -> Result<ScalarExpr> {
        let mut cache: BTreeMap<(usize, u32), ScalarExpr> = BTreeMap::new();
        let mut power = |slot: usize, e: u32| -> ScalarExpr {
            cache
                .entry((slot, e))
                .or_insert_with(|| {
                    even.get(slot)
                        .cloned()
                        .unwrap_or_else(|| ScalarExpr::even_var(slot))
                        .pow(e)
                })
                .clone()
        };
        let mut eval_poly = |p: &Poly| -> ScalarExpr {
            let mut acc = ScalarExpr::zero();
            for (m, c) in p.terms() {
                let mut t = ScalarExpr::constant(c.clone());
                for (i, e) in m.exponents().iter().enumerate() {
                    if *e > 0 {
                        t = t.mul_ref(&power(i, *e));
                    }
                }
                acc = acc.add_ref(&t);
            }
            acc
        };
        let mut out = ScalarExpr::zero();
        for (m, r) in &self.terms {
            let num = eval_poly(r.numerator());
            let den = eval_poly(r.denominator());
            if den.body().is_zero() {
                return Err(if den.is_zero() {
                    Error::DivisionByZero
                } else {
                    Error::NotInvertible("denominator becomes nilpotent".into())
                });
            }
            let mut word = ScalarExpr::one();
            let mut rest = *m;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let img = odd
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| ScalarExpr::odd_var(j));
                word = word.mul_ref(&img);
            }
            out = out.add_ref(&num.mul_ref(&den.inverse()?).mul_ref(&word));
        }
        Ok(out)
    }

    /// Evaluate the body at a rational point (odd generators set to zero).
    pub fn eval_body(&self, even_values: &[Rational]) -> Option<Rational> {
        self.body().eval(even_values)
    }

    pub(crate) fn map_ratfuncs(
        &self,
        f: impl Fn(&RatFunc) -> Option<RatFunc>,
    ) -> Option<ScalarExpr> {
        let mut out = ScalarExpr::zero();
        for (m, r) in &self.terms {
            out.insert(*m, f(r)?);
        }
        Some(out)
    }
}

impl From<Rational> for ScalarExpr {
    fn from(c: Rational) -> Self {
        ScalarExpr::constant(c)
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl $tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                self.$inner(rhs)
            }
        }
        impl $tr<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                self.$inner(&rhs)
            }
        }
        impl $tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                self.$inner(rhs)
            }
        }
        impl $tr<ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self.neg_ref()
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self.neg_ref()
    }
}

impl std::iter::Sum for ScalarExpr {
    fn sum<I: Iterator<Item = ScalarExpr>>(iter: I) -> Self {
        iter.fold(ScalarExpr::zero(), |a, b| a.add_ref(&b))
    }
}
