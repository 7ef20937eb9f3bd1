//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are addressed by slot index. A monomial is stored as its
//! exponent vector with trailing zeros trimmed, so polynomials built over
//! charts of different sizes compare consistently. The `BTreeMap` ordering
//! on exponent vectors is the lexicographic monomial order; the leading term
//! is the last entry.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::Rational;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(Vec<u32>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(slot: usize) -> Self {
        let mut v = vec![0; slot + 1];
        v[slot] = 1;
        Mono(v)
    }

    pub fn from_exponents(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Mono(v)
    }

    pub fn exponent(&self, slot: usize) -> u32 {
        self.0.get(slot).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let n = self.0.len().max(other.0.len());
        let v = (0..n)
            .map(|i| self.exponent(i) + other.exponent(i))
            .collect();
        Mono(v)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut v = self.0.clone();
        for (i, e) in other.0.iter().enumerate() {
            if v[i] < *e {
                return None;
            }
            v[i] -= e;
        }
        Some(Mono::from_exponents(v))
    }

    pub fn gcd(&self, other: &Mono) -> Mono {
        let n = self.0.len().min(other.0.len());
        Mono::from_exponents((0..n).map(|i| self.0[i].min(other.0[i])).collect())
    }

    /// Highest slot with a nonzero exponent.
    pub fn max_slot(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn var(slot: usize) -> Self {
        Poly::monomial(Mono::var(slot), Rational::one())
    }

    pub fn monomial(m: Mono, c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m1, c1)| (m1.mul(m), c1 * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self, slot: usize) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(slot);
            if e == 0 {
                continue;
            }
            let mut v = m.exponents().to_vec();
            v[slot] -= 1;
            r.add_term(
                Mono::from_exponents(v),
                c * Rational::from_integer(e.into()),
            );
        }
        r
    }

    /// Whether the polynomial involves the given slot.
    pub fn involves(&self, slot: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(slot) > 0)
    }

    /// Slots appearing with nonzero exponent.
    pub fn slots(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for m in self.terms.keys() {
            for (i, e) in m.exponents().iter().enumerate() {
                if *e > 0 && !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Greatest common monomial factor of all terms.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    /// Divide every monomial by `m`; caller guarantees divisibility.
    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.div(m).expect("monomial divides"), c.clone()))
                .collect(),
        }
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Scale so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading_coefficient().recip())
    }

    /// Exact quotient `self / d` if `d` divides `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(&dm)?;
            let c = rc / &dc;
            r = r.sub(&d.mul_mono(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Division with remainder in a single variable; both polynomials must
    /// involve no other slot.
    fn univariate_rem(&self, d: &Poly, slot: usize) -> Poly {
        let mut r = self.clone();
        let (dm, dc) = d.leading().expect("nonzero divisor");
        let (dm, dc) = (dm.clone(), dc.clone());
        let dd = dm.exponent(slot);
        while let Some((rm, rc)) = r.leading() {
            let rd = rm.exponent(slot);
            if rd < dd {
                break;
            }
            let m = Mono::from_exponents({
                let mut v = vec![0; slot + 1];
                v[slot] = rd - dd;
                v
            });
            let c = rc / &dc;
            r = r.sub(&d.mul_mono(&m, &c));
        }
        r
    }

    /// Monic gcd when both polynomials live in the same single slot.
    pub fn univariate_gcd(&self, other: &Poly) -> Option<Poly> {
        let mut slots = self.slots();
        for s in other.slots() {
            if !slots.contains(&s) {
                slots.push(s);
            }
        }
        if slots.len() != 1 {
            return None;
        }
        let slot = slots[0];
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.univariate_rem(&b, slot);
            a = b;
            b = r;
        }
        Some(a.monic())
    }

    /// Evaluate at rational values for every slot (missing slots are zero).
    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    let v = values.get(i).cloned().unwrap_or_else(Rational::zero);
                    t *= num_traits::pow(v, *e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn has_negative_leading(&self) -> bool {
        self.leading().is_some_and(|(_, c)| c.is_negative())
    }
}
