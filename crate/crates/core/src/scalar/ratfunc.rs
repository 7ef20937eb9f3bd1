//! Rational functions in the even coordinates.
//!
//! Stored as numerator/denominator pairs. The denominator is kept monic and
//! cheap cancellations are applied (constant denominators, common monomial
//! factors, exact quotients, univariate gcd), but the pair is not guaranteed
//! to be fully reduced; equality is always decided by cross-multiplication.

use num_traits::{One, Zero};

use super::poly::{Mono, Poly};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFunc {}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    /// `num / den`; `None` when `den` is the zero polynomial.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(RatFunc { num, den }.normalized())
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = self.den.as_constant() {
            return RatFunc {
                num: self.num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let lc = self.den.leading_coefficient();
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        let g = self
            .num
            .monomial_content()
            .gcd(&self.den.monomial_content());
        if !g.is_one() {
            self.num = self.num.div_mono(&g);
            self.den = self.den.div_mono(&g);
        }
        if let Some(q) = self.num.exact_div(&self.den) {
            return RatFunc {
                num: q,
                den: Poly::one(),
            };
        }
        if let Some(q) = self.den.exact_div(&self.num) {
            // num divides den: num/den = 1/q
            let lc = q.leading_coefficient();
            return RatFunc {
                num: Poly::constant(lc.recip()),
                den: q.monic(),
            };
        }
        if let Some(g) = self.num.univariate_gcd(&self.den) {
            if !g.is_one() {
                self.num = self.num.exact_div(&g).expect("gcd divides numerator");
                self.den = self.den.exact_div(&g).expect("gcd divides denominator");
                let lc = self.den.leading_coefficient();
                if !lc.is_one() {
                    let inv = lc.recip();
                    self.num = self.num.scale(&inv);
                    self.den = self.den.scale(&inv);
                }
            }
        }
        self
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return RatFunc {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            }
            .normalized();
        }
        if let Some(k) = self.den.exact_div(&other.den) {
            return RatFunc {
                num: self.num.add(&other.num.mul(&k)),
                den: self.den.clone(),
            }
            .normalized();
        }
        if let Some(k) = other.den.exact_div(&self.den) {
            return RatFunc {
                num: self.num.mul(&k).add(&other.num),
                den: other.den.clone(),
            }
            .normalized();
        }
        RatFunc {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .normalized()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> RatFunc {
        if k.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&other.num));
        }
        // Cross-cancel before multiplying out.
        let (mut a, mut b) = (self.num.clone(), self.den.clone());
        let (mut c, mut d) = (other.num.clone(), other.den.clone());
        if !d.is_one() {
            if let Some(q) = a.exact_div(&d) {
                a = q;
                d = Poly::one();
            }
        }
        if !b.is_one() {
            if let Some(q) = c.exact_div(&b) {
                c = q;
                b = Poly::one();
            }
        }
        RatFunc {
            num: a.mul(&c),
            den: b.mul(&d),
        }
        .normalized()
    }

    pub fn inverse(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        Some(
            RatFunc {
                num: self.den.clone(),
                den: self.num.clone(),
            }
            .normalized(),
        )
    }

    pub fn derivative(&self, slot: usize) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from_poly(self.num.derivative(slot));
        }
        if !self.den.involves(slot) {
            return RatFunc {
                num: self.num.derivative(slot),
                den: self.den.clone(),
            }
            .normalized();
        }
        let n = self
            .num
            .derivative(slot)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(slot)));
        RatFunc {
            num: n,
            den: self.den.mul(&self.den),
        }
        .normalized()
    }

    pub fn involves(&self, slot: usize) -> bool {
        self.num.involves(slot) || self.den.involves(slot)
    }

    /// Antiderivative in one slot when it is again rational and the
    /// denominator has the form `x^k * e` with `e` free of the slot.
    /// Returns `None` when a logarithm would be needed or the shape is
    /// unsupported.
    pub fn integrate(&self, slot: usize) -> Option<RatFunc> {
        if self.is_zero() {
            return Some(RatFunc::zero());
        }
        // Split the denominator into a pure power of the slot times the rest.
        let content = self.den.monomial_content();
        let k = content.exponent(slot);
        let pure = {
            let mut v = vec![0; slot + 1];
            v[slot] = k;
            Mono::from_exponents(v)
        };
        let rest = self.den.div_mono(&pure);
        if rest.involves(slot) {
            return None;
        }
        let mut out = Poly::zero();
        // Terms of the numerator divided by x^k, integrated as a Laurent polynomial.
        let mut negative: Vec<(Mono, Rational, i64)> = Vec::new();
        for (m, c) in self.num.terms() {
            let e = m.exponent(slot) as i64 - k as i64;
            let mut v = m.exponents().to_vec();
            if v.len() <= slot {
                v.resize(slot + 1, 0);
            }
            v[slot] = 0;
            let base = Mono::from_exponents(v);
            if e == -1 {
                return None;
            }
            negative.push((base, c.clone(), e));
        }
        // Common denominator x^{d} for negative powers after integration.
        let min_exp = negative
            .iter()
            .map(|(_, _, e)| e + 1)
            .min()
            .unwrap_or(0)
            .min(0);
        let shift = (-min_exp) as u32;
        for (base, c, e) in negative {
            let new_e = e + 1;
            let coeff = c / Rational::from_integer(new_e.into());
            let mut v = base.exponents().to_vec();
            if v.len() <= slot {
                v.resize(slot + 1, 0);
            }
            v[slot] = (new_e + shift as i64) as u32;
            out = out.add(&Poly::monomial(Mono::from_exponents(v), coeff));
        }
        let mut dv = vec![0; slot + 1];
        dv[slot] = shift;
        let den = rest.mul(&Poly::monomial(Mono::from_exponents(dv), Rational::one()));
        RatFunc::new(out, den)
    }

    /// Evaluate at rational point; `None` if the denominator vanishes there.
    pub fn eval(&self, values: &[Rational]) -> Option<Rational> {
        let d = self.den.eval(values);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(values) / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn cancels_known_factor() {
        let x = Poly::var(0);
        let r = RatFunc::new(x.mul(&x).sub(&Poly::one()), x.sub(&Poly::one())).unwrap();
        assert!(r.is_polynomial());
        assert_eq!(r, RatFunc::from_poly(x.add(&Poly::one())));
    }

    #[test]
    fn reciprocal_times_self_is_one() {
        let x = RatFunc::from_poly(Poly::var(0));
        assert_eq!(x.inverse().unwrap().mul(&x), RatFunc::one());
    }

    #[test]
    fn integrate_laurent() {
        // d/dx (-1/x) = 1/x^2
        let x = Poly::var(0);
        let f = RatFunc::new(Poly::one(), x.mul(&x)).unwrap();
        let g = f.integrate(0).unwrap();
        assert_eq!(g.derivative(0), f);
        // 1/x has no rational antiderivative
        let h = RatFunc::new(Poly::one(), x.clone()).unwrap();
        assert!(h.integrate(0).is_none());
        let p = RatFunc::from_poly(x.pow(2).scale(&q(3)));
        assert_eq!(p.integrate(0).unwrap(), RatFunc::from_poly(x.pow(3)));
    }
}
