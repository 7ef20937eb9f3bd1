//! Coordinate charts.
//!
//! Expressions are always stored in the variables of a base chart. A chart
//! obtained by a coordinate change keeps the same base variables and carries
//! a frame: the matrix of left derivatives of the old coordinates along the
//! new ones, so that new partial derivatives are computed by the chain rule
//! without inverting the change.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::expr::ScalarExpr;
use super::matrix::{left_inverse, Matrix};
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::Parity;
use crate::{Error, Rational, Result};

#[derive(Debug, PartialEq, Eq)]
struct Base {
    names: Vec<String>,
    parities: Vec<Parity>,
    /// Position among the even (resp. odd) variables.
    slots: Vec<usize>,
    n_even: usize,
    n_odd: usize,
}

#[derive(Debug)]
struct Inner {
    base: Arc<Base>,
    names: Vec<String>,
    parities: Vec<Parity>,
    coords: Vec<ScalarExpr>,
    /// `frame[a][b]` is the left derivative of base coordinate `b` along
    /// chart coordinate `a`.
    frame: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct Chart {
    inner: Arc<Inner>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.base == other.inner.base
                && self.inner.names == other.inner.names
                && self.inner.parities == other.inner.parities
                && self.inner.coords == other.inner.coords)
    }
}

impl Eq for Chart {}

fn check_name(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidChart(format!(
            "`{name}` is not a valid coordinate name"
        )))
    }
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[(S, Parity)]) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::InvalidChart(
                "a chart needs at least one coordinate".into(),
            ));
        }
        let mut names = Vec::new();
        let mut parities = Vec::new();
        let mut slots = Vec::new();
        let (mut n_even, mut n_odd) = (0, 0);
        for (name, p) in coords {
            let name = name.as_ref();
            check_name(name)?;
            if names.iter().any(|n: &String| n == name) {
                return Err(Error::InvalidChart(format!(
                    "duplicate coordinate `{name}`"
                )));
            }
            names.push(name.to_string());
            parities.push(*p);
            match p {
                Parity::Even => {
                    slots.push(n_even);
                    n_even += 1;
                }
                Parity::Odd => {
                    slots.push(n_odd);
                    n_odd += 1;
                }
            }
        }
        if n_odd > super::MAX_ODD {
            return Err(Error::InvalidChart(format!(
                "at most {} odd coordinates",
                super::MAX_ODD
            )));
        }
        let base = Arc::new(Base {
            names: names.clone(),
            parities: parities.clone(),
            slots,
            n_even,
            n_odd,
        });
        let coords = (0..names.len())
            .map(|a| Chart::base_var(&base, a))
            .collect();
        Ok(Chart {
            inner: Arc::new(Inner {
                base,
                names,
                parities,
                coords,
                frame: None,
            }),
        })
    }

    /// Purely even chart.
    pub fn even(names: &[&str]) -> Result<Chart> {
        Chart::new(&names.iter().map(|n| (*n, Parity::Even)).collect::<Vec<_>>())
    }

    fn base_var(base: &Base, b: usize) -> ScalarExpr {
        match base.parities[b] {
            Parity::Even => ScalarExpr::even_var(base.slots[b]),
            Parity::Odd => ScalarExpr::odd_var(base.slots[b]),
        }
    }

    /// New chart with coordinates given as expressions in the base variables
    /// of `self`. Fails unless the Jacobian is invertible.
    pub fn reparametrize<S: AsRef<str>>(
        &self,
        names: &[S],
        coords: Vec<ScalarExpr>,
    ) -> Result<Chart> {
        let base = &self.inner.base;
        let n = base.names.len();
        if names.len() != n || coords.len() != n {
            return Err(Error::InvalidChart(format!(
                "a change of coordinates needs {n} components"
            )));
        }
        let mut parities = Vec::with_capacity(n);
        let mut seen: Vec<String> = Vec::new();
        for (name, c) in names.iter().zip(&coords) {
            let name = name.as_ref();
            check_name(name)?;
            if seen.iter().any(|s| s == name) {
                return Err(Error::InvalidChart(format!(
                    "duplicate coordinate `{name}`"
                )));
            }
            seen.push(name.to_string());
            let p = c.parity().ok_or_else(|| {
                Error::ParityMismatch(format!("coordinate `{name}` is not homogeneous"))
            })?;
            parities.push(p);
        }
        let evens = parities.iter().filter(|p| p.is_even()).count();
        if evens != base.n_even {
            return Err(Error::ParityMismatch(
                "a change of coordinates must preserve the dimension".into(),
            ));
        }
        // jac[b][a] = left derivative of new coordinate a along base coordinate b
        let jac: Matrix = (0..n)
            .map(|b| coords.iter().map(|c| self.base_partial(b, c)).collect())
            .collect();
        let frame = left_inverse(&jac)
            .map_err(|_| Error::NotInvertible("the Jacobian of the change is degenerate".into()))?;
        Ok(Chart {
            inner: Arc::new(Inner {
                base: base.clone(),
                names: seen,
                parities,
                coords,
                frame: Some(frame),
            }),
        })
    }

    /// The chart of base variables this chart is expressed in.
    pub fn base_chart(&self) -> Chart {
        let b = &self.inner.base;
        let coords = (0..b.names.len()).map(|a| Chart::base_var(b, a)).collect();
        Chart {
            inner: Arc::new(Inner {
                base: b.clone(),
                names: b.names.clone(),
                parities: b.parities.clone(),
                coords,
                frame: None,
            }),
        }
    }

    pub fn is_base(&self) -> bool {
        self.inner.frame.is_none()
    }

    pub fn same_base(&self, other: &Chart) -> bool {
        Arc::ptr_eq(&self.inner.base, &other.inner.base) || self.inner.base == other.inner.base
    }

    pub fn dim(&self) -> usize {
        self.inner.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.inner.names[a]
    }

    pub fn parity(&self, a: usize) -> Parity {
        self.inner.parities[a]
    }

    pub fn parities(&self) -> &[Parity] {
        &self.inner.parities
    }

    pub fn base_names(&self) -> &[String] {
        &self.inner.base.names
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.inner
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    /// Coordinate function `a` as an expression in the base variables.
    pub fn coordinate(&self, a: usize) -> ScalarExpr {
        self.inner.coords[a].clone()
    }

    pub fn coordinates(&self) -> &[ScalarExpr] {
        &self.inner.coords
    }

    pub fn frame(&self) -> Option<&Matrix> {
        self.inner.frame.as_ref()
    }

    pub(crate) fn base_partial(&self, b: usize, f: &ScalarExpr) -> ScalarExpr {
        let base = &self.inner.base;
        match base.parities[b] {
            Parity::Even => f.diff_even(base.slots[b]),
            Parity::Odd => f.diff_odd(base.slots[b]),
        }
    }

    /// Left partial derivative along chart coordinate `a`.
    pub fn partial(&self, a: usize, f: &ScalarExpr) -> ScalarExpr {
        match &self.inner.frame {
            None => self.base_partial(a, f),
            Some(frame) => frame[a]
                .iter()
                .enumerate()
                .filter(|(_, n)| !n.is_zero())
                .map(|(b, n)| n * &self.base_partial(b, f))
                .sum(),
        }
    }

    /// An antiderivative along base coordinate `a`, when one exists in the
    /// coefficient ring. Along an odd coordinate `f` must not involve it.
    pub fn antiderivative(&self, a: usize, f: &ScalarExpr) -> Option<ScalarExpr> {
        if !self.is_base() {
            return None;
        }
        let base = &self.inner.base;
        let slot = base.slots[a];
        match base.parities[a] {
            Parity::Even => f.map_ratfuncs(|r| r.integrate(slot)),
            Parity::Odd => {
                if !f.diff_odd(slot).is_zero() {
                    return None;
                }
                Some(&ScalarExpr::odd_var(slot) * f)
            }
        }
    }

    pub fn differentiate(&self, f: &ScalarExpr, name: &str) -> Result<ScalarExpr> {
        self.check(f)?;
        Ok(self.partial(self.index(name)?, f))
    }

    /// Reject expressions that mention variables outside this chart.
    pub fn check(&self, f: &ScalarExpr) -> Result<()> {
        let base = &self.inner.base;
        for (m, r) in f.terms() {
            if base.n_odd < 64 && m >> base.n_odd != 0 {
                return Err(Error::ChartMismatch(
                    "odd generator outside the chart".into(),
                ));
            }
            let slots = r
                .numerator()
                .slots()
                .into_iter()
                .chain(r.denominator().slots());
            for s in slots {
                if s >= base.n_even {
                    return Err(Error::ChartMismatch(
                        "even variable outside the chart".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn multiply(&self, a: &ScalarExpr, b: &ScalarExpr) -> Result<ScalarExpr> {
        self.check(a)?;
        self.check(b)?;
        Ok(a * b)
    }

    /// Simultaneous substitution of base variables; unmapped variables stay.
    pub fn substitute(
        &self,
        f: &ScalarExpr,
        map: &BTreeMap<String, ScalarExpr>,
    ) -> Result<ScalarExpr> {
        let base = &self.inner.base;
        let mut even: Vec<ScalarExpr> = (0..base.n_even).map(ScalarExpr::even_var).collect();
        let mut odd: Vec<ScalarExpr> = (0..base.n_odd).map(ScalarExpr::odd_var).collect();
        for (name, img) in map {
            let b = base
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownCoordinate(name.clone()))?;
            let p = base.parities[b];
            if !img.is_zero() && img.parity() != Some(p) {
                return Err(Error::ParityMismatch(format!(
                    "`{name}` is {p} but its image is not"
                )));
            }
            match p {
                Parity::Even => even[base.slots[b]] = img.clone(),
                Parity::Odd => odd[base.slots[b]] = img.clone(),
            }
        }
        f.substitute_slots(&even, &odd)
    }

    /// Evaluate the body of `f` at values of the even base variables, keyed by name.
    pub fn eval_body(
        &self,
        f: &ScalarExpr,
        values: &BTreeMap<String, Rational>,
    ) -> Option<Rational> {
        let base = &self.inner.base;
        let mut v = vec![Rational::zero(); base.n_even];
        for (b, name) in base.names.iter().enumerate() {
            if base.parities[b].is_even() {
                if let Some(x) = values.get(name) {
                    v[base.slots[b]] = x.clone();
                }
            }
        }
        f.eval_body(&v)
    }

    pub(crate) fn resolve_identifier(&self, name: &str) -> Option<ScalarExpr> {
        if let Some(a) = self.inner.names.iter().position(|n| n == name) {
            return Some(self.inner.coords[a].clone());
        }
        let base = &self.inner.base;
        base.names
            .iter()
            .position(|n| n == name)
            .map(|b| Chart::base_var(base, b))
    }

    /// Parse an expression in this chart.
    pub fn parse(&self, text: &str) -> Result<ScalarExpr> {
        super::parse::parse(self, text)
    }

    /// Render an expression in the base variables; the output parses back
    /// to the same expression.
    pub fn render(&self, f: &ScalarExpr) -> String {
        let base = &self.inner.base;
        let even_names: Vec<&str> = (0..base.names.len())
            .filter(|b| base.parities[*b].is_even())
            .map(|b| base.names[b].as_str())
            .collect();
        let odd_names: Vec<&str> = (0..base.names.len())
            .filter(|b| base.parities[*b].is_odd())
            .map(|b| base.names[b].as_str())
            .collect();
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (m, r) in f.terms() {
            let mut word = Vec::new();
            let mut rest = m;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                word.push(odd_names.get(j).copied().unwrap_or("?"));
            }
            let word = word.join("*");
            if r.is_polynomial() {
                for (neg, t) in poly_terms(r.numerator(), &even_names) {
                    let s = match (t.as_str(), word.is_empty()) {
                        (_, true) => t,
                        ("1", false) => word.clone(),
                        (_, false) => format!("{t}*{word}"),
                    };
                    parts.push((neg, s));
                }
            } else {
                let (neg, body) = ratfunc_string(r, &even_names);
                let s = if word.is_empty() {
                    body
                } else {
                    format!("{body}*{word}")
                };
                parts.push((neg, s));
            }
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (neg, s)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(s);
        }
        out
    }
}

fn rational_string(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Terms of a polynomial as (negative, unsigned text), highest first.
fn poly_terms(p: &Poly, names: &[&str]) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    for (m, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
        let neg = c.is_negative();
        let a = c.abs();
        let mut factors = Vec::new();
        for (i, e) in m.exponents().iter().enumerate() {
            let n = names.get(i).copied().unwrap_or("?");
            match e {
                0 => {}
                1 => factors.push(n.to_string()),
                _ => factors.push(format!("{n}^{e}")),
            }
        }
        let mut s = String::new();
        if !a.is_one() || factors.is_empty() {
            s.push_str(&rational_string(&a));
            if !factors.is_empty() {
                s.push('*');
            }
        }
        s.push_str(&factors.join("*"));
        out.push((neg, s));
    }
    out
}

fn poly_string(p: &Poly, names: &[&str]) -> String {
    let mut s = String::new();
    for (i, (neg, t)) in poly_terms(p, names).into_iter().enumerate() {
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        let _ = write!(s, "{t}");
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn ratfunc_string(r: &RatFunc, names: &[&str]) -> (bool, String) {
    let num = r.numerator();
    let (neg, num) = if num.len() == 1 && num.has_negative_leading() {
        (true, num.neg())
    } else {
        (false, num.clone())
    };
    let n = poly_string(&num, names);
    let n = if num.len() > 1 { format!("({n})") } else { n };
    let d = poly_string(r.denominator(), names);
    let d = if r.denominator().len() > 1 || d.contains(['*', '^']) {
        format!("({d})")
    } else {
        d
    };
    (neg, format!("{n}/{d}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(&[
            ("x", Parity::Even),
            ("y", Parity::Even),
            ("xi", Parity::Odd),
            ("eta", Parity::Odd),
        ])
        .unwrap()
    }

    #[test]
    fn left_derivative_convention() {
        let c = chart();
        let xi_eta = c.parse("xi*eta").unwrap();
        let eta_xi = c.parse("eta*xi").unwrap();
        let eta = c.parse("eta").unwrap();
        assert_eq!(c.differentiate(&xi_eta, "xi").unwrap(), eta);
        assert_eq!(c.differentiate(&eta_xi, "xi").unwrap(), -eta);
    }

    #[test]
    fn render_round_trip() {
        let c = chart();
        for s in [
            "0",
            "x^2 - 3/4*y",
            "(x + 1)/(x*y - 2)*xi*eta - xi",
            "-1/x^2",
            "2/(x^2*y)",
        ] {
            let e = c.parse(s).unwrap();
            let r = c.render(&e);
            assert_eq!(c.parse(&r).unwrap(), e, "{s} rendered as {r}");
        }
    }

    #[test]
    fn nilpotent_shift_substitution() {
        let c = chart();
        let f = c.parse("1/x").unwrap();
        let mut map = BTreeMap::new();
        map.insert("x".to_string(), c.parse("x + xi*eta").unwrap());
        let g = c.substitute(&f, &map).unwrap();
        assert_eq!(g, c.parse("1/x - xi*eta/x^2").unwrap());
        map.insert("y".to_string(), c.parse("xi").unwrap());
        assert!(matches!(
            c.substitute(&f, &map),
            Err(Error::ParityMismatch(_))
        ));
    }

    #[test]
    fn reparametrized_partials() {
        let c = Chart::even(&["x"]).unwrap();
        let y = c.parse("x^2").unwrap();
        let d = c.reparametrize(&["y"], vec![y]).unwrap();
        // d/dy x = 1/(2x)
        let x = c.parse("x").unwrap();
        assert_eq!(d.partial(0, &x), c.parse("1/(2*x)").unwrap());
        assert_eq!(d.parse("y").unwrap(), c.parse("x^2").unwrap());
    }
}
