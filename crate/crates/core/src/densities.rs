//! The algebra of densities, its invariant pairing, and derivations of it
//! (vector fields on the extended manifold with fiber coordinate `t`).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::operators::DiffOp;
use crate::scalar::{signed, Chart, Parity, ScalarExpr};
use crate::{Error, Rational, Result};

/// Finite sum of `psi_w(x) t^w` over rational weights `w`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Density {
    comps: BTreeMap<Rational, ScalarExpr>,
}

impl Density {
    pub fn zero() -> Self {
        Density::default()
    }

    pub fn unit() -> Self {
        Density::function(ScalarExpr::one())
    }

    /// `c t^w`.
    pub fn new(w: Rational, c: ScalarExpr) -> Self {
        let mut d = Density::zero();
        d.insert(w, c);
        d
    }

    /// A function, i.e. a density of weight zero.
    pub fn function(c: ScalarExpr) -> Self {
        Density::new(Rational::zero(), c)
    }

    pub fn t_power(w: Rational) -> Self {
        Density::new(w, ScalarExpr::one())
    }

    fn insert(&mut self, w: Rational, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        let s = match self.comps.remove(&w) {
            Some(old) => old + c,
            None => c,
        };
        if !s.is_zero() {
            self.comps.insert(w, s);
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&Rational, &ScalarExpr)> {
        self.comps.iter()
    }

    /// Coefficient of `t^w`.
    pub fn component(&self, w: &Rational) -> ScalarExpr {
        self.comps.get(w).cloned().unwrap_or_default()
    }

    pub fn weights(&self) -> Vec<Rational> {
        self.comps.keys().cloned().collect()
    }

    /// The weight, when all components share one.
    pub fn weight(&self) -> Option<Rational> {
        match self.comps.len() {
            1 => self.comps.keys().next().cloned(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, other: &Density) -> Density {
        let mut r = self.clone();
        for (w, c) in &other.comps {
            r.insert(w.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Density) -> Density {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Density {
        Density {
            comps: self.comps.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Density {
        let mut r = Density::zero();
        for (w, c) in &self.comps {
            r.insert(w.clone(), c.scale(k));
        }
        r
    }

    /// Multiply every component on the left by a function.
    pub fn left_mul(&self, f: &ScalarExpr) -> Density {
        let mut r = Density::zero();
        for (w, c) in &self.comps {
            r.insert(w.clone(), f * c);
        }
        r
    }

    /// Shift every weight by `dw`.
    pub fn shift(&self, dw: &Rational) -> Density {
        Density {
            comps: self
                .comps
                .iter()
                .map(|(w, c)| (w + dw, c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Density) -> Density {
        let mut r = Density::zero();
        for (w1, c1) in &self.comps {
            for (w2, c2) in &other.comps {
                r.insert(w1 + w2, c1 * c2);
            }
        }
        r
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut seen = None;
        for c in self.comps.values() {
            let p = c.parity()?;
            match seen {
                None => seen = Some(p),
                Some(s) if s != p => return None,
                _ => {}
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn homogeneous_parts(&self) -> Vec<(Parity, Density)> {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|p| {
                let mut d = Density::zero();
                for (w, c) in &self.comps {
                    d.insert(w.clone(), c.part(p));
                }
                (p, d)
            })
            .filter(|(_, d)| !d.is_zero())
            .collect()
    }

    /// Apply `f` to each component.
    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Density {
        let mut r = Density::zero();
        for (w, c) in &self.comps {
            r.insert(w.clone(), f(c));
        }
        r
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.comps
            .iter()
            .map(|(w, c)| {
                let body = chart.render(c);
                if w.is_zero() {
                    format!("({body})")
                } else {
                    format!("({body})*t^({w})")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

pub fn density_multiply(psi: &Density, chi: &Density) -> Density {
    psi.mul(chi)
}

/// The integrand of the invariant pairing: the weight-one part of the product.
pub fn residue_pairing(psi: &Density, chi: &Density) -> Density {
    let one = Rational::one();
    Density::new(one.clone(), psi.mul(chi).component(&one))
}

/// `t^lambda (X^a d_a + X_0 w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub chart: Chart,
    pub coords: Vec<ScalarExpr>,
    pub wpart: ScalarExpr,
    pub lambda: Rational,
    pub parity: Parity,
}

impl Derivation {
    pub fn new(
        chart: &Chart,
        coords: Vec<ScalarExpr>,
        wpart: ScalarExpr,
        lambda: Rational,
        parity: Parity,
    ) -> Result<Derivation> {
        if coords.len() != chart.dim() {
            return Err(Error::InvalidChart(format!(
                "a derivation needs {} components",
                chart.dim()
            )));
        }
        for (a, x) in coords.iter().enumerate() {
            chart.check(x)?;
            if !x.is_zero() && x.parity() != Some(parity + chart.parity(a)) {
                return Err(Error::ParityMismatch(format!(
                    "component along `{}`",
                    chart.name(a)
                )));
            }
        }
        chart.check(&wpart)?;
        if !wpart.is_zero() && wpart.parity() != Some(parity) {
            return Err(Error::ParityMismatch("weight component".into()));
        }
        Ok(Derivation {
            chart: chart.clone(),
            coords,
            wpart,
            lambda,
            parity,
        })
    }

    pub fn zero(chart: &Chart, lambda: Rational, parity: Parity) -> Derivation {
        Derivation {
            chart: chart.clone(),
            coords: vec![ScalarExpr::zero(); chart.dim()],
            wpart: ScalarExpr::zero(),
            lambda,
            parity,
        }
    }

    /// The weight operator `t d/dt`.
    pub fn weight_operator(chart: &Chart) -> Derivation {
        Derivation {
            wpart: ScalarExpr::one(),
            ..Derivation::zero(chart, Rational::zero(), Parity::Even)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.wpart.is_zero() && self.coords.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, psi: &Density) -> Density {
        let mut out = Density::zero();
        for (w, c) in psi.components() {
            let mut v: ScalarExpr = (0..self.chart.dim())
                .map(|a| &self.coords[a] * &self.chart.partial(a, c))
                .sum();
            v = v + (&self.wpart * c).scale(w);
            out.insert(w + &self.lambda, v);
        }
        out
    }

    pub fn to_op(&self) -> DiffOp {
        let mut op = DiffOp::zero(&self.chart);
        for a in 0..self.chart.dim() {
            op = op.add(
                &DiffOp::mult(&self.chart, self.coords[a].clone())
                    .compose(&DiffOp::partial(&self.chart, a)),
            );
        }
        op = op.add(
            &DiffOp::mult(&self.chart, self.wpart.clone()).compose(&DiffOp::weight_op(&self.chart)),
        );
        DiffOp::t_power(&self.chart, self.lambda.clone()).compose(&op)
    }

    /// `sum_a (-1)^{a(X+1)} d_a X^a`, the coordinate part of the divergence.
    pub fn coordinate_divergence(&self) -> ScalarExpr {
        (0..self.chart.dim())
            .map(|a| {
                let pa = self.chart.parity(a);
                signed(
                    pa.is_odd() && self.parity.is_even(),
                    self.chart.partial(a, &self.coords[a]),
                )
            })
            .sum()
    }

    /// `t^lambda ((-1)^{a(X+1)} d_a X^a + (lambda - 1) X_0)`.
    pub fn divergence(&self) -> Density {
        let c = self.coordinate_divergence() + self.wpart.scale(&(&self.lambda - Rational::one()));
        Density::new(self.lambda.clone(), c)
    }

    /// `-(X + X^*)`, computed from the adjoint rules.
    pub fn divergence_via_adjoint(&self) -> Result<Density> {
        let op = self.to_op();
        let sum = op.add(&op.adjoint());
        if sum.pencil_order().is_some_and(|o| o > 0) {
            return Err(Error::Inconsistency("X + X* is not of order zero".into()));
        }
        Ok(sum.apply(&Density::unit()).neg())
    }

    /// Split `X = X_free + phi w` with `X_free` divergence-free.
    pub fn decompose(&self) -> Result<(Derivation, Density)> {
        let l1 = &self.lambda - Rational::one();
        if l1.is_zero() {
            return Err(Error::SingularWeight(
                "weight-one derivations admit no divergence-free decomposition".into(),
            ));
        }
        let div = self.divergence();
        let phi = div.scale(&l1.recip());
        let free_w = -self.coordinate_divergence().scale(&l1.recip());
        let free = Derivation {
            wpart: free_w,
            ..self.clone()
        };
        Ok((free, phi))
    }

    /// Multiply by the homogeneous density `a t^mu` on the left.
    pub fn scaled(&self, mu: &Rational, a: &ScalarExpr) -> Result<Derivation> {
        let pa = a
            .parity()
            .ok_or_else(|| Error::precondition("the factor must be homogeneous"))?;
        Ok(Derivation {
            chart: self.chart.clone(),
            coords: self.coords.iter().map(|x| a * x).collect(),
            wpart: a * &self.wpart,
            lambda: &self.lambda + mu,
            parity: self.parity + pa,
        })
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        if self.chart != other.chart || self.lambda != other.lambda || self.parity != other.parity {
            return Err(Error::precondition(
                "derivations of different type cannot be added",
            ));
        }
        Ok(Derivation {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
            wpart: &self.wpart + &other.wpart,
            ..self.clone()
        })
    }

    /// Graded commutator `XY - (-1)^{XY} YX`.
    pub fn commutator(&self, other: &Derivation) -> Result<Derivation> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(
                "derivations over different charts".into(),
            ));
        }
        let chart = &self.chart;
        let neg = self.parity.koszul(other.parity);
        let br = |psi: &Density| -> Density {
            let xy = self.apply(&other.apply(psi));
            let yx = other.apply(&self.apply(psi));
            if neg {
                xy.add(&yx)
            } else {
                xy.sub(&yx)
            }
        };
        let lambda = &self.lambda + &other.lambda;
        let coords = (0..chart.dim())
            .map(|a| br(&Density::function(chart.coordinate(a))).component(&lambda))
            .collect();
        let wpart = br(&Density::t_power(Rational::one())).component(&(&lambda + Rational::one()));
        Ok(Derivation {
            chart: chart.clone(),
            coords,
            wpart,
            lambda,
            parity: self.parity + other.parity,
        })
    }
}

pub fn derivation_apply(x: &Derivation, psi: &Density) -> Density {
    x.apply(psi)
}

pub fn divergence(x: &Derivation) -> Density {
    x.divergence()
}

pub fn divergence_via_adjoint(x: &Derivation) -> Result<Density> {
    x.divergence_via_adjoint()
}

pub fn decompose_derivation(x: &Derivation) -> Result<(Derivation, Density)> {
    x.decompose()
}

pub fn derivation_commutator(x: &Derivation, y: &Derivation) -> Result<Derivation> {
    x.commutator(y)
}
