use num_traits::{One, Zero};

use crate::brackets::{canonical_pencil, generated_bracket};
use crate::densities::Density;
use crate::operators::{DiffOp, OperatorPencil};
use crate::phasespace::BracketData;
use crate::scalar::{signed, Chart, Matrix, Parity, ScalarExpr};
use crate::{q, Error, Rational, Result};

use super::ConnectionOnVol;

/// `L = 1/2 S^{ab} d_b d_a + T^a d_a + R` for an operator of one weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorParts {
    pub s: Matrix,
    pub t: Vec<ScalarExpr>,
    pub r: ScalarExpr,
    pub lambda: Rational,
    pub parity: Parity,
}

pub fn operator_parts(l: &DiffOp) -> Result<OperatorParts> {
    if l.w_degree().is_some_and(|k| k > 0) {
        return Err(Error::precondition(
            "expected an operator on densities of a fixed weight",
        ));
    }
    if let Some(o) = l.pencil_order() {
        if o > 2 {
            return Err(Error::OrderTooHigh {
                found: o as usize,
                allowed: 2,
            });
        }
    }
    let c = l.chart();
    let n = c.dim();
    let parity = l
        .parity()
        .ok_or_else(|| Error::precondition("operator must have a parity"))?;
    let lambda = l.weight().unwrap_or_else(Rational::zero);
    let xs: Vec<Density> = (0..n).map(|a| Density::function(c.coordinate(a))).collect();
    let r = l.apply(&Density::unit()).component(&lambda);
    let t = (0..n)
        .map(|a| l.apply(&xs[a]).component(&lambda) - &r * &c.coordinate(a))
        .collect();
    let mut s = vec![vec![ScalarExpr::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            s[a][b] = generated_bracket(l, &xs[a], &xs[b])?.component(&lambda);
        }
    }
    Ok(OperatorParts {
        s,
        t,
        r,
        lambda,
        parity,
    })
}

/// `sum_b (-1)^{b(eps+1)} d_b S^{ba}`.
fn s_divergence(c: &Chart, s: &Matrix, eps: Parity, a: usize) -> ScalarExpr {
    (0..c.dim())
        .map(|b| {
            signed(
                c.parity(b).is_odd() && eps.is_even(),
                c.partial(b, &s[b][a]),
            )
        })
        .sum()
}

/// The upper connection `(2T^a - d_b S^{ba}) / (2 w0 - 1)` of an operator on
/// `w0`-densities.
pub fn extract_upper_connection(l: &DiffOp, w0: &Rational) -> Result<Vec<ScalarExpr>> {
    let k = w0 * q(2, 1) - Rational::one();
    if k.is_zero() {
        return Err(Error::SingularWeight(
            "on half-densities the subprincipal symbol is a vector field".into(),
        ));
    }
    let p = operator_parts(l)?;
    let c = l.chart();
    Ok((0..c.dim())
        .map(|a| (p.t[a].scale(&q(2, 1)) - s_divergence(c, &p.s, p.parity, a)).scale(&k.recip()))
        .collect())
}

/// Bracket data of the Laplace-Beltrami pencil of `e^A Dx`:
/// `gamma^a = -S^{ab} d_b A`, `theta = S^{ab} d_b A d_a A`.
pub fn lb_pencil_from_volume(
    chart: &Chart,
    s: &Matrix,
    a: &ScalarExpr,
    lambda: &Rational,
    parity: Parity,
) -> Result<BracketData> {
    let conn = ConnectionOnVol::from_action(chart, a)?;
    pencil_from_connection(chart, s, &conn, lambda, parity)
}

/// `gamma^a = S^{ab} gamma_b`, `theta = gamma^a gamma_a`.
pub fn pencil_from_connection(
    chart: &Chart,
    s: &Matrix,
    conn: &ConnectionOnVol,
    lambda: &Rational,
    parity: Parity,
) -> Result<BracketData> {
    if conn.chart != *chart {
        return Err(Error::ChartMismatch(
            "connection over a different chart".into(),
        ));
    }
    let gamma = conn.raise(s);
    let theta = gamma.iter().zip(&conn.coeffs).map(|(u, l)| u * l).sum();
    BracketData::new(chart, s.clone(), gamma, theta, lambda.clone(), parity)
}

/// `1/2 rho^{w-1} d_a (rho S^{ab} d_b (rho^{-w} .)) (-1)^{a(eps+1)}` on
/// `w`-densities with `rho = e^A`, expanded by conjugation.
pub fn lb_pencil_oracle(
    chart: &Chart,
    s: &Matrix,
    a: &ScalarExpr,
    parity: Parity,
    w: &Rational,
) -> Result<DiffOp> {
    let n = chart.dim();
    let mut out = DiffOp::zero(chart);
    for i in 0..n {
        let outer = DiffOp::partial(chart, i).conjugate_exp(a, &(Rational::one() - w))?;
        let mut inner = DiffOp::zero(chart);
        for j in 0..n {
            if !s[i][j].is_zero() {
                inner = inner
                    .add(&DiffOp::mult(chart, s[i][j].clone()).compose(&DiffOp::partial(chart, j)));
            }
        }
        let term = outer.compose(&inner.conjugate_exp(a, &-w)?);
        let neg = chart.parity(i).is_odd() && parity.is_even();
        out = out.add(&if neg { term.neg() } else { term });
    }
    Ok(out.scale(&q(1, 2)))
}

/// Lie derivative on densities: `Q^a d_a + w (-1)^{a(eps+1)} d_a Q^a`,
/// where `eps` is the parity of `Q`.
pub fn lie_derivative(chart: &Chart, v: &[ScalarExpr], eps: Parity) -> OperatorPencil {
    let mut op = DiffOp::zero(chart);
    let mut div = ScalarExpr::zero();
    for (a, x) in v.iter().enumerate() {
        op = op.add(&DiffOp::mult(chart, x.clone()).compose(&DiffOp::partial(chart, a)));
        div = div
            + signed(
                chart.parity(a).is_odd() && eps.is_even(),
                chart.partial(a, x),
            );
    }
    op.add(&DiffOp::mult(chart, div).compose(&DiffOp::weight_op(chart)))
}

/// Result of changing `gamma` and `theta` with `S` fixed.
#[derive(Clone, Debug)]
pub struct PencilShift {
    pub data: BracketData,
    /// The displayed difference of the two canonical pencils.
    pub delta: OperatorPencil,
    /// Whether the displayed difference equals the difference of the pencils.
    pub matches_display: bool,
    /// For weight zero, whether it also equals `(w - 1/2) Lie_X - w(w-1) div X`.
    pub matches_lie_form: Option<bool>,
}

pub fn pencil_shift(data: &BracketData, x: &[ScalarExpr], xi: &ScalarExpr) -> Result<PencilShift> {
    let c = &data.chart;
    let n = c.dim();
    if x.len() != n {
        return Err(Error::InvalidChart(format!(
            "the shift needs {n} components"
        )));
    }
    let shifted = BracketData::new(
        c,
        data.s.clone(),
        data.gamma.iter().zip(x).map(|(g, v)| g + v).collect(),
        &data.theta + xi,
        data.lambda.clone(),
        data.parity,
    )?;
    let l1 = &data.lambda - Rational::one();
    let w = DiffOp::weight_op(c);
    let id = DiffOp::identity(c);
    let w_shift = w.add(&id.scale(&(&l1 * q(1, 2))));
    let coord_div: ScalarExpr = (0..n)
        .map(|a| {
            signed(
                c.parity(a).is_odd() && data.parity.is_even(),
                c.partial(a, &x[a]),
            )
        })
        .sum();
    let div = &coord_div + &xi.scale(&(&l1 * q(1, 2)));
    let mut inner = DiffOp::zero(c);
    for (a, v) in x.iter().enumerate() {
        inner = inner.add(&DiffOp::mult(c, v.clone()).compose(&DiffOp::partial(c, a)));
    }
    let inner = inner
        .compose(&w_shift)
        .add(
            &DiffOp::mult(c, xi.scale(&q(1, 2)))
                .compose(&w)
                .compose(&w_shift),
        )
        .add(&DiffOp::mult(c, div.scale(&q(1, 2))).compose(&w));
    let delta = DiffOp::t_power(c, data.lambda.clone()).compose(&inner);
    let actual = canonical_pencil(&shifted).sub(&canonical_pencil(data));
    let matches_lie_form = data.lambda.is_zero().then(|| {
        let div0 = &coord_div - &xi.scale(&q(1, 2));
        let lie = lie_derivative(c, x, data.parity).compose(&w.sub(&id.scale(&q(1, 2))));
        let quad = DiffOp::mult(c, div0).compose(&w).compose(&w.sub(&id));
        lie.sub(&quad) == actual
    });
    Ok(PencilShift {
        data: shifted,
        matches_display: delta == actual,
        delta,
        matches_lie_form,
    })
}

/// `L = Delta^LB_{w0} + Lie_Q + f` for the volume form `e^A Dx`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorDecomposition {
    pub q: Vec<ScalarExpr>,
    pub f: ScalarExpr,
    /// Bracket data of the Laplace-Beltrami pencil used.
    pub lb: BracketData,
}

pub fn decompose_operator(
    l: &DiffOp,
    w0: &Rational,
    a: &ScalarExpr,
) -> Result<OperatorDecomposition> {
    let p = operator_parts(l)?;
    if !p.lambda.is_zero() {
        return Err(Error::precondition(
            "decomposition needs an operator of weight zero",
        ));
    }
    let c = l.chart();
    let n = c.dim();
    let lb = lb_pencil_from_volume(c, &p.s, a, &Rational::zero(), p.parity)?;
    let k = w0 * q(2, 1) - Rational::one();
    // gamma of the volume form is Gamma^a = S^{ab} Gamma_b
    let qv: Vec<ScalarExpr> = (0..n)
        .map(|i| {
            (p.t[i].scale(&q(2, 1)) - s_divergence(c, &p.s, p.parity, i) - lb.gamma[i].scale(&k))
                .scale(&q(1, 2))
        })
        .collect();
    let rest = l
        .sub(&canonical_pencil(&lb).specialize(w0))
        .sub(&lie_derivative(c, &qv, p.parity).specialize(w0));
    if rest.pencil_order().is_some_and(|o| o > 0) {
        return Err(Error::Inconsistency(
            "remainder of the decomposition is not of order zero".into(),
        ));
    }
    let f = rest.apply(&Density::unit()).component(&Rational::zero());
    Ok(OperatorDecomposition { q: qv, f, lb })
}

/// The unique canonical pencil through `L` at `w0`.
pub fn recover_pencil(l: &DiffOp, w0: &Rational, a: &ScalarExpr) -> Result<OperatorPencil> {
    let one = Rational::one();
    if w0.is_zero() || *w0 == one || *w0 == q(1, 2) {
        return Err(Error::SingularWeight(format!(
            "no unique pencil through an operator on {w0}-densities"
        )));
    }
    let d = decompose_operator(l, w0, a)?;
    let c = l.chart();
    let w = DiffOp::weight_op(c);
    let id = DiffOp::identity(c);
    let lin = w
        .scale(&q(2, 1))
        .sub(&id)
        .scale(&(w0 * q(2, 1) - &one).recip());
    let quad = w.compose(&w.sub(&id)).scale(&(w0 * (w0 - &one)).recip());
    let eps = l.parity().unwrap_or(Parity::Even);
    Ok(canonical_pencil(&d.lb)
        .add(&lie_derivative(c, &d.q, eps).compose(&lin))
        .add(&DiffOp::mult(c, d.f).compose(&quad)))
}
