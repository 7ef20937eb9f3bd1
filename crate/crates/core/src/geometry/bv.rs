use num_traits::Zero;

use crate::brackets::{
    canonical_pencil, check_jacobi_equations, classify_delta_squared, DeltaSquaredReport,
};
use crate::densities::Density;
use crate::phasespace::{canonical_bracket, BracketData, PhaseFn};
use crate::scalar::{left_inverse, signed, Chart, Matrix, Parity, ScalarExpr};
use crate::{q, Error, Rational, Result};

use super::{lb_pencil_from_volume, ConnectionOnVol};

/// `D gamma = (S, gamma^a p_a)`.
pub fn flatness_check(
    chart: &Chart,
    s: &Matrix,
    gamma: &[ScalarExpr],
    eps: Parity,
) -> Result<PhaseFn> {
    if eps.is_even() {
        return Err(Error::EvenBracket);
    }
    let data = BracketData::new(
        chart,
        s.clone(),
        gamma.to_vec(),
        ScalarExpr::zero(),
        Rational::zero(),
        eps,
    )?;
    Ok(canonical_bracket(
        chart,
        &data.principal_hamiltonian(),
        &data.connection_hamiltonian(),
    ))
}

/// `S^*(d gamma_#)` with `S^*(dx^a) = S^{ab} p_b`.
pub fn pushed_curvature(chart: &Chart, s: &Matrix, conn: &ConnectionOnVol) -> PhaseFn {
    let n = chart.dim();
    let sp: Vec<PhaseFn> = (0..n)
        .map(|a| {
            (0..n).fold(PhaseFn::zero(), |acc, b| {
                acc.add(&PhaseFn::scalar(s[a][b].clone()).mul(&PhaseFn::momentum(chart, b)))
            })
        })
        .collect();
    // d(gamma_b dx^b) = dx^a d_a gamma_b dx^b
    let mut curv = PhaseFn::zero();
    for a in 0..n {
        for b in 0..n {
            let dg = chart.partial(a, &conn.coeffs[b]);
            if !dg.is_zero() {
                curv = curv.add(&sp[a].mul(&PhaseFn::scalar(dg)).mul(&sp[b]));
            }
        }
    }
    curv
}

/// `D gamma` for the raised connection next to `S^*(d gamma_#)`; the two must agree.
pub fn connection_flatness(
    chart: &Chart,
    s: &Matrix,
    conn: &ConnectionOnVol,
    eps: Parity,
) -> Result<(PhaseFn, PhaseFn)> {
    let d = flatness_check(chart, s, &conn.raise(s), eps)?;
    let curv = pushed_curvature(chart, s, conn);
    if curv != d {
        return Err(Error::Inconsistency(
            "S*(d gamma) differs from D gamma".into(),
        ));
    }
    Ok((d, curv))
}

/// `c = (-1)^{a(eps+1)} d_a (gamma1^a - gamma0^a) - 1/2 (gamma0 + gamma1)_a (gamma1 - gamma0)^a`.
pub fn bv_cocycle(
    s: &Matrix,
    eps: Parity,
    g0: &ConnectionOnVol,
    g1: &ConnectionOnVol,
) -> Result<ScalarExpr> {
    if g0.chart != g1.chart {
        return Err(Error::ChartMismatch(
            "connections over different charts".into(),
        ));
    }
    let c = &g0.chart;
    let n = c.dim();
    let diff = ConnectionOnVol {
        chart: c.clone(),
        coeffs: (0..n).map(|a| &g1.coeffs[a] - &g0.coeffs[a]).collect(),
    };
    let up = diff.raise(s);
    let mut out = ScalarExpr::zero();
    for a in 0..n {
        out = out + signed(c.parity(a).is_odd() && eps.is_even(), c.partial(a, &up[a]));
        out = out - (&(&g0.coeffs[a] + &g1.coeffs[a]) * &up[a]).scale(&q(1, 2));
    }
    Ok(out)
}

/// What the existence-of-action analysis found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionReport {
    /// All four Jacobi residuals vanish.
    pub jacobi: bool,
    /// `gamma_a` with `gamma^a = S^{ab} gamma_b`.
    pub lower: Vec<ScalarExpr>,
    /// `d_a gamma_b = (-1)^{ab} d_b gamma_a`.
    pub closed: bool,
    /// `theta = gamma^a gamma_a`.
    pub theta_condition: bool,
    /// `A` with `gamma_a = -d_a A`, when it exists in the chart.
    pub action: Option<ScalarExpr>,
    /// Closed but with no rational primitive in this chart.
    pub twisted: bool,
}

pub fn existence_of_action_check(data: &BracketData) -> Result<ActionReport> {
    if data.parity.is_even() {
        return Err(Error::EvenBracket);
    }
    if !data.lambda.is_zero() {
        return Err(Error::precondition("existence of action needs weight zero"));
    }
    let c = &data.chart;
    if !c.is_base() {
        return Err(Error::precondition(
            "integration needs a chart of base variables",
        ));
    }
    let n = c.dim();
    let sinv = left_inverse(&data.s)
        .map_err(|_| Error::NotInvertible("the bracket is degenerate".into()))?;
    let lower: Vec<ScalarExpr> = (0..n)
        .map(|b| (0..n).map(|a| &sinv[b][a] * &data.gamma[a]).sum())
        .collect();
    let jacobi = check_jacobi_equations(data)?.all_zero();
    let closed = (0..n).all(|a| {
        (0..n).all(|b| {
            c.partial(a, &lower[b])
                == signed(c.parity(a).koszul(c.parity(b)), c.partial(b, &lower[a]))
        })
    });
    let theta: ScalarExpr = (0..n).map(|a| &data.gamma[a] * &lower[a]).sum();
    let theta_condition = theta == data.theta;
    let mut action = None;
    let mut twisted = false;
    if closed {
        let target: Vec<ScalarExpr> = lower.iter().map(|g| -g).collect();
        match integrate_gradient(c, &target) {
            Some(a) => action = Some(a),
            None => twisted = true,
        }
    }
    Ok(ActionReport {
        jacobi,
        lower,
        closed,
        theta_condition,
        action,
        twisted,
    })
}

/// `A` with `d_a A = g_a`, integrating one coordinate at a time.
fn integrate_gradient(c: &Chart, g: &[ScalarExpr]) -> Option<ScalarExpr> {
    let mut a = ScalarExpr::zero();
    for i in 0..c.dim() {
        let r = &g[i] - &c.partial(i, &a);
        a = a + c.antiderivative(i, &r)?;
    }
    (0..c.dim()).all(|i| c.partial(i, &a) == g[i]).then_some(a)
}

/// The BV equation for `rho = e^A` next to the `Delta^2` classification.
#[derive(Clone, Debug)]
pub struct BvReport {
    /// `Delta_can(rho^{1/2}) / rho^{1/2}`.
    pub hamiltonian: ScalarExpr,
    /// `Delta_can(rho^{1/2})` as a half-density, divided by `e^{A/2}`.
    pub residual: Density,
    pub delta_squared: DeltaSquaredReport,
    /// Both zero tests give the same answer.
    pub agree: bool,
    /// `+1` if `Delta^2` is the Lie derivative along `grad H`, `-1` if along
    /// `-grad H`; `None` if neither.
    pub field_sign: Option<i8>,
}

pub fn bv_master_check(data: &BracketData, a: &ScalarExpr) -> Result<BvReport> {
    if data.parity.is_even() {
        return Err(Error::EvenBracket);
    }
    let c = &data.chart;
    let n = c.dim();
    if data.s.iter().flatten().any(|e| e.as_constant().is_none()) {
        return Err(Error::precondition(
            "the canonical Laplacian is taken in a chart with constant S",
        ));
    }
    if *data != lb_pencil_from_volume(c, &data.s, a, &Rational::zero(), data.parity)? {
        return Err(Error::precondition(
            "the data do not come from the volume form e^A",
        ));
    }
    let bare = BracketData::new(
        c,
        data.s.clone(),
        vec![ScalarExpr::zero(); n],
        ScalarExpr::zero(),
        Rational::zero(),
        data.parity,
    )?;
    let half = q(1, 2);
    let can = canonical_pencil(&bare).specialize(&half);
    let h = can
        .conjugate_exp(a, &half)?
        .apply(&Density::unit())
        .component(&Rational::zero());
    let rep = classify_delta_squared(&canonical_pencil(data))?;
    let agree = h.is_zero() == rep.is_master();
    let field_sign = if h.is_zero() {
        rep.is_master().then_some(1)
    } else {
        rep.vector_field.as_ref().and_then(|v| {
            let ph = h.parity().unwrap_or(Parity::Odd);
            let grad: Vec<ScalarExpr> = (0..n)
                .map(|i| {
                    signed(
                        c.parity(i).koszul(ph),
                        (0..n).map(|b| &data.s[i][b] * &c.partial(b, &h)).sum(),
                    )
                })
                .collect();
            if *v == grad {
                Some(1)
            } else if v.iter().zip(&grad).all(|(x, y)| *x == -y) {
                Some(-1)
            } else {
                None
            }
        })
    };
    Ok(BvReport {
        residual: Density::new(half, h.clone()),
        hamiltonian: h,
        delta_squared: rep,
        agree,
        field_sign,
    })
}
