use crate::brackets::canonical_pencil;
use crate::densities::Density;
use crate::phasespace::BracketData;
use crate::scalar::{Parity, ScalarExpr};
use crate::{q, Error, Rational, Result};

use super::{transform_bracket_data, transform_operator, CoordChange};

/// `y''' / y' - 3/2 (y'' / y')^2` of the new coordinate along the old one.
pub fn schwarzian(ch: &CoordChange) -> Result<ScalarExpr> {
    let c = &ch.from;
    let y = ch.to.coordinate(0);
    let d1 = c.partial(0, &y);
    let d2 = c.partial(0, &d1);
    let d3 = c.partial(0, &d2);
    let r = d2.div_ref(&d1)?;
    Ok(d3.div_ref(&d1)? - (&r * &r).scale(&q(3, 2)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SturmReport {
    /// `1/2 (gamma_x + theta/2)` before the change.
    pub u: ScalarExpr,
    /// The potential after the change, from the transformed data.
    pub u_new: ScalarExpr,
    /// The potential read off the transformed operator.
    pub u_oracle: ScalarExpr,
    pub schwarzian: ScalarExpr,
    /// `y_x`.
    pub jacobian: ScalarExpr,
    /// `sg` for `U' = (y_x)^{-2} (U + sg s/2 Schwarzian)`, if either sign holds.
    /// Only meaningful for constant `s`.
    pub relation_sign: Option<i8>,
}

impl SturmReport {
    pub fn routes_agree(&self) -> bool {
        self.u_new == self.u_oracle
    }
}

fn potential(data: &BracketData) -> ScalarExpr {
    let c = &data.chart;
    (c.partial(0, &data.gamma[0]) + data.theta.scale(&q(1, 2))).scale(&q(1, 2))
}

/// Weight-two pencil `s d^2 + (s_x + (2w+1) gamma) d + w gamma_x + w(w+1) theta`
/// on a line, its member at `w = -1/2` and the law of its potential.
pub fn sturm_liouville_demo(
    s: &ScalarExpr,
    gamma: &ScalarExpr,
    theta: &ScalarExpr,
    ch: &CoordChange,
) -> Result<SturmReport> {
    let c = &ch.from;
    if c.dim() != 1 || c.parity(0).is_odd() {
        return Err(Error::precondition("the demo needs one even coordinate"));
    }
    if s.is_zero() {
        return Err(Error::precondition("s must not vanish"));
    }
    let lambda = q(2, 1);
    let data = BracketData::new(
        c,
        vec![vec![s.clone()]],
        vec![gamma.clone()],
        theta.clone(),
        lambda.clone(),
        Parity::Even,
    )?;
    let u = potential(&data);
    let moved = transform_bracket_data(&data, ch)?;
    let u_new = potential(&moved);
    // the canonical pencil is half of the operator above; read -2x its free term at w = -1/2
    let half = q(-1, 2);
    let op = transform_operator(&canonical_pencil(&data), ch)?.specialize(&half);
    let free = op.apply(&Density::unit()).component(&lambda);
    let u_oracle = free.scale(&q(-2, 1));
    let sch = schwarzian(ch)?;
    let yx = ch.jacobian[0][0].clone();
    let y2 = (&yx * &yx).inverse()?;
    let relation_sign = [1i8, -1].into_iter().find(|sg| {
        let rhs = &y2 * &(&u + &(s * &sch).scale(&Rational::new((*sg as i64).into(), 2.into())));
        rhs == u_oracle
    });
    Ok(SturmReport {
        u,
        u_new,
        u_oracle,
        schwarzian: sch,
        jacobian: yx,
        relation_sign,
    })
}
