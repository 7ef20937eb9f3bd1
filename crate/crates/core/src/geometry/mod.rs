//! Coordinate changes, connections on volume forms, Laplace-Beltrami type
//! pencils and the odd (BV) geometry built on them.

mod bv;
mod pencils;
mod sturm;

pub use bv::{
    bv_cocycle, bv_master_check, connection_flatness, existence_of_action_check, flatness_check,
    ActionReport, BvReport,
};
pub use pencils::{
    decompose_operator, extract_upper_connection, lb_pencil_from_volume, lb_pencil_oracle,
    lie_derivative, operator_parts, pencil_from_connection, pencil_shift, recover_pencil,
    OperatorDecomposition, OperatorParts, PencilShift,
};
pub use sturm::{schwarzian, sturm_liouville_demo, SturmReport};

use num_traits::Signed;

use crate::operators::{DiffOp, OperatorPencil};
use crate::phasespace::BracketData;
use crate::scalar::{berezinian, left_inverse, signed, Chart, Matrix, Parity, ScalarExpr};
use crate::{Error, Rational, Result};

/// A change of coordinates `x^{a'} = x^{a'}(x)` from one chart to another
/// over the same base variables.
#[derive(Clone, Debug)]
pub struct CoordChange {
    pub from: Chart,
    pub to: Chart,
    /// `jacobian[a][a']` is the left derivative of `x^{a'}` along `x^a`.
    pub jacobian: Matrix,
    /// `inverse[a'][a]` is the left derivative of `x^a` along `x^{a'}`.
    pub inverse: Matrix,
    /// The Berezinian `J = D(x')/D(x)`.
    pub j: ScalarExpr,
}

impl CoordChange {
    /// New coordinates given by expressions over `from`.
    pub fn new<S: AsRef<str>>(
        from: &Chart,
        names: &[S],
        coords: Vec<ScalarExpr>,
    ) -> Result<CoordChange> {
        let to = from.reparametrize(names, coords)?;
        CoordChange::between(from, &to)
    }

    /// The change relating two charts over the same base.
    pub fn between(from: &Chart, to: &Chart) -> Result<CoordChange> {
        if !from.same_base(to) {
            return Err(Error::ChartMismatch(
                "charts over different base variables".into(),
            ));
        }
        let n = from.dim();
        let jacobian: Matrix = (0..n)
            .map(|a| (0..n).map(|b| from.partial(a, &to.coordinate(b))).collect())
            .collect();
        let inverse = left_inverse(&jacobian)
            .map_err(|_| Error::NotInvertible("the Jacobian of the change is degenerate".into()))?;
        let j = berezinian(&transpose(&jacobian), to.parities(), from.parities())?;
        if j.body().is_zero() {
            return Err(Error::NotInvertible("the Berezinian vanishes".into()));
        }
        Ok(CoordChange {
            from: from.clone(),
            to: to.clone(),
            jacobian,
            inverse,
            j,
        })
    }

    /// Same change with a supplied Berezinian.
    pub fn with_berezinian(mut self, j: ScalarExpr) -> Result<CoordChange> {
        if j.parity() != Some(Parity::Even) || j.body().is_zero() {
            return Err(Error::NotInvertible(
                "the Berezinian must be even and invertible".into(),
            ));
        }
        self.j = j;
        Ok(self)
    }

    pub fn identity(chart: &Chart) -> CoordChange {
        CoordChange::between(chart, chart).expect("identity change")
    }

    /// Parse new coordinates written over `from`, e.g. `[("y", "x^2")]`.
    pub fn parse(from: &Chart, coords: &[(&str, &str)]) -> Result<CoordChange> {
        let names: Vec<&str> = coords.iter().map(|(n, _)| *n).collect();
        let exprs = coords
            .iter()
            .map(|(_, e)| from.parse(e))
            .collect::<Result<Vec<_>>>()?;
        CoordChange::new(from, &names, exprs)
    }

    /// `d_a log J` along an old coordinate.
    pub fn log_derivative(&self, a: usize) -> ScalarExpr {
        self.from
            .partial(a, &self.j)
            .div_ref(&self.j)
            .expect("J is invertible")
    }

    /// `J^{-lambda}`; needs an integer `lambda` unless `J` is constant with
    /// a rational root.
    pub fn j_power(&self, lambda: &Rational) -> Result<ScalarExpr> {
        let e = -lambda;
        if e.is_integer() {
            let n = e.to_integer();
            let k: u32 = n
                .abs()
                .try_into()
                .map_err(|_| Error::precondition("weight too large"))?;
            let p = self.j.pow(k);
            return if n.is_negative() { p.inverse() } else { Ok(p) };
        }
        if let Some(c) = self.j.as_constant() {
            if let Some(r) = rational_power(&c, &e) {
                return Ok(ScalarExpr::constant(r));
            }
        }
        Err(Error::precondition(
            "J to a fractional power is not rational",
        ))
    }

    /// The change back from `to` to `from`.
    pub fn reversed(&self) -> Result<CoordChange> {
        CoordChange::between(&self.to, &self.from)
    }
}

fn transpose(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[j][i].clone()).collect())
        .collect()
}

fn nth_root(x: &num_bigint::BigInt, n: u32) -> Option<num_bigint::BigInt> {
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

fn rational_power(c: &Rational, e: &Rational) -> Option<Rational> {
    if !c.is_positive() {
        return None;
    }
    let d: u32 = e.denom().try_into().ok()?;
    let num = nth_root(c.numer(), d)?;
    let den = nth_root(c.denom(), d)?;
    let base = Rational::new(num, den);
    let p: i32 = e.numer().try_into().ok()?;
    Some(num_traits::pow::pow(
        base.clone(),
        p.unsigned_abs() as usize,
    ))
    .map(|v| if p < 0 { v.recip() } else { v })
}

/// The coefficients of a connection in the bundle of volume forms,
/// `nabla_a rho = (d_a + gamma_a) rho`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionOnVol {
    pub chart: Chart,
    pub coeffs: Vec<ScalarExpr>,
}

impl ConnectionOnVol {
    pub fn new(chart: &Chart, coeffs: Vec<ScalarExpr>) -> Result<ConnectionOnVol> {
        if coeffs.len() != chart.dim() {
            return Err(Error::InvalidChart(format!(
                "a connection needs {} components",
                chart.dim()
            )));
        }
        for (a, g) in coeffs.iter().enumerate() {
            chart.check(g)?;
            if !g.is_zero() && g.parity() != Some(chart.parity(a)) {
                return Err(Error::ParityMismatch(format!(
                    "gamma_{} must be {}",
                    chart.name(a),
                    chart.parity(a)
                )));
            }
        }
        Ok(ConnectionOnVol {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Chart) -> ConnectionOnVol {
        ConnectionOnVol {
            chart: chart.clone(),
            coeffs: vec![ScalarExpr::zero(); chart.dim()],
        }
    }

    /// `gamma_a = -d_a A` for the volume form `e^A Dx`.
    pub fn from_action(chart: &Chart, a: &ScalarExpr) -> Result<ConnectionOnVol> {
        if !a.is_zero() && a.parity() != Some(Parity::Even) {
            return Err(Error::ParityMismatch("the action must be even".into()));
        }
        Ok(ConnectionOnVol {
            chart: chart.clone(),
            coeffs: (0..chart.dim()).map(|i| -chart.partial(i, a)).collect(),
        })
    }

    /// `gamma^a = S^{ab} gamma_b`.
    pub fn raise(&self, s: &Matrix) -> Vec<ScalarExpr> {
        let n = self.chart.dim();
        (0..n)
            .map(|a| (0..n).map(|b| &s[a][b] * &self.coeffs[b]).sum())
            .collect()
    }

    /// `gamma_{a'} = (d_{a'} x^a) (gamma_a + d_a log J)`.
    pub fn transform(&self, ch: &CoordChange) -> Result<ConnectionOnVol> {
        if self.chart != ch.from {
            return Err(Error::ChartMismatch(
                "connection and change use different charts".into(),
            ));
        }
        let n = self.chart.dim();
        let shifted: Vec<ScalarExpr> = (0..n)
            .map(|a| &self.coeffs[a] + &ch.log_derivative(a))
            .collect();
        let coeffs = (0..n)
            .map(|b| (0..n).map(|a| &ch.inverse[b][a] * &shifted[a]).sum())
            .collect();
        Ok(ConnectionOnVol {
            chart: ch.to.clone(),
            coeffs,
        })
    }
}

/// The displayed transformation laws for `S^{ab}`, `gamma^a` and `theta`.
pub fn transform_bracket_data(data: &BracketData, ch: &CoordChange) -> Result<BracketData> {
    if data.chart != ch.from {
        return Err(Error::ChartMismatch(
            "data and change use different charts".into(),
        ));
    }
    let (old, new) = (&ch.from, &ch.to);
    let n = old.dim();
    let jl = ch.j_power(&data.lambda)?;
    let jac = &ch.jacobian;
    let dl: Vec<ScalarExpr> = (0..n).map(|a| ch.log_derivative(a)).collect();
    let mut s = vec![vec![ScalarExpr::zero(); n]; n];
    for (ap, row) in s.iter_mut().enumerate() {
        for (bp, entry) in row.iter_mut().enumerate() {
            let mut v = ScalarExpr::zero();
            for a in 0..n {
                for b in 0..n {
                    if data.s[a][b].is_zero() {
                        continue;
                    }
                    let neg = new.parity(bp).is_odd() && (new.parity(ap) + old.parity(a)).is_odd();
                    v = v + signed(neg, &data.s[a][b] * &jac[b][bp] * &jac[a][ap]);
                }
            }
            *entry = &jl * &v;
        }
    }
    let sdl: Vec<ScalarExpr> = (0..n)
        .map(|a| (0..n).map(|b| &data.s[a][b] * &dl[b]).sum())
        .collect();
    let gamma = (0..n)
        .map(|ap| {
            let v: ScalarExpr = (0..n)
                .map(|a| (&data.gamma[a] + &sdl[a]) * jac[a][ap].clone())
                .sum();
            &jl * &v
        })
        .collect();
    let mut theta = data.theta.clone();
    for a in 0..n {
        theta = theta
            + (&data.gamma[a] * &dl[a]).scale(&Rational::from_integer(2.into()))
            + &sdl[a] * &dl[a];
    }
    BracketData::new(
        new,
        s,
        gamma,
        &jl * &theta,
        data.lambda.clone(),
        data.parity,
    )
}

/// The operator rewritten in the new chart by the chain rule: each old
/// derivative becomes `(d_b x^{a'}) d_{a'} + (d_b log J) w` and `t = J^{-1} t'`.
pub fn transform_operator(op: &OperatorPencil, ch: &CoordChange) -> Result<OperatorPencil> {
    if *op.chart() != ch.from {
        return Err(Error::ChartMismatch(
            "operator and change use different charts".into(),
        ));
    }
    let new = &ch.to;
    let n = new.dim();
    let w = DiffOp::weight_op(new);
    let d: Vec<DiffOp> = (0..n)
        .map(|b| {
            let mut e = DiffOp::mult(new, ch.log_derivative(b)).compose(&w);
            for ap in 0..n {
                if !ch.jacobian[b][ap].is_zero() {
                    e = e.add(
                        &DiffOp::mult(new, ch.jacobian[b][ap].clone())
                            .compose(&DiffOp::partial(new, ap)),
                    );
                }
            }
            e
        })
        .collect();
    let mut out = DiffOp::zero(new);
    for (key, c) in op.terms() {
        let mut t = DiffOp::t_power(new, key.lambda.clone())
            .compose(&DiffOp::mult(new, &ch.j_power(&key.lambda)? * c));
        for (b, e) in key.word.iter().enumerate() {
            for _ in 0..*e {
                t = t.compose(&d[b]);
            }
        }
        out = out.add(&t.right_mul_w(key.k));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
