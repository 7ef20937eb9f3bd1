//! Long brackets of densities and their generating operators.

use num_traits::{One, Zero};

use crate::densities::{Density, Derivation};
use crate::operators::{DiffOp, OpKey, OperatorPencil};
use crate::phasespace::{canonical_bracket, master_hamiltonian, BracketData, PhaseFn};
use crate::scalar::{signed, Chart, Parity, ScalarExpr};
use crate::{Error, Rational, Result};

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Density as a function on the extended cotangent bundle.
pub fn density_to_phase(psi: &Density) -> PhaseFn {
    psi.components().fold(PhaseFn::zero(), |acc, (w, c)| {
        acc.add(&PhaseFn::scalar(c.clone()).mul(&PhaseFn::t_power(w.clone())))
    })
}

/// The part of a phase-space function free of momenta, read as a density.
pub fn phase_to_density(f: &PhaseFn) -> Result<Density> {
    let mut out = Density::zero();
    for (k, c) in f.terms() {
        if k.momentum_degree() != 0 || k.pt_exponent() != 0 {
            return Err(Error::Inconsistency(
                "phase-space function depends on momenta".into(),
            ));
        }
        out = out.add(&Density::new(k.t_exponent().clone(), c.clone()));
    }
    Ok(out)
}

/// The closed formula for the bracket of two densities.
pub fn long_bracket_eval(data: &BracketData, psi: &Density, chi: &Density) -> Density {
    let c = &data.chart;
    let n = c.dim();
    let mut out = Density::zero();
    for (pp, psi_h) in psi.homogeneous_parts() {
        for (w1, f) in psi_h.components() {
            for (w2, g) in chi.components() {
                let mut v = ScalarExpr::zero();
                for a in 0..n {
                    let sa = c.parity(a).koszul(pp);
                    let dag = c.partial(a, g);
                    for b in 0..n {
                        if data.s[a][b].is_zero() {
                            continue;
                        }
                        v = v + signed(sa, &data.s[a][b] * &c.partial(b, f) * &dag);
                    }
                    if !data.gamma[a].is_zero() {
                        let t1 = (&c.partial(a, f) * g).scale(w2);
                        let t2 = signed(sa, (f * &dag).scale(w1));
                        v = v + &data.gamma[a] * &(t1 + t2);
                    }
                }
                v = v + (&data.theta * &(f * g)).scale(&(w1 * w2));
                out = out.add(&Density::new(w1 + w2 + &data.lambda, v));
            }
        }
    }
    out
}

/// The bracket as the double canonical bracket `((S^, psi), chi)`.
pub fn long_bracket_via_hamiltonian(
    data: &BracketData,
    psi: &Density,
    chi: &Density,
) -> Result<Density> {
    let s = master_hamiltonian(data);
    let c = &data.chart;
    let inner = canonical_bracket(c, &s, &density_to_phase(psi));
    phase_to_density(&canonical_bracket(c, &inner, &density_to_phase(chi)))
}

/// `Delta(psi chi) - Delta(psi) chi - (-1)^{psi eps} psi Delta(chi) + Delta(1) psi chi`.
pub fn generated_bracket(op: &DiffOp, psi: &Density, chi: &Density) -> Result<Density> {
    let eps = op
        .parity()
        .ok_or_else(|| Error::precondition("operator must have a parity"))?;
    let d1 = op.apply(&Density::unit());
    let dchi = op.apply(chi);
    let mut out = Density::zero();
    for (pp, psi_h) in psi.homogeneous_parts() {
        let prod = psi_h.mul(chi);
        let t = op
            .apply(&prod)
            .sub(&op.apply(&psi_h).mul(chi))
            .add(&d1.mul(&prod));
        let last = psi_h.mul(&dchi);
        out = out.add(&if pp.koszul(eps) {
            t.add(&last)
        } else {
            t.sub(&last)
        });
    }
    Ok(out)
}

/// The unique self-adjoint generating operator with `Delta(1) = 0`.
pub fn canonical_pencil(data: &BracketData) -> OperatorPencil {
    let c = &data.chart;
    let n = c.dim();
    let eps = data.parity;
    let w = DiffOp::weight_op(c);
    let id = DiffOp::identity(c);
    let mut op = DiffOp::zero(c);
    for a in 0..n {
        let da = DiffOp::partial(c, a);
        for b in 0..n {
            if !data.s[a][b].is_zero() {
                op = op.add(
                    &DiffOp::mult(c, data.s[a][b].clone())
                        .compose(&DiffOp::partial(c, b))
                        .compose(&da),
                );
            }
        }
        let ds: ScalarExpr = (0..n)
            .map(|b| {
                signed(
                    c.parity(b).is_odd() && eps.is_even(),
                    c.partial(b, &data.s[b][a]),
                )
            })
            .sum();
        op = op.add(&DiffOp::mult(c, ds).compose(&da));
        // (2w + lambda - 1) gamma^a d_a
        let lin = w
            .scale(&r(2))
            .add(&id.scale(&(&data.lambda - Rational::one())));
        op = op.add(
            &DiffOp::mult(c, data.gamma[a].clone())
                .compose(&da)
                .compose(&lin),
        );
    }
    let dg: ScalarExpr = (0..n)
        .map(|a| {
            signed(
                c.parity(a).is_odd() && eps.is_even(),
                c.partial(a, &data.gamma[a]),
            )
        })
        .sum();
    op = op.add(&DiffOp::mult(c, dg).compose(&w));
    let quad = w.compose(&w.add(&id.scale(&(&data.lambda - Rational::one()))));
    op = op.add(&DiffOp::mult(c, data.theta.clone()).compose(&quad));
    DiffOp::t_power(c, data.lambda.clone())
        .compose(&op)
        .scale(&half())
}

/// Read the bracket coefficients off a generating operator.
pub fn bracket_from_operator(op: &DiffOp) -> Result<BracketData> {
    let c = op.chart().clone();
    if let Some(o) = op.pencil_order() {
        if o > 2 {
            return Err(Error::OrderTooHigh {
                found: o as usize,
                allowed: 2,
            });
        }
    }
    let eps = op
        .parity()
        .ok_or_else(|| Error::precondition("operator must have a parity"))?;
    let lambda = op
        .weight()
        .ok_or_else(|| Error::precondition("operator must have a single weight"))?;
    let n = c.dim();
    let xs: Vec<Density> = (0..n).map(|a| Density::function(c.coordinate(a))).collect();
    let t = Density::t_power(Rational::one());
    let mut s = vec![vec![ScalarExpr::zero(); n]; n];
    let mut gamma = vec![ScalarExpr::zero(); n];
    for a in 0..n {
        for b in 0..n {
            s[a][b] = generated_bracket(op, &xs[a], &xs[b])?.component(&lambda);
        }
        gamma[a] = generated_bracket(op, &xs[a], &t)?.component(&(&lambda + Rational::one()));
    }
    let theta = generated_bracket(op, &t, &t)?.component(&(&lambda + r(2)));
    BracketData::new(&c, s, gamma, theta, lambda, eps)
}

/// `Delta'' - Delta''(1)` with `Delta'' = (Delta' + Delta'*)/2`.
pub fn symmetrize_operator(op: &DiffOp) -> Result<DiffOp> {
    if let Some(o) = op.pencil_order() {
        if o > 2 {
            return Err(Error::OrderTooHigh {
                found: o as usize,
                allowed: 2,
            });
        }
    }
    let d2 = op.add(&op.adjoint()).scale(&half());
    let at_one = d2.apply(&Density::unit());
    Ok(d2.sub(&DiffOp::mult_density(op.chart(), &at_one)))
}

/// The derivation `{psi; .}`.
pub fn grad_derivation(data: &BracketData, psi: &Density) -> Result<Derivation> {
    let (w, f) = match psi.weight() {
        Some(w) => (w.clone(), psi.component(&w)),
        None if psi.is_zero() => (Rational::zero(), ScalarExpr::zero()),
        None => {
            return Err(Error::precondition(
                "grad needs a density of a single weight",
            ))
        }
    };
    let pp = f
        .parity()
        .ok_or_else(|| Error::precondition("grad needs a homogeneous density"))?;
    let c = &data.chart;
    let n = c.dim();
    let coords = (0..n)
        .map(|a| {
            let v: ScalarExpr = (0..n)
                .map(|b| &data.s[a][b] * &c.partial(b, &f))
                .sum::<ScalarExpr>()
                + (&data.gamma[a] * &f).scale(&w);
            signed(c.parity(a).koszul(pp), v)
        })
        .collect();
    let wpart = (0..n)
        .map(|a| &data.gamma[a] * &c.partial(a, &f))
        .sum::<ScalarExpr>()
        + (&data.theta * &f).scale(&w);
    Ok(Derivation {
        chart: c.clone(),
        coords,
        wpart,
        lambda: &w + &data.lambda,
        parity: pp + data.parity,
    })
}

/// The four Jacobi residuals of an odd long bracket of weight `lambda`:
/// `(S,S) - 2 lambda S gamma`, `(S,gamma) - lambda S theta`,
/// `(S,theta) + (gamma,gamma) - lambda gamma theta`, `(gamma,theta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiResiduals {
    pub residuals: [PhaseFn; 4],
}

impl JacobiResiduals {
    pub fn all_zero(&self) -> bool {
        self.residuals.iter().all(|r| r.is_zero())
    }
}

pub fn check_jacobi_equations(data: &BracketData) -> Result<JacobiResiduals> {
    if data.parity.is_even() {
        return Err(Error::EvenBracket);
    }
    let c = &data.chart;
    let s = data.principal_hamiltonian();
    let g = data.connection_hamiltonian();
    let th = PhaseFn::scalar(data.theta.clone());
    let l = &data.lambda;
    let br = |a: &PhaseFn, b: &PhaseFn| canonical_bracket(c, a, b);
    let r0 = br(&s, &s).sub(&s.mul(&g).scale(&(l * r(2))));
    let r1 = br(&s, &g).sub(&s.mul(&th).scale(l));
    let r2 = br(&s, &th).add(&br(&g, &g)).sub(&g.mul(&th).scale(l));
    let r3 = br(&g, &th);
    Ok(JacobiResiduals {
        residuals: [r0, r1, r2, r3],
    })
}

/// `(S^, S^)` rebuilt from the residuals:
/// `t^{2 lambda} (R0 + 2u R1 + u^2 R2 + u^3 R3)` with `u = t p_t`.
pub fn residuals_as_master_square(data: &BracketData, res: &JacobiResiduals) -> PhaseFn {
    let u = PhaseFn::t().mul(&PhaseFn::p_t());
    let [r0, r1, r2, r3] = &res.residuals;
    let sum = r0
        .add(&u.mul(r1).scale(&r(2)))
        .add(&u.mul(&u).mul(r2))
        .add(&u.mul(&u).mul(&u).mul(r3));
    PhaseFn::t_power(&data.lambda * r(2)).mul(&sum)
}

/// `(S^, S^)` computed directly.
pub fn master_square(data: &BracketData) -> PhaseFn {
    let s = master_hamiltonian(data);
    canonical_bracket(&data.chart, &s, &s)
}

/// Cyclic Jacobi sum `(-1)^{ac} {{a,b},c} + (-1)^{cb} {{c,a},b} + (-1)^{ba} {{b,c},a}`
/// for homogeneous arguments.
pub fn jacobi_cyclic_sum(
    data: &BracketData,
    a: &Density,
    b: &Density,
    c: &Density,
) -> Result<Density> {
    let par = |d: &Density| {
        d.parity()
            .ok_or_else(|| Error::precondition("arguments must be homogeneous"))
    };
    let (pa, pb, pc) = (par(a)?, par(b)?, par(c)?);
    let br = |x: &Density, y: &Density| long_bracket_eval(data, x, y);
    let t1 = br(&br(a, b), c);
    let t2 = br(&br(c, a), b);
    let t3 = br(&br(b, c), a);
    let s = |neg: bool, d: Density| if neg { d.neg() } else { d };
    Ok(s(pa.koszul(pc), t1)
        .add(&s(pc.koszul(pb), t2))
        .add(&s(pb.koszul(pa), t3)))
}

/// Outcome of analysing `Delta^2` for an odd canonical pencil.
#[derive(Clone, Debug)]
pub struct DeltaSquaredReport {
    /// Pencil order of `Delta^2`; `None` when it vanishes.
    pub order: Option<u32>,
    pub square: DiffOp,
    /// Symbol of the top-order part when the order is three.
    pub third_order_symbol: Option<PhaseFn>,
    /// Whether that symbol is `(S^, S^)/2`.
    pub obstruction_matches: Option<bool>,
    /// `Delta^2` as a derivation, when it is one.
    pub derivation: Option<Derivation>,
    pub divergence: Option<Density>,
    /// The vector field on the manifold whose Lie derivative is `Delta^2`.
    pub vector_field: Option<Vec<ScalarExpr>>,
    /// Whether that vector field preserves the bracket of functions.
    pub poisson: Option<bool>,
}

impl DeltaSquaredReport {
    pub fn is_master(&self) -> bool {
        self.order.is_none()
    }

    pub fn render(&self) -> String {
        match self.order {
            None => "Delta^2 = 0".into(),
            Some(o) => format!("order {o}: {}", self.square.render()),
        }
    }
}

/// Symbol of the part of pencil order `ord`: `d_a -> p_a`, `w -> t p_t`.
pub fn symbol(op: &DiffOp, ord: u32) -> PhaseFn {
    let c = op.chart();
    let u = PhaseFn::t().mul(&PhaseFn::p_t());
    let mut out = PhaseFn::zero();
    for (k, coef) in op.terms() {
        if k.order() + k.k != ord {
            continue;
        }
        let mut m = PhaseFn::t_power(k.lambda.clone()).mul(&PhaseFn::scalar(coef.clone()));
        for (a, e) in k.word.iter().enumerate() {
            for _ in 0..*e {
                m = m.mul(&PhaseFn::momentum(c, a));
            }
        }
        for _ in 0..k.k {
            m = m.mul(&u);
        }
        out = out.add(&m);
    }
    out
}

/// Read an operator of pencil order at most one killing constants as a derivation.
pub fn operator_as_derivation(op: &DiffOp) -> Option<Derivation> {
    let c = op.chart();
    let n = c.dim();
    let lambda = op.weight()?;
    let parity = op.parity()?;
    let mut coords = vec![ScalarExpr::zero(); n];
    let mut wpart = ScalarExpr::zero();
    for (k, coef) in op.terms() {
        match (k.order(), k.k) {
            (1, 0) => {
                let a = k.word.iter().position(|e| *e == 1)?;
                coords[a] = coef.clone();
            }
            (0, 1) => wpart = coef.clone(),
            _ => return None,
        }
    }
    Some(Derivation {
        chart: c.clone(),
        coords,
        wpart,
        lambda,
        parity,
    })
}

fn unit_key(c: &Chart) -> OpKey {
    OpKey {
        lambda: Rational::zero(),
        word: vec![0; c.dim()],
        k: 0,
    }
}

/// Whether `V = V^a d_a` is a derivation of the bracket of functions given by `S`,
/// tested on coordinate monomials of degree at most two.
pub fn is_poisson_vector_field(data: &BracketData, v: &[ScalarExpr]) -> bool {
    let c = &data.chart;
    let vf = Derivation {
        chart: c.clone(),
        coords: v.to_vec(),
        wpart: ScalarExpr::zero(),
        lambda: Rational::zero(),
        parity: Parity::Even,
    };
    let fdata = BracketData {
        gamma: vec![ScalarExpr::zero(); c.dim()],
        theta: ScalarExpr::zero(),
        lambda: Rational::zero(),
        ..data.clone()
    };
    let ms = crate::probes::monomials(c, 2);
    for f in &ms {
        for g in &ms {
            let (f, g) = (Density::function(f.clone()), Density::function(g.clone()));
            let lhs = vf.apply(&long_bracket_eval(&fdata, &f, &g));
            let rhs = long_bracket_eval(&fdata, &vf.apply(&f), &g).add(&long_bracket_eval(
                &fdata,
                &f,
                &vf.apply(&g),
            ));
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

pub fn classify_delta_squared(op: &OperatorPencil) -> Result<DeltaSquaredReport> {
    if op.parity() != Some(Parity::Odd) {
        return Err(Error::precondition("Delta must be odd"));
    }
    if op.adjoint() != *op {
        return Err(Error::precondition("Delta must be self-adjoint"));
    }
    if !op.apply(&Density::unit()).is_zero() {
        return Err(Error::precondition("Delta must vanish on constants"));
    }
    let sq = op.square();
    let order = sq.pencil_order();
    let mut rep = DeltaSquaredReport {
        order,
        square: sq.clone(),
        third_order_symbol: None,
        obstruction_matches: None,
        derivation: None,
        divergence: None,
        vector_field: None,
        poisson: None,
    };
    match order {
        Some(3) => {
            let sym = symbol(&sq, 3);
            let data = bracket_from_operator(op)?;
            rep.obstruction_matches = Some(sym == master_square(&data).scale(&half()));
            rep.third_order_symbol = Some(sym);
        }
        Some(0 | 1) => {
            if sq.coefficient(&unit_key(op.chart())).is_zero() {
                if let Some(x) = operator_as_derivation(&sq) {
                    let div = x.divergence();
                    if div.is_zero() && x.lambda != Rational::one() {
                        let (free, _) = x.decompose()?;
                        let data = bracket_from_operator(op)?;
                        rep.poisson = Some(is_poisson_vector_field(&data, &free.coords));
                        rep.vector_field = Some(free.coords.clone());
                    }
                    rep.divergence = Some(div);
                    rep.derivation = Some(x);
                }
            }
        }
        _ => {}
    }
    Ok(rep)
}

/// `Delta{a,b} + {Delta a, b} + (-1)^{a}{a, Delta b}` over probe pairs, one
/// residual per pair. With `{a,b} = Delta(ab) - Delta(a) b - (-1)^a a Delta(b)`
/// this vanishes exactly when `Delta^2` is a derivation.
pub fn derivation_of_bracket_check(
    op: &DiffOp,
    data: &BracketData,
    probes: &[Density],
) -> Result<Vec<Density>> {
    let mut out = Vec::new();
    for a in probes {
        for b in probes {
            let pa = a
                .parity()
                .ok_or_else(|| Error::precondition("probes must be homogeneous"))?;
            let br = |x: &Density, y: &Density| long_bracket_eval(data, x, y);
            let lhs = op.apply(&br(a, b));
            let t1 = br(&op.apply(a), b);
            let t2 = br(a, &op.apply(b));
            let res = lhs.add(&t1).add(&if pa.is_odd() { t2.neg() } else { t2 });
            out.push(res);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn f1() -> BracketData {
        let c = Chart::even(&["x"]).unwrap();
        BracketData::new(
            &c,
            vec![vec![ScalarExpr::one()]],
            vec![c.parse("-2*x").unwrap()],
            ScalarExpr::zero(),
            q(0, 1),
            Parity::Even,
        )
        .unwrap()
    }

    fn f2(gamma_x: &str, gamma_xi: &str, theta: &str) -> BracketData {
        let c = Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap();
        let one = ScalarExpr::one();
        BracketData::new(
            &c,
            vec![
                vec![ScalarExpr::zero(), one.clone()],
                vec![one, ScalarExpr::zero()],
            ],
            vec![c.parse(gamma_x).unwrap(), c.parse(gamma_xi).unwrap()],
            c.parse(theta).unwrap(),
            q(0, 1),
            Parity::Odd,
        )
        .unwrap()
    }

    #[test]
    fn f1_canonical_pencil() {
        let d = f1();
        let c = &d.chart;
        let dx = DiffOp::partial(c, 0);
        let w = DiffOp::weight_op(c);
        // 1/2 d^2 - (2w - 1) x d - w
        let x = DiffOp::mult(c, c.parse("x").unwrap());
        let expected = dx
            .compose(&dx)
            .scale(&q(1, 2))
            .sub(
                &x.compose(&dx)
                    .compose(&w.scale(&q(2, 1)).sub(&DiffOp::identity(c))),
            )
            .sub(&w);
        let p = canonical_pencil(&d);
        assert_eq!(p, expected);
        assert_eq!(p.adjoint(), p);
        assert!(p.apply(&Density::unit()).is_zero());
        assert_eq!(bracket_from_operator(&p).unwrap(), d);
    }

    #[test]
    fn f1_bracket_values() {
        let d = f1();
        let c = &d.chart;
        let x = Density::function(c.parse("x").unwrap());
        let t = Density::t_power(q(1, 1));
        assert_eq!(long_bracket_eval(&d, &x, &x), Density::unit());
        assert_eq!(
            long_bracket_eval(&d, &x, &t),
            Density::new(q(1, 1), c.parse("-2*x").unwrap())
        );
        assert!(long_bracket_eval(&d, &t, &t).is_zero());
        let g = grad_derivation(&d, &x).unwrap();
        assert_eq!(g.coords[0], ScalarExpr::one());
        assert_eq!(g.wpart, c.parse("-2*x").unwrap());
        assert!(grad_derivation(&d, &Density::unit()).unwrap().is_zero());
    }

    #[test]
    fn hamiltonian_route_agrees() {
        for d in [f1(), f2("0", "-2*x", "0"), f2("x*xi", "x^2", "x*xi")] {
            let c = d.chart.clone();
            let fam = crate::probes::monomial_family(&c, 2, &[q(0, 1), q(1, 2), q(2, 1)]);
            for a in &fam {
                for b in &fam {
                    assert_eq!(
                        long_bracket_eval(&d, a, b),
                        long_bracket_via_hamiltonian(&d, a, b).unwrap(),
                        "{} ; {}",
                        a.render(&c),
                        b.render(&c)
                    );
                }
            }
        }
    }

    #[test]
    fn generation_and_laplacian() {
        for d in [f1(), f2("0", "-2*x", "0"), f2("x*xi", "x^2", "x*xi")] {
            let c = d.chart.clone();
            let p = canonical_pencil(&d);
            let fam = crate::probes::monomial_family(&c, 2, &[q(0, 1), q(1, 2), q(-1, 2)]);
            for a in &fam {
                for b in &fam {
                    assert_eq!(
                        generated_bracket(&p, a, b).unwrap(),
                        long_bracket_eval(&d, a, b)
                    );
                }
                for (_, h) in a.homogeneous_parts() {
                    let g = grad_derivation(&d, &h).unwrap();
                    assert_eq!(g.divergence().scale(&q(1, 2)), p.apply(&h));
                    for b in &fam {
                        assert_eq!(g.apply(b), long_bracket_eval(&d, &h, b));
                    }
                }
            }
        }
    }

    #[test]
    fn symmetrization() {
        let d = f1();
        let c = &d.chart;
        let p = canonical_pencil(&d);
        assert_eq!(symmetrize_operator(&p).unwrap(), p);
        let shifted = p.add(&DiffOp::mult(c, ScalarExpr::int(3)));
        assert_eq!(symmetrize_operator(&shifted).unwrap(), p);
    }

    #[test]
    fn even_jacobi_rejected() {
        assert!(matches!(
            check_jacobi_equations(&f1()),
            Err(Error::EvenBracket)
        ));
    }

    #[test]
    fn residuals_match_master_square() {
        for d in [
            f2("0", "-2*x", "0"),
            f2("xi", "0", "0"),
            f2("x*xi", "x^2", "x*xi"),
        ] {
            let res = check_jacobi_equations(&d).unwrap();
            assert_eq!(residuals_as_master_square(&d, &res), master_square(&d));
        }
    }
}

#[cfg(test)]
mod square_tests {
    use super::*;
    use crate::q;

    fn f2(gamma_x: &str, gamma_xi: &str, theta: &str) -> BracketData {
        let c = Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap();
        let one = ScalarExpr::one();
        BracketData::new(
            &c,
            vec![
                vec![ScalarExpr::zero(), one.clone()],
                vec![one, ScalarExpr::zero()],
            ],
            vec![c.parse(gamma_x).unwrap(), c.parse(gamma_xi).unwrap()],
            c.parse(theta).unwrap(),
            q(0, 1),
            Parity::Odd,
        )
        .unwrap()
    }

    fn f4(a: &str, sign: i64) -> BracketData {
        let c = Chart::new(&[
            ("x", Parity::Even),
            ("y", Parity::Even),
            ("xi", Parity::Odd),
            ("eta", Parity::Odd),
        ])
        .unwrap();
        let z = ScalarExpr::zero;
        let o = ScalarExpr::one;
        let s = vec![
            vec![z(), z(), o(), z()],
            vec![z(), z(), z(), o()],
            vec![o(), z(), z(), z()],
            vec![z(), o(), z(), z()],
        ];
        let a = c.parse(a).unwrap();
        let gamma: Vec<ScalarExpr> = (0..4)
            .map(|i| {
                -(0..4)
                    .map(|b| &s[i][b] * &c.partial(b, &a))
                    .sum::<ScalarExpr>()
            })
            .collect();
        let mut th = ScalarExpr::zero();
        for i in 0..4 {
            for b in 0..4 {
                th = th + &s[i][b] * &c.partial(b, &a) * &c.partial(i, &a);
            }
        }
        BracketData::new(&c, s, gamma, th.scale(&q(sign, 1)), q(0, 1), Parity::Odd).unwrap()
    }

    #[test]
    fn exact_data_square() {
        for a in ["x*y", "xi*eta"] {
            let d = f4(a, 1);
            assert!(check_jacobi_equations(&d).unwrap().all_zero());
            assert!(classify_delta_squared(&canonical_pencil(&d))
                .unwrap()
                .is_master());
        }
        let d = f4("x^2*y + x*xi*eta", 1);
        assert!(check_jacobi_equations(&d).unwrap().all_zero());
        let rep = classify_delta_squared(&canonical_pencil(&d)).unwrap();
        assert_eq!(rep.order, Some(1));
        assert_eq!(rep.poisson, Some(true));
        assert!(rep.divergence.unwrap().is_zero());
        let x = rep.derivation.unwrap();
        assert_eq!(x.wpart, d.chart.parse("x^2/2").unwrap());
        // the wrong sign of theta breaks the last residuals
        let d = f4("x^2*y + x*xi*eta", -1);
        assert!(!check_jacobi_equations(&d).unwrap().all_zero());
    }

    #[test]
    fn non_exact_connection() {
        for (gx, r1) in [("xi", "p_x^2"), ("x*xi", "(-xi)*p_x*p_xi + (x)*p_x^2")] {
            let d = f2(gx, "0", "0");
            let res = check_jacobi_equations(&d).unwrap();
            assert!(
                res.residuals[0].is_zero()
                    && res.residuals[2].is_zero()
                    && res.residuals[3].is_zero()
            );
            assert_eq!(res.residuals[1].render(&d.chart), r1);
            let rep = classify_delta_squared(&canonical_pencil(&d)).unwrap();
            assert_eq!(rep.order, Some(3));
            assert_eq!(rep.obstruction_matches, Some(true));
        }
    }

    #[test]
    fn constant_data_square_vanishes() {
        for gxi in ["0", "-2*x", "-3*x^2"] {
            let d = f2("0", gxi, "0");
            assert!(check_jacobi_equations(&d).unwrap().all_zero());
            assert!(classify_delta_squared(&canonical_pencil(&d))
                .unwrap()
                .is_master());
        }
    }

    #[test]
    fn classifier_preconditions() {
        let d = f2("0", "0", "0");
        let p = canonical_pencil(&d);
        let c = &d.chart;
        assert!(classify_delta_squared(&p.add(&DiffOp::partial(c, 1))).is_err());
        assert!(classify_delta_squared(&DiffOp::partial(c, 0)).is_err());
    }

    fn split(fam: Vec<Density>) -> Vec<Density> {
        fam.iter()
            .flat_map(|p| p.homogeneous_parts().into_iter().map(|(_, h)| h))
            .collect()
    }

    #[test]
    fn bracket_derivation_property() {
        let d = f4("x*y", 1);
        let p = canonical_pencil(&d);
        let probes = split(crate::probes::monomial_family(
            &d.chart,
            2,
            &[q(0, 1), q(1, 2)],
        ));
        assert!(derivation_of_bracket_check(&p, &d, &probes)
            .unwrap()
            .iter()
            .all(|r| r.is_zero()));
        let d = f4("x^2*y + x*xi*eta", 1);
        let p = canonical_pencil(&d);
        let probes = split(crate::probes::monomial_family(
            &d.chart,
            2,
            &[q(0, 1), q(1, 2)],
        ));
        assert!(derivation_of_bracket_check(&p, &d, &probes)
            .unwrap()
            .iter()
            .all(|r| r.is_zero()));
        let d = f2("xi", "0", "0");
        let p = canonical_pencil(&d);
        let probes = split(crate::probes::monomial_family(
            &d.chart,
            2,
            &[q(0, 1), q(1, 1)],
        ));
        assert!(derivation_of_bracket_check(&p, &d, &probes)
            .unwrap()
            .iter()
            .any(|r| !r.is_zero()));
    }

    #[test]
    fn cyclic_jacobi() {
        let d = f2("0", "-2*x", "0");
        let ps = split(crate::probes::monomial_family(
            &d.chart,
            2,
            &[q(0, 1), q(1, 1)],
        ));
        for a in &ps {
            for b in &ps {
                for c in &ps {
                    assert!(jacobi_cyclic_sum(&d, a, b, c).unwrap().is_zero());
                }
            }
        }
        let d = f2("xi", "0", "0");
        let bad = ps.iter().any(|a| {
            ps.iter().any(|b| {
                ps.iter()
                    .any(|c| !jacobi_cyclic_sum(&d, a, b, c).unwrap().is_zero())
            })
        });
        assert!(bad);
    }
}
