#![allow(dead_code)]

use densalg::phasespace::BracketData;
use densalg::scalar::Matrix;
use densalg::{q, Chart, Parity, ScalarExpr};
use rand::rngs::StdRng;
use rand::Rng;

pub fn line() -> Chart {
    Chart::even(&["x"]).unwrap()
}

pub fn f2_chart() -> Chart {
    Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap()
}

pub fn f4_chart() -> Chart {
    Chart::new(&[
        ("x", Parity::Even),
        ("y", Parity::Even),
        ("xi", Parity::Odd),
        ("eta", Parity::Odd),
    ])
    .unwrap()
}

/// `S^{x_i xi_i} = S^{xi_i x_i} = 1`.
pub fn darboux(c: &Chart) -> Matrix {
    let n = c.dim();
    let h = n / 2;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if (i + h) % n == j {
                        ScalarExpr::one()
                    } else {
                        ScalarExpr::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Even line, `S = 1`, `gamma = -2x`.
pub fn f1() -> BracketData {
    let c = line();
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

/// Odd symplectic plane with trivial connection.
pub fn f2() -> BracketData {
    let c = f2_chart();
    BracketData::new(
        &c,
        darboux(&c),
        vec![ScalarExpr::zero(); 2],
        ScalarExpr::zero(),
        q(0, 1),
        Parity::Odd,
    )
    .unwrap()
}

/// `gamma^a = -S^{ab} d_b A`, `theta = S^{ab} d_b A d_a A`, computed here
/// without the engine's volume-form code.
pub fn exact_data(c: &Chart, s: Matrix, a: &str, eps: Parity) -> BracketData {
    let a = c.parse(a).unwrap();
    let n = c.dim();
    let gamma: Vec<ScalarExpr> = (0..n)
        .map(|i| {
            -(0..n)
                .map(|b| &s[i][b] * &c.partial(b, &a))
                .sum::<ScalarExpr>()
        })
        .collect();
    let mut th = ScalarExpr::zero();
    for i in 0..n {
        for b in 0..n {
            th = th + &s[i][b] * &c.partial(b, &a) * &c.partial(i, &a);
        }
    }
    BracketData::new(c, s, gamma, th, q(0, 1), eps).unwrap()
}

/// A polynomial of degree at most two with small integer coefficients,
/// of the given parity.
pub fn random_expr(rng: &mut StdRng, c: &Chart, p: Parity) -> ScalarExpr {
    densalg::probes::monomials(c, 2)
        .into_iter()
        .filter(|m| m.parity() == Some(p))
        .map(|m| m.scale(&q(rng.gen_range(-3..=3), 1)))
        .sum()
}

use proptest::prelude::*;

/// Homogeneous expressions of parity `p`: a sum of up to four monomials of
/// degree at most two, optionally divided by `1 + x^2`.
pub fn expr_of(c: Chart, p: Parity) -> BoxedStrategy<ScalarExpr> {
    let monos: Vec<ScalarExpr> = densalg::probes::monomials(&c, 2)
        .into_iter()
        .filter(|m| m.parity() == Some(p))
        .collect();
    let n = monos.len();
    let den = c.parse(&format!("1 + {}^2", c.name(0))).unwrap();
    (
        prop::collection::vec((0..n, -4i64..=4), 0..4),
        any::<bool>(),
    )
        .prop_map(move |(terms, divide)| {
            let e: ScalarExpr = terms.iter().map(|(i, k)| monos[*i].scale(&q(*k, 1))).sum();
            if divide {
                e.div_ref(&den).unwrap()
            } else {
                e
            }
        })
        .boxed()
}

pub fn poly_of(c: Chart, p: Parity) -> BoxedStrategy<ScalarExpr> {
    let monos: Vec<ScalarExpr> = densalg::probes::monomials(&c, 2)
        .into_iter()
        .filter(|m| m.parity() == Some(p))
        .collect();
    let n = monos.len();
    prop::collection::vec((0..n, -4i64..=4), 0..4)
        .prop_map(move |terms| terms.iter().map(|(i, k)| monos[*i].scale(&q(*k, 1))).sum())
        .boxed()
}

pub fn parity() -> impl Strategy<Value = Parity> {
    any::<bool>().prop_map(Parity::from_bit)
}

/// A pair of a parity and an expression of that parity.
pub fn homogeneous(c: Chart) -> BoxedStrategy<(Parity, ScalarExpr)> {
    parity()
        .prop_flat_map(move |p| expr_of(c.clone(), p).prop_map(move |e| (p, e)))
        .boxed()
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
