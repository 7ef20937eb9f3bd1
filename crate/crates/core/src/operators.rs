//! Differential operators on densities in the normal form
//! `sum t^lambda c(x) d^alpha w^k`: coefficient on the left, derivatives in
//! increasing coordinate order, powers of the weight operator on the right.
//!
//! Operators built from charts with different coordinates must not be
//! mixed; binary operations panic on a chart mismatch.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::densities::Density;
use crate::scalar::{signed, Chart, Parity, ScalarExpr};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey {
    pub lambda: Rational,
    /// Derivative exponents by coordinate index; odd ones are 0 or 1.
    pub word: Vec<u32>,
    /// Power of the weight operator.
    pub k: u32,
}

impl OpKey {
    pub fn order(&self) -> u32 {
        self.word.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct DiffOp {
    chart: Chart,
    terms: BTreeMap<OpKey, ScalarExpr>,
}

/// A pencil is an operator whose weight-operator dependence is kept
/// explicit; substituting a number for it gives one member of the family.
pub type OperatorPencil = DiffOp;

impl PartialEq for DiffOp {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.sub(other).is_zero()
    }
}

impl Eq for DiffOp {}

fn expand_word(word: &[u32]) -> Vec<usize> {
    word.iter()
        .enumerate()
        .flat_map(|(a, e)| std::iter::repeat_n(a, *e as usize))
        .collect()
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * Rational::from_integer((n - i).into()) / Rational::from_integer((i + 1).into());
    }
    r
}

fn pow_rational(x: &Rational, n: u32) -> Rational {
    num_traits::pow(x.clone(), n as usize)
}

/// Operators without weight-operator or `t` factors: word -> coefficient.
type Weyl = BTreeMap<Vec<u32>, ScalarExpr>;

fn weyl_insert(w: &mut Weyl, word: Vec<u32>, c: ScalarExpr) {
    if c.is_zero() {
        return;
    }
    let s = match w.remove(&word) {
        Some(old) => old + c,
        None => c,
    };
    if !s.is_zero() {
        w.insert(word, s);
    }
}

/// `d_a * d^word` reordered, with its sign; `None` if an odd derivative repeats.
fn insert_partial(chart: &Chart, word: &[u32], a: usize) -> Option<(Vec<u32>, bool)> {
    let odd = chart.parity(a).is_odd();
    if odd && word[a] > 0 {
        return None;
    }
    let passed = (0..a)
        .filter(|&b| chart.parity(b).is_odd() && word[b] > 0)
        .count();
    let mut w = word.to_vec();
    w[a] += 1;
    Some((w, odd && passed % 2 == 1))
}

/// `d_a o W` in normal form.
fn left_mul_partial(chart: &Chart, a: usize, w: &Weyl) -> Weyl {
    let pa = chart.parity(a);
    let mut out = Weyl::new();
    for (word, c) in w {
        weyl_insert(&mut out, word.clone(), chart.partial(a, c));
        let Some((nw, neg)) = insert_partial(chart, word, a) else {
            continue;
        };
        for (p, part) in c.homogeneous_parts() {
            weyl_insert(&mut out, nw.clone(), signed(neg ^ pa.koszul(p), part));
        }
    }
    out
}

impl DiffOp {
    pub fn zero(chart: &Chart) -> Self {
        DiffOp {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    fn unit_key(&self) -> OpKey {
        OpKey {
            lambda: Rational::zero(),
            word: vec![0; self.chart.dim()],
            k: 0,
        }
    }

    pub fn from_term(chart: &Chart, key: OpKey, c: ScalarExpr) -> Self {
        assert_eq!(
            key.word.len(),
            chart.dim(),
            "word length must match the chart"
        );
        let mut op = DiffOp::zero(chart);
        op.insert(key, c);
        op
    }

    pub fn identity(chart: &Chart) -> Self {
        DiffOp::mult(chart, ScalarExpr::one())
    }

    /// Multiplication by a function.
    pub fn mult(chart: &Chart, c: ScalarExpr) -> Self {
        let mut op = DiffOp::zero(chart);
        let k = op.unit_key();
        op.insert(k, c);
        op
    }

    /// Multiplication by a density.
    pub fn mult_density(chart: &Chart, psi: &Density) -> Self {
        let mut op = DiffOp::zero(chart);
        for (w, c) in psi.components() {
            let k = OpKey {
                lambda: w.clone(),
                ..op.unit_key()
            };
            op.insert(k, c.clone());
        }
        op
    }

    pub fn partial(chart: &Chart, a: usize) -> Self {
        let mut op = DiffOp::zero(chart);
        let mut k = op.unit_key();
        k.word[a] = 1;
        op.insert(k, ScalarExpr::one());
        op
    }

    /// The weight operator `t d/dt`.
    pub fn weight_op(chart: &Chart) -> Self {
        let mut op = DiffOp::zero(chart);
        let k = OpKey {
            k: 1,
            ..op.unit_key()
        };
        op.insert(k, ScalarExpr::one());
        op
    }

    pub fn t_power(chart: &Chart, lambda: Rational) -> Self {
        let mut op = DiffOp::zero(chart);
        let k = OpKey {
            lambda,
            ..op.unit_key()
        };
        op.insert(k, ScalarExpr::one());
        op
    }

    fn insert(&mut self, key: OpKey, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        let s = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(key, s);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &OpKey) -> ScalarExpr {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_chart(&self, other: &DiffOp) {
        assert!(
            self.chart == other.chart,
            "operators live on different charts"
        );
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        self.same_chart(other);
        let mut r = self.clone();
        for (k, c) in &other.terms {
            r.insert(k.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> DiffOp {
        let mut out = DiffOp::zero(&self.chart);
        for (k, c) in &self.terms {
            out.insert(k.clone(), c.scale(r));
        }
        out
    }

    /// Left multiplication by a function.
    pub fn left_mul(&self, f: &ScalarExpr) -> DiffOp {
        let mut out = DiffOp::zero(&self.chart);
        for (k, c) in &self.terms {
            out.insert(k.clone(), f * c);
        }
        out
    }

    /// Parity if homogeneous; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen = None;
        for (p, _) in self.homogeneous_parts() {
            if seen.is_some() {
                return None;
            }
            seen = Some(p);
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    fn word_parity(&self, word: &[u32]) -> Parity {
        let odd = (0..word.len())
            .filter(|&a| self.chart.parity(a).is_odd() && word[a] > 0)
            .count();
        Parity::from_bit(odd % 2 == 1)
    }

    pub fn homogeneous_parts(&self) -> Vec<(Parity, DiffOp)> {
        let mut even = DiffOp::zero(&self.chart);
        let mut odd = DiffOp::zero(&self.chart);
        for (k, c) in &self.terms {
            let wp = self.word_parity(&k.word);
            for (p, part) in c.homogeneous_parts() {
                match p + wp {
                    Parity::Even => even.insert(k.clone(), part),
                    Parity::Odd => odd.insert(k.clone(), part),
                }
            }
        }
        [(Parity::Even, even), (Parity::Odd, odd)]
            .into_iter()
            .filter(|(_, o)| !o.is_zero())
            .collect()
    }

    /// Weights shifted by the terms present.
    pub fn weights(&self) -> Vec<Rational> {
        let mut ws: Vec<Rational> = self.terms.keys().map(|k| k.lambda.clone()).collect();
        ws.dedup();
        ws.sort();
        ws.dedup();
        ws
    }

    /// The weight, if all terms shift weight by the same amount.
    pub fn weight(&self) -> Option<Rational> {
        let ws = self.weights();
        match ws.len() {
            0 => Some(Rational::zero()),
            1 => ws.into_iter().next(),
            _ => None,
        }
    }

    /// Order on the algebra of densities: derivatives and weight operators
    /// both count. `None` for the zero operator.
    pub fn pencil_order(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.order() + k.k).max()
    }

    /// Order on a fixed-weight slice: only derivatives count.
    pub fn slice_order(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.order()).max()
    }

    /// Highest power of the weight operator.
    pub fn w_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.k).max()
    }

    pub fn apply(&self, psi: &Density) -> Density {
        let mut out = Density::zero();
        let mut cache: BTreeMap<(Vec<u32>, Rational), ScalarExpr> = BTreeMap::new();
        for (key, c) in &self.terms {
            for (w, f) in psi.components() {
                let d = cache
                    .entry((key.word.clone(), w.clone()))
                    .or_insert_with(|| {
                        let mut g = f.clone();
                        for a in expand_word(&key.word).into_iter().rev() {
                            g = self.chart.partial(a, &g);
                        }
                        g
                    })
                    .clone();
                if d.is_zero() {
                    continue;
                }
                let v = (c * &d).scale(&pow_rational(w, key.k));
                out = out.add(&Density::new(w + &key.lambda, v));
            }
        }
        out
    }

    /// Normal-ordered product `self o other`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        self.same_chart(other);
        let chart = &self.chart;
        let mut out = DiffOp::zero(chart);
        // d^alpha1 o c2 d^alpha2 depends only on alpha1 and the second term
        let mut cache: BTreeMap<(Vec<u32>, OpKey), Weyl> = BTreeMap::new();
        for (k2, c2) in &other.terms {
            for (k1, c1) in &self.terms {
                let w = cache
                    .entry((k1.word.clone(), k2.clone()))
                    .or_insert_with(|| {
                        let mut w = Weyl::new();
                        weyl_insert(&mut w, k2.word.clone(), c2.clone());
                        for a in expand_word(&k1.word).into_iter().rev() {
                            w = left_mul_partial(chart, a, &w);
                        }
                        w
                    })
                    .clone();
                let lambda = &k1.lambda + &k2.lambda;
                // w^k1 t^lambda2 = t^lambda2 (w + lambda2)^k1
                for (word, c) in w {
                    let cc = c1 * &c;
                    for j in 0..=k1.k {
                        let f = binomial(k1.k, j) * pow_rational(&k2.lambda, k1.k - j);
                        if f.is_zero() {
                            continue;
                        }
                        out.insert(
                            OpKey {
                                lambda: lambda.clone(),
                                word: word.clone(),
                                k: j + k2.k,
                            },
                            cc.scale(&f),
                        );
                    }
                }
            }
        }
        out
    }

    /// Graded commutator `AB - (-1)^{AB} BA`.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero(&self.chart);
        for (p, a) in self.homogeneous_parts() {
            for (q, b) in other.homogeneous_parts() {
                let ab = a.compose(&b);
                let ba = b.compose(&a);
                out = out.add(&if p.koszul(q) {
                    ab.add(&ba)
                } else {
                    ab.sub(&ba)
                });
            }
        }
        out
    }

    /// `self o self`.
    pub fn square(&self) -> DiffOp {
        self.compose(self)
    }

    /// Formal adjoint for the invariant pairing: functions and `t` are
    /// self-adjoint, `d_a* = -d_a`, `w* = 1 - w`, and products reverse
    /// with the Koszul sign.
    pub fn adjoint(&self) -> DiffOp {
        let chart = &self.chart;
        let wstar = DiffOp::identity(chart).sub(&DiffOp::weight_op(chart));
        let mut out = DiffOp::zero(chart);
        for (key, c) in &self.terms {
            let word = expand_word(&key.word);
            let odd_derivs = word.iter().filter(|&&a| chart.parity(a).is_odd()).count();
            let mut tail = DiffOp::identity(chart);
            for _ in 0..key.k {
                tail = tail.compose(&wstar);
            }
            for &a in word.iter().rev() {
                tail = tail.compose(&DiffOp::partial(chart, a).neg());
            }
            let shift = DiffOp::t_power(chart, key.lambda.clone());
            for (p, part) in c.homogeneous_parts() {
                let m = odd_derivs + p.bit() as usize;
                let neg = (m * m.saturating_sub(1) / 2) % 2 == 1;
                let t = tail.compose(&DiffOp::mult(chart, part)).compose(&shift);
                out = out.add(&if neg { t.neg() } else { t });
            }
        }
        out
    }

    /// Vector `V` with `<D psi, chi> - (-1)^{D psi} <psi, D* chi> = sum_a d_a V^a`
    /// at the level of weight-one integrands.
    pub fn adjoint_witness(&self, psi: &Density, chi: &Density) -> Vec<Density> {
        let chart = &self.chart;
        let n = chart.dim();
        let mut total = vec![Density::zero(); n];
        for (key, c) in &self.terms {
            for (p, part) in c.homogeneous_parts() {
                // generator factors, leftmost first
                let mut gens: Vec<(DiffOp, Parity, Option<usize>)> = Vec::new();
                gens.push((
                    DiffOp::t_power(chart, key.lambda.clone()),
                    Parity::Even,
                    None,
                ));
                gens.push((DiffOp::mult(chart, part), p, None));
                for a in expand_word(&key.word) {
                    gens.push((DiffOp::partial(chart, a), chart.parity(a), Some(a)));
                }
                for _ in 0..key.k {
                    gens.push((DiffOp::weight_op(chart), Parity::Even, None));
                }
                for (pp, psi_h) in psi.homogeneous_parts() {
                    let w = witness_chain(chart, &gens, &psi_h, pp, chi);
                    for a in 0..n {
                        total[a] = total[a].add(&w[a]);
                    }
                }
            }
        }
        total
    }

    /// Substitute the number `w0` for the weight operator.
    pub fn specialize(&self, w0: &Rational) -> DiffOp {
        let mut out = DiffOp::zero(&self.chart);
        for (k, c) in &self.terms {
            let f = pow_rational(w0, k.k);
            out.insert(OpKey { k: 0, ..k.clone() }, c.scale(&f));
        }
        out
    }

    /// Components by power of the weight operator: `self = sum_k P_k w^k`.
    pub fn w_components(&self) -> BTreeMap<u32, DiffOp> {
        let mut out: BTreeMap<u32, DiffOp> = BTreeMap::new();
        for (k, c) in &self.terms {
            out.entry(k.k)
                .or_insert_with(|| DiffOp::zero(&self.chart))
                .insert(OpKey { k: 0, ..k.clone() }, c.clone());
        }
        out
    }

    /// Multiply each term on the right by `w^j`.
    pub fn right_mul_w(&self, j: u32) -> DiffOp {
        let mut out = DiffOp::zero(&self.chart);
        for (k, c) in &self.terms {
            out.insert(
                OpKey {
                    k: k.k + j,
                    ..k.clone()
                },
                c.clone(),
            );
        }
        out
    }

    /// `e^{-cA} o self o e^{cA}` for an even function `A`, expanded as
    /// `sum_k c^k/k! ad_A^k(self)` with `ad_A(D) = [D, A]`.
    pub fn conjugate_exp(&self, a: &ScalarExpr, c: &Rational) -> Result<DiffOp> {
        if !a.is_zero() && a.parity() != Some(Parity::Even) {
            return Err(Error::ParityMismatch(
                "conjugation needs an even function".into(),
            ));
        }
        let ma = DiffOp::mult(&self.chart, a.clone());
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 0u32;
        loop {
            term = term.commutator(&ma);
            k += 1;
            if term.is_zero() {
                break;
            }
            let f = pow_rational(c, k) / Rational::from_integer(factorial(k).into());
            out = out.add(&term.scale(&f));
            if k > 64 {
                return Err(Error::Inconsistency(
                    "conjugation series does not terminate".into(),
                ));
            }
        }
        Ok(out)
    }

    /// Least `n` such that every `(n+1)`-fold commutator with multiplication
    /// by the probes vanishes; `None` for the zero operator.
    pub fn grothendieck_order(&self, probes: &[Density]) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let mults: Vec<DiffOp> = probes
            .iter()
            .map(|p| DiffOp::mult_density(&self.chart, p))
            .collect();
        let mut level: Vec<(DiffOp, usize)> = vec![(self.clone(), 0)];
        let mut n = 0u32;
        loop {
            let mut next: Vec<(DiffOp, usize)> = Vec::new();
            for (d, start) in &level {
                // commutators with multiplications commute up to sign, so
                // nondecreasing probe sequences suffice
                for (j, m) in mults.iter().enumerate().skip(*start) {
                    let c = d.commutator(m);
                    if !c.is_zero() && !next.iter().any(|(o, s)| *s == j && *o == c) {
                        next.push((c, j));
                    }
                }
            }
            if next.is_empty() {
                return Some(n);
            }
            n += 1;
            level = next;
        }
    }

    /// Grothendieck order on the default probes, checked against the
    /// syntactic pencil order.
    pub fn checked_order(&self) -> Result<Option<u32>> {
        let g = self.grothendieck_order(&crate::probes::default_probes(&self.chart));
        let s = self.pencil_order();
        if g != s {
            return Err(Error::Inconsistency(format!(
                "commutator order {g:?} disagrees with syntactic order {s:?}"
            )));
        }
        Ok(g)
    }

    /// `[[...[self, a_1], ...], a_k](1)`.
    pub fn polarization(&self, args: &[Density]) -> Density {
        let mut d = self.clone();
        for a in args {
            d = d.commutator(&DiffOp::mult_density(&self.chart, a));
        }
        d.apply(&Density::unit())
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut factors = Vec::new();
            if !k.lambda.is_zero() {
                factors.push(format!("t^({})", k.lambda));
            }
            let coef = self.chart.render(c);
            if !c.is_one() || (k.order() == 0 && k.k == 0) {
                factors.push(format!("({coef})"));
            }
            for (a, e) in k.word.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("d_{}", self.chart.name(a))),
                    _ => factors.push(format!("d_{}^{e}", self.chart.name(a))),
                }
            }
            match k.k {
                0 => {}
                1 => factors.push("w".into()),
                e => factors.push(format!("w^{e}")),
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

fn factorial(k: u32) -> u64 {
    (1..=k as u64).product()
}

/// Witness for a product of generators `G_1 ... G_m` applied to a
/// homogeneous `psi`.
fn witness_chain(
    chart: &Chart,
    gens: &[(DiffOp, Parity, Option<usize>)],
    psi: &Density,
    psi_parity: Parity,
    chi: &Density,
) -> Vec<Density> {
    let n = chart.dim();
    let mut out = vec![Density::zero(); n];
    if gens.is_empty() {
        return out;
    }
    let (g, gp, slot) = &gens[0];
    let rest = &gens[1..];
    let r_op = rest
        .iter()
        .fold(DiffOp::identity(chart), |acc, (o, _, _)| acc.compose(o));
    let r_par = rest.iter().fold(Parity::Even, |acc, (_, p, _)| acc + *p);
    // W(G; R psi, chi): nonzero only for a derivative
    if let Some(a) = slot {
        let rpsi = r_op.apply(psi);
        let one = Rational::one();
        out[*a] = Density::new(one.clone(), rpsi.mul(chi).component(&one));
    }
    // (-1)^{G (R + psi)} W(R; psi, G* chi)
    let gchi = g.adjoint().apply(chi);
    let neg = gp.koszul(r_par + psi_parity);
    let inner = witness_chain(chart, rest, psi, psi_parity, &gchi);
    for a in 0..n {
        out[a] = out[a].add(&if neg {
            inner[a].neg()
        } else {
            inner[a].clone()
        });
    }
    out
}

pub fn apply(d: &DiffOp, psi: &Density) -> Density {
    d.apply(psi)
}

pub fn compose(a: &DiffOp, b: &DiffOp) -> DiffOp {
    a.compose(b)
}

pub fn commutator(a: &DiffOp, b: &DiffOp) -> DiffOp {
    a.commutator(b)
}

pub fn adjoint(d: &DiffOp) -> DiffOp {
    d.adjoint()
}

pub fn grothendieck_order(d: &DiffOp, probes: &[Density]) -> Option<u32> {
    d.grothendieck_order(probes)
}

pub fn polarization_brackets(d: &DiffOp, k: usize, args: &[Density]) -> Result<Density> {
    if k == 0 || args.len() != k {
        return Err(Error::precondition("polarization needs k >= 1 arguments"));
    }
    Ok(d.polarization(args))
}

pub fn specialize(d: &OperatorPencil, w0: &Rational) -> DiffOp {
    d.specialize(w0)
}
