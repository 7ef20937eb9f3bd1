//! Functions on the extended cotangent bundle, polynomial in the momenta
//! `p_a`, in `t` and in its conjugate `p_t`, with the canonical bracket.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::{merge_sign, signed, Chart, Matrix, Parity, ScalarExpr};
use crate::{Error, Rational, Result};

/// Monomial `p^beta t^alpha p_t^k`, momenta written in increasing
/// coordinate order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseKey {
    /// Exponents of even momenta by coordinate index, trailing zeros trimmed.
    even: Vec<u32>,
    /// Odd momenta present, as a bit mask over coordinate indices.
    odd: u64,
    t: Rational,
    pt: u32,
}

impl PhaseKey {
    fn one() -> Self {
        PhaseKey {
            even: Vec::new(),
            odd: 0,
            t: Rational::zero(),
            pt: 0,
        }
    }

    fn parity(&self) -> Parity {
        Parity::from_bit(self.odd.count_ones() % 2 == 1)
    }

    fn even_exp(&self, a: usize) -> u32 {
        self.even.get(a).copied().unwrap_or(0)
    }

    fn with_even(&self, a: usize, e: u32) -> PhaseKey {
        let mut k = self.clone();
        if k.even.len() <= a {
            k.even.resize(a + 1, 0);
        }
        k.even[a] = e;
        while k.even.last() == Some(&0) {
            k.even.pop();
        }
        k
    }

    /// Product key and whether reordering odd momenta costs a sign.
    fn mul(&self, other: &PhaseKey) -> Option<(PhaseKey, bool)> {
        let neg = merge_sign(self.odd, other.odd)?;
        let n = self.even.len().max(other.even.len());
        let even = (0..n)
            .map(|i| self.even_exp(i) + other.even_exp(i))
            .collect();
        Some((
            PhaseKey {
                even,
                odd: self.odd | other.odd,
                t: &self.t + &other.t,
                pt: self.pt + other.pt,
            },
            neg,
        ))
    }

    /// Total momentum degree in the chart momenta.
    pub fn momentum_degree(&self) -> u32 {
        self.even.iter().sum::<u32>() + self.odd.count_ones()
    }

    pub fn t_exponent(&self) -> &Rational {
        &self.t
    }

    pub fn pt_exponent(&self) -> u32 {
        self.pt
    }

    /// Exponent of `p_a`.
    pub fn momentum_exponent(&self, a: usize) -> u32 {
        if a < 64 && self.odd & (1u64 << a) != 0 {
            1
        } else {
            self.even_exp(a)
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PhaseFn {
    terms: BTreeMap<PhaseKey, ScalarExpr>,
}

impl PartialEq for PhaseFn {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl Eq for PhaseFn {}

impl PhaseFn {
    pub fn zero() -> Self {
        PhaseFn::default()
    }

    pub fn scalar(c: ScalarExpr) -> Self {
        let mut f = PhaseFn::zero();
        f.insert(PhaseKey::one(), c);
        f
    }

    pub fn one() -> Self {
        PhaseFn::scalar(ScalarExpr::one())
    }

    /// The momentum conjugate to coordinate `a`.
    pub fn momentum(chart: &Chart, a: usize) -> Self {
        let key = match chart.parity(a) {
            Parity::Even => PhaseKey::one().with_even(a, 1),
            Parity::Odd => PhaseKey {
                odd: 1u64 << a,
                ..PhaseKey::one()
            },
        };
        let mut f = PhaseFn::zero();
        f.insert(key, ScalarExpr::one());
        f
    }

    pub fn t_power(alpha: Rational) -> Self {
        let mut f = PhaseFn::zero();
        f.insert(
            PhaseKey {
                t: alpha,
                ..PhaseKey::one()
            },
            ScalarExpr::one(),
        );
        f
    }

    pub fn t() -> Self {
        PhaseFn::t_power(Rational::one())
    }

    pub fn p_t() -> Self {
        let mut f = PhaseFn::zero();
        f.insert(
            PhaseKey {
                pt: 1,
                ..PhaseKey::one()
            },
            ScalarExpr::one(),
        );
        f
    }

    fn insert(&mut self, k: PhaseKey, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PhaseKey, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PhaseFn) -> PhaseFn {
        let mut r = self.clone();
        for (k, c) in &other.terms {
            r.insert(k.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &PhaseFn) -> PhaseFn {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PhaseFn {
        PhaseFn {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> PhaseFn {
        if r.is_zero() {
            return PhaseFn::zero();
        }
        PhaseFn {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.scale(r)))
                .collect(),
        }
    }

    /// Graded product.
    pub fn mul(&self, other: &PhaseFn) -> PhaseFn {
        let mut out = PhaseFn::zero();
        for (k1, c1) in &self.terms {
            let k1_odd = k1.parity().is_odd();
            for (k2, c2) in &other.terms {
                let Some((k, neg)) = k1.mul(k2) else { continue };
                for (p, part) in c2.homogeneous_parts() {
                    // move c2 left past the momenta of the first factor
                    let s = neg ^ (k1_odd && p.is_odd());
                    out.insert(k.clone(), signed(s, c1 * &part));
                }
            }
        }
        out
    }

    /// Parity if homogeneous; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        for (k, c) in &self.terms {
            for (p, _) in c.homogeneous_parts() {
                let q = p + k.parity();
                match seen {
                    None => seen = Some(q),
                    Some(s) if s != q => return None,
                    _ => {}
                }
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn homogeneous_parts(&self) -> Vec<(Parity, PhaseFn)> {
        let mut even = PhaseFn::zero();
        let mut odd = PhaseFn::zero();
        for (k, c) in &self.terms {
            for (p, part) in c.homogeneous_parts() {
                match p + k.parity() {
                    Parity::Even => even.insert(k.clone(), part),
                    Parity::Odd => odd.insert(k.clone(), part),
                }
            }
        }
        [(Parity::Even, even), (Parity::Odd, odd)]
            .into_iter()
            .filter(|(_, f)| !f.is_zero())
            .collect()
    }

    /// Left derivative along coordinate `a`.
    pub fn d_x(&self, chart: &Chart, a: usize) -> PhaseFn {
        let mut out = PhaseFn::zero();
        for (k, c) in &self.terms {
            out.insert(k.clone(), chart.partial(a, c));
        }
        out
    }

    /// Left derivative along the momentum `p_a`.
    pub fn d_p(&self, chart: &Chart, a: usize) -> PhaseFn {
        let pa = chart.parity(a);
        let mut out = PhaseFn::zero();
        for (k, c) in &self.terms {
            let (nk, factor, neg) = match pa {
                Parity::Even => {
                    let e = k.even_exp(a);
                    if e == 0 {
                        continue;
                    }
                    (k.with_even(a, e - 1), e, false)
                }
                Parity::Odd => {
                    let bit = 1u64 << a;
                    if k.odd & bit == 0 {
                        continue;
                    }
                    let before = (k.odd & (bit - 1)).count_ones() % 2 == 1;
                    (
                        PhaseKey {
                            odd: k.odd & !bit,
                            ..k.clone()
                        },
                        1,
                        before,
                    )
                }
            };
            for (p, part) in c.homogeneous_parts() {
                let s = neg ^ (pa.is_odd() && p.is_odd());
                out.insert(
                    nk.clone(),
                    signed(s, part.scale(&Rational::from_integer(factor.into()))),
                );
            }
        }
        out
    }

    pub fn d_t(&self) -> PhaseFn {
        let mut out = PhaseFn::zero();
        for (k, c) in &self.terms {
            if k.t.is_zero() {
                continue;
            }
            let nk = PhaseKey {
                t: &k.t - Rational::one(),
                ..k.clone()
            };
            out.insert(nk, c.scale(&k.t));
        }
        out
    }

    pub fn d_pt(&self) -> PhaseFn {
        let mut out = PhaseFn::zero();
        for (k, c) in &self.terms {
            if k.pt == 0 {
                continue;
            }
            let nk = PhaseKey {
                pt: k.pt - 1,
                ..k.clone()
            };
            out.insert(nk, c.scale(&Rational::from_integer(k.pt.into())));
        }
        out
    }

    /// Coefficient of a given monomial in `t p_t`: the part with
    /// `t`-exponent `base + k` and `p_t`-exponent `k`, with both removed.
    pub fn t_pt_coefficient(&self, base: &Rational, k: u32) -> PhaseFn {
        let target = base + Rational::from_integer(k.into());
        let mut out = PhaseFn::zero();
        for (key, c) in &self.terms {
            if key.pt == k && key.t == target {
                out.insert(
                    PhaseKey {
                        t: Rational::zero(),
                        pt: 0,
                        ..key.clone()
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    /// Coefficient of the momentum monomial `p_{a_1} ... p_{a_k}` (indices
    /// in increasing order, repeats allowed for even ones) in the part free
    /// of `t` and `p_t`.
    pub fn momentum_coefficient(&self, chart: &Chart, indices: &[usize]) -> ScalarExpr {
        let mut key = PhaseKey::one();
        for &a in indices {
            match chart.parity(a) {
                Parity::Even => key = key.with_even(a, key.even_exp(a) + 1),
                Parity::Odd => key.odd |= 1u64 << a,
            }
        }
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    /// Apply `f` to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> PhaseFn {
        let mut out = PhaseFn::zero();
        for (k, c) in &self.terms {
            out.insert(k.clone(), f(c));
        }
        out
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut factors = Vec::new();
            for a in 0..chart.dim() {
                let e = k.momentum_exponent(a);
                let p = format!("p_{}", chart.name(a));
                match e {
                    0 => {}
                    1 => factors.push(p),
                    _ => factors.push(format!("{p}^{e}")),
                }
            }
            if !k.t.is_zero() {
                if k.t.is_one() {
                    factors.push("t".into());
                } else {
                    factors.push(format!("t^({})", k.t));
                }
            }
            match k.pt {
                0 => {}
                1 => factors.push("p_t".into()),
                e => factors.push(format!("p_t^{e}")),
            }
            let coef = chart.render(c);
            let s = if factors.is_empty() {
                coef
            } else if c.is_one() {
                factors.join("*")
            } else {
                format!("({coef})*{}", factors.join("*"))
            };
            parts.push(s);
        }
        parts.join(" + ")
    }
}

/// The canonical even bracket on the extended cotangent bundle, normalized
/// by `(p_a, x^b) = delta` and `(p_t, t) = 1`.
pub fn canonical_bracket(chart: &Chart, f: &PhaseFn, g: &PhaseFn) -> PhaseFn {
    let mut out = PhaseFn::zero();
    for (fp, fh) in f.homogeneous_parts() {
        for a in 0..chart.dim() {
            let pa = chart.parity(a);
            let s1 = pa.is_odd() && !fp.is_odd();
            let s2 = pa.is_odd() && fp.is_odd();
            let t1 = fh.d_p(chart, a).mul(&g.d_x(chart, a));
            let t2 = fh.d_x(chart, a).mul(&g.d_p(chart, a));
            out = out.add(&if s1 { t1.neg() } else { t1 });
            out = out.sub(&if s2 { t2.neg() } else { t2 });
        }
        out = out.add(&fh.d_pt().mul(&g.d_t()));
        out = out.sub(&fh.d_t().mul(&g.d_pt()));
    }
    out
}

/// `D F = (S, F)`.
pub fn apply_d(chart: &Chart, s: &PhaseFn, f: &PhaseFn) -> PhaseFn {
    canonical_bracket(chart, s, f)
}

/// Coefficients of a long bracket: principal tensor `S^{ab}`, upper
/// connection `gamma^a`, scalar `theta`, weight and parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketData {
    pub chart: Chart,
    pub s: Matrix,
    pub gamma: Vec<ScalarExpr>,
    pub theta: ScalarExpr,
    pub lambda: Rational,
    pub parity: Parity,
}

impl BracketData {
    pub fn new(
        chart: &Chart,
        s: Matrix,
        gamma: Vec<ScalarExpr>,
        theta: ScalarExpr,
        lambda: Rational,
        parity: Parity,
    ) -> Result<BracketData> {
        let d = BracketData {
            chart: chart.clone(),
            s,
            gamma,
            theta,
            lambda,
            parity,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn zero(chart: &Chart, lambda: Rational, parity: Parity) -> BracketData {
        let n = chart.dim();
        BracketData {
            chart: chart.clone(),
            s: vec![vec![ScalarExpr::zero(); n]; n],
            gamma: vec![ScalarExpr::zero(); n],
            theta: ScalarExpr::zero(),
            lambda,
            parity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.chart;
        let n = c.dim();
        if self.s.len() != n || self.s.iter().any(|r| r.len() != n) || self.gamma.len() != n {
            return Err(Error::InvalidChart(format!(
                "bracket data must be sized for {n} coordinates"
            )));
        }
        let expect = |e: &ScalarExpr, p: Parity, what: String| -> Result<()> {
            c.check(e)?;
            if e.is_zero() || e.parity() == Some(p) {
                Ok(())
            } else {
                Err(Error::ParityMismatch(format!("{what} must be {p}")))
            }
        };
        for a in 0..n {
            for b in 0..n {
                let p = self.parity + c.parity(a) + c.parity(b);
                expect(
                    &self.s[a][b],
                    p,
                    format!("S^{{{}{}}}", c.name(a), c.name(b)),
                )?;
                let sym = signed(c.parity(a).koszul(c.parity(b)), self.s[b][a].clone());
                if self.s[a][b] != sym {
                    return Err(Error::precondition(format!(
                        "S is not graded symmetric in ({}, {})",
                        c.name(a),
                        c.name(b)
                    )));
                }
            }
            expect(
                &self.gamma[a],
                self.parity + c.parity(a),
                format!("gamma^{}", c.name(a)),
            )?;
        }
        expect(&self.theta, self.parity, "theta".into())
    }

    /// `S = 1/2 S^{ab} p_b p_a` on the cotangent bundle of the chart.
    pub fn principal_hamiltonian(&self) -> PhaseFn {
        let c = &self.chart;
        let half = Rational::new(1.into(), 2.into());
        let mut out = PhaseFn::zero();
        for a in 0..c.dim() {
            for b in 0..c.dim() {
                if self.s[a][b].is_zero() {
                    continue;
                }
                let pb = PhaseFn::momentum(c, b);
                let pa = PhaseFn::momentum(c, a);
                out = out.add(
                    &PhaseFn::scalar(self.s[a][b].clone())
                        .mul(&pb)
                        .mul(&pa)
                        .scale(&half),
                );
            }
        }
        out
    }

    /// `gamma^a p_a`.
    pub fn connection_hamiltonian(&self) -> PhaseFn {
        let c = &self.chart;
        (0..c.dim()).fold(PhaseFn::zero(), |acc, a| {
            acc.add(&PhaseFn::scalar(self.gamma[a].clone()).mul(&PhaseFn::momentum(c, a)))
        })
    }
}

/// `t^lambda * 1/2 (S^{ab} p_b p_a + 2 t gamma^a p_a p_t + t^2 theta p_t^2)`.
pub fn master_hamiltonian(data: &BracketData) -> PhaseFn {
    let u = PhaseFn::t().mul(&PhaseFn::p_t());
    let half = Rational::new(1.into(), 2.into());
    let body = data
        .principal_hamiltonian()
        .add(&u.mul(&data.connection_hamiltonian()))
        .add(
            &u.mul(&u)
                .mul(&PhaseFn::scalar(data.theta.clone()))
                .scale(&half),
        );
    PhaseFn::t_power(data.lambda.clone()).mul(&body)
}
