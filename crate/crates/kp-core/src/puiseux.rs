//! Truncated Laurent-Puiseux series over `PolyN`.
//!
//! Everything is written in `x = λ^(-1/2)`, so `λ^s` is `x^(-2s)` and all
//! exponents are integers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{KpError, Result};
use crate::exactmath::{rat, rat_int, BigRat, PolyN};

/// Single-variable series known exactly for exponents `<= max_exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuiseuxSeries {
    coeffs: BTreeMap<i64, PolyN>,
    min_exp: i64,
    max_exp: i64,
}

impl PuiseuxSeries {
    /// Builds a series valid to `max_exp`; terms above it and zero terms are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, PolyN)>, max_exp: i64) -> Self {
        let mut coeffs: BTreeMap<i64, PolyN> = BTreeMap::new();
        for (e, c) in terms {
            if e > max_exp || c.is_zero() {
                continue;
            }
            let slot = coeffs.entry(e).or_default();
            *slot += &c;
            if slot.is_zero() {
                coeffs.remove(&e);
            }
        }
        let min_exp = coeffs.keys().next().copied().unwrap_or(max_exp + 1);
        PuiseuxSeries { coeffs, min_exp, max_exp }
    }

    pub fn zero(max_exp: i64) -> Self {
        Self::from_terms([], max_exp)
    }

    pub fn one(max_exp: i64) -> Self {
        Self::monomial(PolyN::one(), 0, max_exp)
    }

    pub fn monomial(c: PolyN, e: i64, max_exp: i64) -> Self {
        Self::from_terms([(e, c)], max_exp)
    }

    /// `x` itself.
    pub fn x(max_exp: i64) -> Self {
        Self::monomial(PolyN::one(), 1, max_exp)
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn max_exp(&self) -> i64 {
        self.max_exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &PolyN)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    /// Coefficient of `x^e`, or `NotComputed` past the validity order.
    pub fn coeff(&self, e: i64) -> Result<PolyN> {
        if e > self.max_exp {
            return Err(KpError::NotComputed(format!(
                "x^{e} beyond validity order {}",
                self.max_exp
            )));
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_default())
    }

    pub fn truncate(&self, max_exp: i64) -> Self {
        Self::from_terms(
            self.coeffs.iter().map(|(e, c)| (*e, c.clone())),
            max_exp.min(self.max_exp),
        )
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (*e, -c)), self.max_exp)
    }

    pub fn scale(&self, s: &PolyN) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (*e, c * s)), self.max_exp)
    }

    /// Multiplies by `x^k`, shifting the validity order with it.
    pub fn shift(&self, k: i64) -> Self {
        Self::from_terms(
            self.coeffs.iter().map(|(e, c)| (e + k, c.clone())),
            self.max_exp + k,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let max = self.max_exp.min(other.max_exp);
        Self::from_terms(
            self.terms()
                .chain(other.terms())
                .map(|(e, c)| (e, c.clone())),
            max,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let max = (self.max_exp + other.min_exp).min(other.max_exp + self.min_exp);
        let mut acc: BTreeMap<i64, PolyN> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e = ea + eb;
                if e > max {
                    break;
                }
                acc.entry(e).or_default().add_mul_assign(ca, cb);
            }
        }
        Self::from_terms(acc, max)
    }

    /// Leading coefficient as an invertible constant together with the valuation.
    fn unit_lead(&self) -> Result<(i64, BigRat)> {
        let (&v, c) = self
            .coeffs
            .iter()
            .next()
            .ok_or_else(|| KpError::NonUnitLeadingTerm("zero series".into()))?;
        match c.as_constant() {
            Some(k) if !k.is_zero() => Ok((v, k)),
            _ => Err(KpError::NonUnitLeadingTerm(c.to_string())),
        }
    }

    /// Multiplicative inverse; the leading coefficient must be a nonzero constant.
    pub fn inverse(&self) -> Result<Self> {
        let (v, lead) = self.unit_lead()?;
        let inv_lead = lead.recip();
        // self = lead x^v (1 + u), u known up to x^(max - v)
        let order = self.max_exp - v;
        let u: Vec<PolyN> = (0..=order)
            .map(|k| {
                self.coeffs
                    .get(&(k + v))
                    .map(|c| c.scale(&inv_lead))
                    .unwrap_or_default()
            })
            .collect();
        let mut w: Vec<PolyN> = vec![PolyN::one()];
        for k in 1..=order as usize {
            let mut s = PolyN::zero();
            for j in 1..=k {
                s.add_mul_assign(&u[j], &w[k - j]);
            }
            w.push(-s);
        }
        let inv_lead_p = PolyN::constant(inv_lead);
        Ok(Self::from_terms(
            w.into_iter()
                .enumerate()
                .map(|(k, c)| (k as i64 - v, &c * &inv_lead_p)),
            order - v,
        ))
    }

    /// `exp(a)` for a series with strictly positive valuation.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs.keys().next().is_some_and(|&e| e <= 0) {
            return Err(KpError::NonUnitLeadingTerm(
                "exp needs positive valuation".into(),
            ));
        }
        let order = self.max_exp;
        if order < 0 {
            return Ok(Self::zero(order));
        }
        let a = |k: usize| self.coeffs.get(&(k as i64)).cloned().unwrap_or_default();
        // n b_n = sum_{k=1}^n k a_k b_{n-k}
        let mut b: Vec<PolyN> = vec![PolyN::one()];
        for n in 1..=order as usize {
            let mut s = PolyN::zero();
            for k in 1..=n {
                let ak = a(k);
                if !ak.is_zero() {
                    s.add_mul_assign(&ak.scale(&rat_int(k as i64)), &b[n - k]);
                }
            }
            b.push(s.scale(&rat(1, n as i64)));
        }
        Ok(Self::from_terms(
            b.into_iter().enumerate().map(|(k, c)| (k as i64, c)),
            order,
        ))
    }

    /// Formal logarithm of a series with constant term exactly 1 and no negative powers.
    pub fn log(&self) -> Result<Self> {
        let c0 = self.coeffs.get(&0);
        if self.coeffs.keys().next().is_some_and(|&e| e < 0) || !c0.is_some_and(|c| c.is_one()) {
            return Err(KpError::NonUnitLeadingTerm(
                c0.map(|c| c.to_string()).unwrap_or_else(|| "0".into()),
            ));
        }
        let order = self.max_exp;
        let u = self.sub(&Self::one(order));
        let mut acc = Self::zero(order);
        let mut pow = Self::one(order);
        for m in 1..=order.max(0) {
            pow = pow.mul(&u);
            if pow.is_zero() {
                break;
            }
            let sign = if m % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&pow.scale(&PolyN::constant(rat(sign, m))));
        }
        Ok(acc.truncate(order))
    }

    /// Substitutes `N -> s N + t` in every coefficient.
    pub fn compose_n(&self, s: &BigRat, t: &BigRat) -> Self {
        Self::from_terms(
            self.coeffs.iter().map(|(e, c)| (*e, c.compose_affine(s, t))),
            self.max_exp,
        )
    }
}

/// Multivariate Laurent series with per-variable exponent windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    n: usize,
    terms: BTreeMap<Vec<i64>, PolyN>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    clipped: Option<i64>,
}

impl MultiSeries {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "window dimensions differ");
        MultiSeries { n: lo.len(), terms: BTreeMap::new(), lo, hi, clipped: None }
    }

    pub fn uniform(n: usize, lo: i64, hi: i64) -> Self {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    /// Smallest total degree of a term dropped above the window, if any.
    pub fn clipped_at(&self) -> Option<i64> {
        self.clipped
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], &PolyN)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[i64]) -> PolyN {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    /// Adds `c x^exps`; above the window the term is clipped, below it is an error.
    pub fn add_term(&mut self, exps: &[i64], c: &PolyN) -> Result<()> {
        assert_eq!(exps.len(), self.n);
        for (var, &e) in exps.iter().enumerate() {
            if e < self.lo[var] {
                return Err(KpError::WindowUnderflow { var, exp: e, lo: self.lo[var] });
            }
        }
        if exps.iter().zip(&self.hi).any(|(e, h)| e > h) {
            let total: i64 = exps.iter().sum();
            self.clipped = Some(self.clipped.map_or(total, |t| t.min(total)));
            return Ok(());
        }
        if c.is_zero() {
            return Ok(());
        }
        let slot = self.terms.entry(exps.to_vec()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(exps);
        }
        Ok(())
    }

    pub fn monomial(lo: Vec<i64>, hi: Vec<i64>, exps: &[i64], c: PolyN) -> Result<Self> {
        let mut m = Self::new(lo, hi);
        m.add_term(exps, &c)?;
        Ok(m)
    }

    pub fn scale(&self, s: &PolyN) -> Self {
        let mut out = Self::new(self.lo.clone(), self.hi.clone());
        out.clipped = self.clipped;
        for (e, c) in &self.terms {
            let v = c * s;
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (lo, hi) = merged_window(self, other);
        let mut out = Self::new(lo, hi);
        out.clipped = min_opt(self.clipped, other.clipped);
        for (e, c) in self.terms.iter().chain(&other.terms) {
            out.add_term(e, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&PolyN::from_int(-1)))
    }

    /// Keeps only the terms of total degree `<= max_total`.
    pub fn truncate_total(&self, max_total: i64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|e, _| e.iter().sum::<i64>() <= max_total);
        out
    }

    /// `e1,...,en: poly`, one term per line in lexicographic order.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            let idx: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}: {}", idx.join(","), c);
        }
        s
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn merged_window(a: &MultiSeries, b: &MultiSeries) -> (Vec<i64>, Vec<i64>) {
    assert_eq!(a.n, b.n, "variable counts differ");
    let lo = a.lo.iter().zip(&b.lo).map(|(x, y)| *x.min(y)).collect();
    let hi = a.hi.iter().zip(&b.hi).map(|(x, y)| *x.max(y)).collect();
    (lo, hi)
}

/// Product over the merged window of both factors.
pub fn multi_mul(a: &MultiSeries, b: &MultiSeries) -> Result<MultiSeries> {
    let (lo, hi) = merged_window(a, b);
    multi_mul_in(a, b, lo, hi)
}

/// Product restricted to an explicit window.
pub fn multi_mul_in(a: &MultiSeries, b: &MultiSeries, lo: Vec<i64>, hi: Vec<i64>) -> Result<MultiSeries> {
    let mut out = MultiSeries::new(lo, hi);
    out.clipped = min_opt(a.clipped, b.clipped);
    let mut e = vec![0i64; a.n];
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            for k in 0..a.n {
                e[k] = ea[k] + eb[k];
            }
            out.add_term(&e, &(ca * cb))?;
        }
    }
    Ok(out)
}

/// Which inverse difference `geom_inverse_diff` expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeomKind {
    /// `1/(λ_i - λ_j)`
    Simple,
    /// `1/(λ_i - λ_j)^2`
    Square,
    /// `1/(λ_i^(1/2) - λ_j^(1/2))^2`
    HalfSquare,
}

/// Expansion of an inverse difference in the region `|x_0| < |x_1| < ... `
/// (that is `|λ_0| > |λ_1| > ...`), keeping the geometric terms `m = 0..=cap`.
pub fn geom_inverse_diff(n: usize, i: usize, j: usize, kind: GeomKind, cap: u32) -> MultiSeries {
    assert!(i != j && i < n && j < n);
    let (small, large) = if i < j { (i, j) } else { (j, i) };
    let sign = if kind == GeomKind::Simple && i > j { -1 } else { 1 };
    let mut terms = Vec::new();
    for m in 0..=cap as i64 {
        let (ps, pl, c) = match kind {
            GeomKind::Simple => (2 * m + 2, -2 * m, 1),
            GeomKind::Square => (2 * m + 4, -2 * m, m + 1),
            GeomKind::HalfSquare => (m + 2, -m, m + 1),
        };
        let mut e = vec![0i64; n];
        e[small] = ps;
        e[large] = pl;
        terms.push((e, PolyN::from_int(sign * c)));
    }
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for (e, _) in &terms {
        for k in 0..n {
            lo[k] = lo[k].min(e[k]);
            hi[k] = hi[k].max(e[k]);
        }
    }
    let mut out = MultiSeries::new(lo, hi);
    for (e, c) in terms {
        out.add_term(&e, &c).expect("terms lie in their own window");
    }
    out
}

/// `x^(-2)`, that is `λ`, as a one-term multivariate series.
pub fn lambda_var(n: usize, i: usize) -> MultiSeries {
    let mut e = vec![0i64; n];
    e[i] = -2;
    let mut lo = vec![0i64; n];
    lo[i] = -2;
    MultiSeries::monomial(lo, vec![0; n], &e, PolyN::one()).expect("in window")
}
