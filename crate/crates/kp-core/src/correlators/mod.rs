//! Open intersection numbers `⟨τ_{d_1/2} ⋯ τ_{d_n/2}⟩` as polynomials in `N`.
//!
//! One-point numbers come from a closed form in the P-polynomials; for `n >= 2`
//! the generating function `S_n` is expanded in the region
//! `|λ_1| > ... > |λ_n|` and its coefficients are divided by the leg
//! prefactors `(-1)^(d+1) (d+1)!! 2^(-(d+1)/3)`.

pub mod engine;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use engine::{ExpansionConfig, Exec, MAX_VARS};

use crate::asymptotics::{p_poly_product, PPolyKey};
use crate::error::{KpError, Result};
use crate::exactmath::{double_factorial, pochhammer, rat, BigRat, PolyN};
use crate::puiseux::MultiSeries;

/// Rational polynomial times a power of `2^(1/3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoCubeScaled {
    pub rational_part: PolyN,
    pub two_third_exp: i64,
}

impl TwoCubeScaled {
    pub fn new(rational_part: PolyN, two_third_exp: i64) -> Self {
        TwoCubeScaled { rational_part, two_third_exp }
    }

    pub fn mul(&self, other: &Self) -> Self {
        TwoCubeScaled::new(&self.rational_part * &other.rational_part, self.two_third_exp + other.two_third_exp)
    }

    /// Inverse of a nonzero constant.
    pub fn inv_constant(&self) -> Option<Self> {
        let c = self.rational_part.as_constant()?;
        if c.is_zero() {
            return None;
        }
        Some(TwoCubeScaled::new(PolyN::constant(c.recip()), -self.two_third_exp))
    }

    /// Folds the radical into the rational part; zero folds regardless of exponent.
    pub fn fold(&self) -> Result<PolyN> {
        if self.rational_part.is_zero() {
            return Ok(PolyN::zero());
        }
        if self.two_third_exp % 3 != 0 {
            return Err(KpError::ExponentNotDivisible(self.two_third_exp));
        }
        let k = self.two_third_exp / 3;
        let p = BigRat::from_integer(BigInt::one() << k.unsigned_abs() as usize);
        let s = if k >= 0 { p } else { p.recip() };
        Ok(self.rational_part.scale(&s))
    }
}

/// Coefficient of `⟨⟨τ_{d/2}⟩⟩ λ^(-(d/2+1))` in the generating functions.
pub fn prefactor(d: u32) -> TwoCubeScaled {
    let sign = if d.is_multiple_of(2) { -1 } else { 1 };
    let df = double_factorial(d as u64 + 1) * BigInt::from(sign);
    TwoCubeScaled::new(PolyN::constant(BigRat::from_integer(df)), -(d as i64 + 1))
}

/// `⟨τ_{d_1/2} ⋯ τ_{d_n/2}⟩` with `d` stored sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub d: Vec<u32>,
    pub value: PolyN,
}

impl Correlator {
    pub fn new(mut d: Vec<u32>, value: PolyN) -> Self {
        d.sort_unstable();
        Correlator { d, value }
    }

    /// `Σ (d_i + 1) ≡ 0 (mod 3)`
    pub fn dimension_ok(d: &[u32]) -> bool {
        d.iter().map(|&x| x as u64 + 1).sum::<u64>() % 3 == 0
    }
}

impl fmt::Display for Correlator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, d) in self.d.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if d % 2 == 0 {
                write!(f, "tau_{}", d / 2)?;
            } else {
                write!(f, "tau_{}/2", d)?;
            }
        }
        write!(f, "> = {}", self.value)
    }
}

/// `⟨τ_{(3g-1)/2}⟩`
pub fn one_point(g: u32) -> Result<Correlator> {
    assert!(g >= 1, "one_point needs g >= 1");
    let d = 3 * g - 1;
    let p = p_poly_product(PPolyKey::new(0, 0, g as u64 + 1));
    let coeff = TwoCubeScaled::new(p.scale(&rat(-2, 3 * g as i64 + 2)), 0);
    let inv = prefactor(d).inv_constant().expect("prefactor is a nonzero constant");
    Ok(Correlator::new(vec![d], coeff.mul(&inv).fold()?))
}

/// Taylor coefficients of
/// `e^(Y²/6) (₂F₂(1/2-N, 1/2+N; 1/2, 1/2; -Y²/8) + N Y ₂F₂(1-N, 1+N; 1, 3/2; -Y²/8))`
/// in `Y = X^(3/2)`, up to `Y^(gmax+1)`. Entry `g+1` is `⟨τ_{(3g-1)/2}⟩`.
pub fn one_point_genfun(gmax: u32) -> Vec<PolyN> {
    let order = gmax as usize + 1;
    let n = PolyN::n();
    let half = PolyN::constant(rat(1, 2));
    let one = PolyN::one();
    // even part in Y² and odd part Y·(series in Y²)
    let f_even = hyp2f2(&(&half - &n), &(&half + &n), &rat(1, 2), &rat(1, 2), order / 2 + 1);
    let f_odd = hyp2f2(&(&one - &n), &(&one + &n), &rat(1, 1), &rat(3, 2), order / 2 + 1);
    let mut h = vec![PolyN::zero(); order + 1];
    for (k, c) in f_even.iter().enumerate() {
        if 2 * k <= order {
            h[2 * k] = &h[2 * k] + c;
        }
    }
    for (k, c) in f_odd.iter().enumerate() {
        if 2 * k < order {
            h[2 * k + 1] = &h[2 * k + 1] + &(&n * c);
        }
    }
    // e^(Y²/6)
    let mut expo = vec![BigRat::zero(); order + 1];
    let mut term = BigRat::one();
    for j in 0..=order / 2 {
        expo[2 * j] = term.clone();
        term /= BigRat::from_integer(BigInt::from(6 * (j as i64 + 1)));
    }
    (0..=order)
        .map(|i| {
            let mut acc = PolyN::zero();
            for j in 0..=i {
                if !expo[j].is_zero() {
                    acc = &acc + &h[i - j].scale(&expo[j]);
                }
            }
            acc
        })
        .collect()
}

/// Coefficients of `w^k` in `₂F₂(α, β; γ, δ; -w/8)` where `w = Y²`.
fn hyp2f2(alpha: &PolyN, beta: &PolyN, gamma: &BigRat, delta: &BigRat, terms: usize) -> Vec<PolyN> {
    (0..terms as u64)
        .map(|k| {
            let num = &pochhammer(alpha, k) * &pochhammer(beta, k);
            let den = crate::exactmath::pochhammer_rat(gamma, k)
                * crate::exactmath::pochhammer_rat(delta, k)
                * BigRat::from_integer(crate::exactmath::factorial(k))
                * BigRat::from_integer(BigInt::from(-8).pow(k as u32));
            num.scale(&den.recip())
        })
        .collect()
}

/// Compares `values[g-1]` (one-point numbers for `g = 1..`) with the closed generating function.
pub fn one_point_genfun_matches(values: &[PolyN]) -> bool {
    let gen = one_point_genfun(values.len() as u32);
    if gen[0] != PolyN::one() || gen[1] != PolyN::n() {
        return false;
    }
    values.iter().enumerate().all(|(i, v)| &gen[i + 2] == v)
}

pub fn one_point_genfun_check(gmax: u32) -> bool {
    let values: Result<Vec<PolyN>> = (1..=gmax).map(|g| one_point(g).map(|c| c.value)).collect();
    values.is_ok_and(|v| one_point_genfun_matches(&v))
}

pub fn default_cap(dmax: u32) -> u32 {
    dmax + 6
}

fn check_cancellation(terms: &BTreeMap<Vec<i64>, PolyN>) -> Result<()> {
    for (e, c) in terms {
        if e.iter().any(|&x| x <= 1) && !c.is_zero() {
            return Err(KpError::CancellationFailure { exps: e.clone() });
        }
    }
    Ok(())
}

/// Adds `-1/(λ_1^(1/2) - λ_2^(1/2))^2 = -Σ (m+1) x_1^(m+2) x_2^(-m)` to the selected terms.
fn add_two_point_correction(cfg: &ExpansionConfig, terms: &mut BTreeMap<Vec<i64>, PolyN>) {
    for m in 0.. {
        let e = vec![m + 2, -m];
        if e[1] < cfg.lo {
            break;
        }
        if e[0] > cfg.hi || (cfg.sorted && e[0] > e[1]) || cfg.total.is_some_and(|t| t != 2) {
            continue;
        }
        let slot = terms.entry(e).or_insert_with(PolyN::zero);
        *slot = &*slot - &PolyN::from_int(m + 1);
    }
}

/// Coefficients of `S_n` for the configured monomials, with the cancellation check.
pub fn s_n_terms(cfg: &ExpansionConfig) -> Result<BTreeMap<Vec<i64>, PolyN>> {
    let mut terms: BTreeMap<Vec<i64>, PolyN> =
        engine::cyclic_trace_sum(cfg)?.into_iter().map(|(e, c)| (e, -c)).collect();
    if cfg.n == 2 {
        add_two_point_correction(cfg, &mut terms);
    }
    terms.retain(|_, c| !c.is_zero());
    check_cancellation(&terms)?;
    Ok(terms)
}

/// `S_n` in the window `0 <= e_i <= dmax + 2`.
pub fn s_n_expansion(n: usize, dmax: u32, cap: u32) -> Result<MultiSeries> {
    let cfg = ExpansionConfig::window(n, dmax as i64 + 2, cap);
    let terms = s_n_terms(&cfg)?;
    let mut out = MultiSeries::uniform(n, 0, cfg.hi);
    for (e, c) in &terms {
        out.add_term(e, c)?;
    }
    Ok(out)
}

/// Divides the `x^(d+2)` coefficient of `S_n` by the leg prefactors.
pub fn correlator_from_coeff(d: &[u32], coeff: &PolyN) -> Result<PolyN> {
    let mut scaled = TwoCubeScaled::new(coeff.clone(), 0);
    for &di in d {
        scaled = scaled.mul(&prefactor(di).inv_constant().expect("nonzero prefactor"));
    }
    scaled.fold()
}

/// All sorted correlators `⟨τ_{d_1/2} ⋯ τ_{d_n/2}⟩` with `Σ d_i = sum_d`, at the given cap.
pub fn correlators_with_sum(n: usize, sum_d: u32, cap: u32, exec: Exec) -> Result<BTreeMap<Vec<u32>, PolyN>> {
    if n == 1 {
        let mut out = BTreeMap::new();
        if (sum_d + 1).is_multiple_of(3) {
            out.insert(vec![sum_d], one_point((sum_d + 1) / 3)?.value);
        }
        return Ok(out);
    }
    let total = sum_d as i64 + 2 * n as i64;
    let cfg = ExpansionConfig {
        n,
        lo: 0,
        hi: total,
        cap,
        sorted: true,
        total: Some(total),
        exec,
    };
    let mut out = BTreeMap::new();
    for (e, c) in s_n_terms(&cfg)? {
        let d: Vec<u32> = e.iter().map(|&x| (x - 2) as u32).collect();
        out.insert(d.clone(), correlator_from_coeff(&d, &c)?);
    }
    Ok(out)
}

/// Sorted correlators with every `d_i <= dmax`, at the given cap.
pub fn correlator_table_with_cap(n: usize, dmax: u32, cap: u32, exec: Exec) -> Result<BTreeMap<Vec<u32>, PolyN>> {
    if n == 1 {
        let mut out = BTreeMap::new();
        for d in 0..=dmax {
            if (d + 1) % 3 == 0 {
                out.insert(vec![d], one_point((d + 1) / 3)?.value);
            }
        }
        return Ok(out);
    }
    let cfg = ExpansionConfig {
        n,
        lo: 0,
        hi: dmax as i64 + 2,
        cap,
        sorted: true,
        total: None,
        exec,
    };
    let mut out = BTreeMap::new();
    for (e, c) in s_n_terms(&cfg)? {
        let d: Vec<u32> = e.iter().map(|&x| (x - 2) as u32).collect();
        out.insert(d.clone(), correlator_from_coeff(&d, &c)?);
    }
    Ok(out)
}

/// Runs `f(cap)`, doubling the cap until two consecutive runs agree.
pub fn stable<T: PartialEq>(initial: u32, max_doublings: u32, f: impl Fn(u32) -> Result<T>) -> Result<T> {
    let mut cap = initial;
    let mut prev = f(cap)?;
    for _ in 0..=max_doublings {
        let next = f(2 * cap.max(1))?;
        if next == prev {
            return Ok(next);
        }
        prev = next;
        cap = 2 * cap.max(1);
    }
    Err(KpError::NotComputed(format!("no stable cap up to {cap}")))
}

/// Sorted table of all correlators with `d_i <= dmax`, surfaced after a stable doubling.
pub fn correlator_table(n: usize, dmax: u32) -> Result<BTreeMap<Vec<u32>, PolyN>> {
    correlator_table_exec(n, dmax, Exec::default())
}

pub fn correlator_table_exec(n: usize, dmax: u32, exec: Exec) -> Result<BTreeMap<Vec<u32>, PolyN>> {
    stable(default_cap(dmax), 3, |cap| correlator_table_with_cap(n, dmax, cap, exec))
}

pub fn extract_with_cap(d: &[u32], dmax: u32, cap: u32) -> Result<Correlator> {
    let mut sorted = d.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() {
        return Err(KpError::NotComputed("empty correlator".into()));
    }
    if let Some(&m) = sorted.last() {
        if m > dmax {
            return Err(KpError::NotComputed(format!("d = {m} exceeds window dmax = {dmax}")));
        }
    }
    if sorted.len() == 1 {
        let d0 = sorted[0];
        return if (d0 + 1).is_multiple_of(3) {
            one_point((d0 + 1) / 3)
        } else {
            Ok(Correlator::new(sorted, PolyN::zero()))
        };
    }
    if sorted.len() > MAX_VARS {
        return Err(KpError::NotComputed(format!("at most {MAX_VARS} points")));
    }
    let sum: u32 = sorted.iter().sum();
    let table = correlators_with_sum(sorted.len(), sum, cap, Exec::default())?;
    let value = table.get(&sorted).cloned().unwrap_or_else(PolyN::zero);
    Ok(Correlator::new(sorted, value))
}

/// `⟨τ_{d_1/2} ⋯⟩`, surfaced after one stable cap doubling.
pub fn extract(d: &[u32], dmax: u32) -> Result<Correlator> {
    stable(default_cap(dmax), 3, |cap| extract_with_cap(d, dmax, cap))
}

pub fn stability_check_with_cap(d: &[u32], dmax: u32, cap: u32) -> bool {
    match (extract_with_cap(d, dmax, cap), extract_with_cap(d, dmax, 2 * cap.max(1))) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

pub fn stability_check(d: &[u32], dmax: u32) -> bool {
    stability_check_with_cap(d, dmax, default_cap(dmax))
}

type Table = BTreeMap<Vec<u32>, PolyN>;

/// Memo of sorted correlators keyed by `(n, Σ d)`.
#[derive(Default)]
pub struct CorrelatorCache {
    slices: RwLock<HashMap<(usize, u32), Arc<Table>>>,
}

impl CorrelatorCache {
    pub fn global() -> &'static CorrelatorCache {
        static CACHE: OnceLock<CorrelatorCache> = OnceLock::new();
        CACHE.get_or_init(CorrelatorCache::default)
    }

    pub fn slice(&self, n: usize, sum_d: u32) -> Result<Arc<Table>> {
        if let Some(s) = self.slices.read().expect("cache lock").get(&(n, sum_d)) {
            return Ok(s.clone());
        }
        let cap = default_cap(sum_d);
        let table = Arc::new(stable(cap, 3, |c| correlators_with_sum(n, sum_d, c, Exec::default()))?);
        self.slices.write().expect("cache lock").insert((n, sum_d), table.clone());
        Ok(table)
    }

    pub fn get(&self, d: &[u32]) -> Result<PolyN> {
        let mut sorted = d.to_vec();
        sorted.sort_unstable();
        if sorted.len() > MAX_VARS {
            return Err(KpError::NotComputed(format!("at most {MAX_VARS} points")));
        }
        let slice = self.slice(sorted.len(), sorted.iter().sum())?;
        Ok(slice.get(&sorted).cloned().unwrap_or_else(PolyN::zero))
    }
}

#[cfg(test)]
mod tests;
