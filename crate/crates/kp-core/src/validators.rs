//! Independent consistency checks: string and dilaton equations, the closed
//! limit, the Wronskian form of the partition function for one and two
//! eigenvalues, and regression against the shipped tables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{f_series, NArg, Sign};
use crate::correlators::{correlator_table, one_point, prefactor, CorrelatorCache, TwoCubeScaled, MAX_VARS};
use crate::error::{KpError, Result};
use crate::exactmath::{factorial, rat, BigRat, PolyN};
use crate::puiseux::{multi_mul_in, MultiSeries, PuiseuxSeries};

/// `∂^r log τ / ∂T_{k_1} ⋯ ∂T_{k_r}` at `T = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TCorrelator {
    pub ks: Vec<u32>,
    pub value: PolyN,
}

pub fn t_correlator(ks: &[u32]) -> Result<TCorrelator> {
    t_correlator_in(CorrelatorCache::global(), ks)
}

pub fn t_correlator_in(cache: &CorrelatorCache, ks: &[u32]) -> Result<TCorrelator> {
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    assert!(ks.iter().all(|&k| k >= 1), "T-indices start at 1");
    let d: Vec<u32> = ks.iter().map(|k| k - 1).collect();
    let corr = cache.get(&d)?;
    let mut scaled = TwoCubeScaled::new(corr, 0);
    for &di in &d {
        scaled = scaled.mul(&prefactor(di));
    }
    Ok(TCorrelator { ks, value: scaled.fold()? })
}

fn within(ks: &[u32], dmax: u32) -> Result<()> {
    if ks.len() > MAX_VARS {
        return Err(KpError::NotComputed(format!("{} points exceed the engine limit", ks.len())));
    }
    match ks.iter().max() {
        Some(&k) if k > dmax + 1 => Err(KpError::NotComputed(format!("T_{k} needs d = {} > {dmax}", k - 1))),
        _ => Ok(()),
    }
}

fn tcorr_checked(cache: &CorrelatorCache, ks: &[u32], dmax: u32) -> Result<PolyN> {
    within(ks, dmax)?;
    Ok(t_correlator_in(cache, ks)?.value)
}

/// Left-hand side of the string equation differentiated by `T_{m_1} ⋯ T_{m_r}`.
pub fn string_residual(cache: &CorrelatorCache, ms: &[u32], dmax: u32) -> Result<PolyN> {
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    let mut acc = PolyN::zero();
    for j in 0..ms.len() {
        if ms[j] >= 3 {
            let mut lowered = ms.clone();
            lowered[j] -= 2;
            acc = &acc + &tcorr_checked(cache, &lowered, dmax)?.scale(&rat(ms[j] as i64, 2));
        }
    }
    let mut with_one = ms.clone();
    with_one.push(1);
    acc = &acc + &tcorr_checked(cache, &with_one, dmax)?;
    if ms == [1, 1] {
        acc = &acc + &PolyN::constant(rat(1, 2));
    }
    if ms == [2] {
        acc = &acc + &PolyN::n();
    }
    Ok(acc)
}

/// Left-hand side of the dilaton equation differentiated by `T_{m_1} ⋯ T_{m_r}`.
pub fn dilaton_residual(cache: &CorrelatorCache, ms: &[u32], dmax: u32) -> Result<PolyN> {
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    let mut acc = PolyN::zero();
    if !ms.is_empty() {
        let weight = rat(ms.iter().map(|&m| m as i64).sum(), 2);
        acc = tcorr_checked(cache, &ms, dmax)?.scale(&weight);
    }
    let mut with_three = ms.clone();
    with_three.push(3);
    acc = &acc + &tcorr_checked(cache, &with_three, dmax)?;
    if ms.is_empty() {
        acc = &acc + &PolyN::new(vec![rat(1, 16), rat(0, 1), rat(3, 4)]);
    }
    Ok(acc)
}

pub fn check_string(ms: &[u32], dmax: u32) -> Result<bool> {
    Ok(string_residual(CorrelatorCache::global(), ms, dmax)?.is_zero())
}

pub fn check_dilaton(ms: &[u32], dmax: u32) -> Result<bool> {
    Ok(dilaton_residual(CorrelatorCache::global(), ms, dmax)?.is_zero())
}

/// Nondecreasing sequences of positive integers with at most `max_len` terms and sum at most `max_sum`.
pub fn index_multisets(max_len: usize, max_sum: u32) -> Vec<Vec<u32>> {
    fn rec(cur: &mut Vec<u32>, min: u32, left: u32, max_len: usize, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        for m in min..=left {
            cur.push(m);
            rec(cur, m, left - m, max_len, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, max_sum, max_len, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    String,
    Dilaton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub ms: Vec<u32>,
    pub residual: PolyN,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Every differentiated identity with `Σ m_i <= max_sum` whose correlators have at most `max_points` points.
pub fn identity_suite(identity: Identity, max_sum: u32, max_points: usize) -> Result<Vec<IdentityCheck>> {
    let cache = CorrelatorCache::global();
    let dmax = max_sum + 3;
    index_multisets(max_points - 1, max_sum)
        .into_iter()
        .map(|ms| {
            let residual = match identity {
                Identity::String => string_residual(cache, &ms, dmax)?,
                Identity::Dilaton => dilaton_residual(cache, &ms, dmax)?,
            };
            Ok(IdentityCheck { identity, ms, residual })
        })
        .collect()
}

/// `1/(24^h h!)`
pub fn closed_one_point(h: u32) -> BigRat {
    let den = BigInt::from(24).pow(h) * factorial(h as u64);
    BigRat::new(BigInt::one(), den)
}

pub fn check_closed_limit(hmax: u32) -> Result<bool> {
    let zero = BigRat::zero();
    for h in 1..=hmax {
        let odd = one_point(2 * h - 1)?.value.eval(&zero);
        let even = one_point(2 * h)?.value.eval(&zero);
        if odd != closed_one_point(h) || !even.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `log Z_n` in `z_k = 1/y_k`, truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub enum WronskianLog {
    One(PuiseuxSeries),
    Two(MultiSeries),
}

/// `F_-(y^2; N + shift)` as a series in `z = 1/y`.
fn f_minus_z(shift: i64, order: i64) -> PuiseuxSeries {
    f_series(Sign::Minus, NArg::plus(shift), order)
}

/// `Z_2 = [z_1 F(z_1;N) F(z_2;N-1) - z_2 F(z_2;N) F(z_1;N-1)] / (z_1 - z_2)`, terms of total degree `<= order`.
pub fn wronskian_z2(order: i64) -> Result<MultiSeries> {
    let k = order + 1;
    let f0 = f_minus_z(0, k);
    let f1 = f_minus_z(-1, k);
    // numerator by total degree, as coefficient lists in z_1
    let mut numer: Vec<Vec<PolyN>> = vec![vec![PolyN::zero(); (k + 1) as usize]; (k + 1) as usize];
    for (i, a) in f0.terms() {
        for (j, b) in f1.terms() {
            let prod = a * b;
            // z_1^(i+1) z_2^j
            if i + 1 + j <= k {
                let t = (i + 1 + j) as usize;
                numer[t][(i + 1) as usize] = &numer[t][(i + 1) as usize] + &prod;
                // - z_2^(i+1) z_1^j
                numer[t][j as usize] = &numer[t][j as usize] - &prod;
            }
        }
    }
    let mut out = MultiSeries::uniform(2, 0, order);
    for (t, row) in numer.iter().enumerate() {
        // row[a] is the coefficient of z_1^a z_2^(t-a); divide by (z_1 - z_2)
        let q = divide_by_difference(row, t)?;
        for (a, c) in q.iter().enumerate() {
            if !c.is_zero() {
                out.add_term(&[a as i64, (t - 1 - a) as i64], c)?;
            }
        }
    }
    Ok(out)
}

/// Quotient of a homogeneous form of degree `t` by `z_1 - z_2`.
fn divide_by_difference(row: &[PolyN], t: usize) -> Result<Vec<PolyN>> {
    if t == 0 {
        return if row[0].is_zero() {
            Ok(Vec::new())
        } else {
            Err(KpError::CancellationFailure { exps: vec![0, 0] })
        };
    }
    // Σ_a q_a z_1^a z_2^(t-1-a) times (z_1 - z_2): coefficient of z_1^a is q_(a-1) - q_a
    let mut q = vec![PolyN::zero(); t];
    let mut carry = PolyN::zero();
    for a in 0..t {
        // q_a = q_(a-1) - row[a]
        q[a] = &carry - &row[a];
        carry = q[a].clone();
    }
    if carry != row[t] {
        return Err(KpError::CancellationFailure { exps: vec![t as i64, 0] });
    }
    Ok(q)
}

/// Series logarithm of `1 + W` for `W` without constant term, truncated at total degree `order`.
fn multi_log(z: &MultiSeries, order: i64) -> Result<MultiSeries> {
    let n = z.n();
    let origin = vec![0i64; n];
    if z.coeff(&origin) != PolyN::one() {
        return Err(KpError::NonUnitLeadingTerm(format!("{}", z.coeff(&origin))));
    }
    let lo = vec![0i64; n];
    let hi = vec![order; n];
    let mut w = MultiSeries::new(lo.clone(), hi.clone());
    for (e, c) in z.terms() {
        if e.iter().any(|&x| x != 0) {
            w.add_term(e, c)?;
        }
    }
    let mut out = MultiSeries::new(lo.clone(), hi.clone());
    let mut power = w.clone();
    for k in 1..=order {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        out = out.add(&power.scale(&PolyN::constant(rat(sign, k))))?;
        power = multi_mul_in(&power, &w, lo.clone(), hi.clone())?.truncate_total(order);
    }
    Ok(out.truncate_total(order))
}

pub fn wronskian_log_z(n: usize, order: i64) -> Result<WronskianLog> {
    match n {
        1 => Ok(WronskianLog::One(f_minus_z(0, order).log()?)),
        2 => Ok(WronskianLog::Two(multi_log(&wronskian_z2(order)?, order)?)),
        _ => Err(KpError::NotComputed(format!("Wronskian oracle only for n = 1, 2 (got {n})"))),
    }
}

impl WronskianLog {
    pub fn terms(&self) -> BTreeMap<Vec<i64>, PolyN> {
        match self {
            WronskianLog::One(s) => s.terms().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (vec![e], c.clone())).collect(),
            WronskianLog::Two(s) => s.terms().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e.to_vec(), c.clone())).collect(),
        }
    }
}

/// Partitions of `total` into parts `>= 1`, as nondecreasing sequences.
fn partitions(total: u32) -> Vec<Vec<u32>> {
    index_multisets(total as usize, total)
        .into_iter()
        .filter(|p| p.iter().sum::<u32>() == total)
        .collect()
}

/// `Σ_r (1/r!) Σ TCorr(k_1..k_r) T_{k_1} ⋯ T_{k_r}` with `T_k = (z_1^k + ... + z_n^k)/k`, total degree `<= degree`.
pub fn correlator_log_z(n: usize, degree: u32) -> Result<BTreeMap<Vec<i64>, PolyN>> {
    let cache = CorrelatorCache::global();
    let mut out: BTreeMap<Vec<i64>, PolyN> = BTreeMap::new();
    for total in 1..=degree {
        if total % 3 != 0 {
            continue;
        }
        for ks in partitions(total) {
            // Σ k_i = 3g - 3 + 3r with g >= -1
            if 3 * ks.len() as u32 > total + 6 {
                continue;
            }
            let tc = t_correlator_in(cache, &ks)?.value;
            if tc.is_zero() {
                continue;
            }
            let mut weight = BigInt::one();
            for &k in &ks {
                weight *= BigInt::from(k);
            }
            let mut run = 1;
            for i in 1..=ks.len() {
                if i < ks.len() && ks[i] == ks[i - 1] {
                    run += 1;
                } else {
                    weight *= factorial(run);
                    run = 1;
                }
            }
            let coeff = tc.scale(&BigRat::new(BigInt::one(), weight));
            // expand Π (z_1^k + ... + z_n^k)
            let mut monomials: BTreeMap<Vec<i64>, i64> = BTreeMap::from([(vec![0; n], 1)]);
            for &k in &ks {
                let mut next = BTreeMap::new();
                for (e, c) in &monomials {
                    for v in 0..n {
                        let mut e2 = e.clone();
                        e2[v] += k as i64;
                        *next.entry(e2).or_insert(0) += c;
                    }
                }
                monomials = next;
            }
            for (e, c) in monomials {
                let slot = out.entry(e).or_insert_with(PolyN::zero);
                *slot = &*slot + &coeff.scale(&BigRat::from_integer(BigInt::from(c)));
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// First total degree at which the two sides differ, if any.
pub fn wronskian_mismatch(n: usize, degree: u32) -> Result<Option<Vec<i64>>> {
    let lhs = wronskian_log_z(n, degree as i64)?.terms();
    let rhs = correlator_log_z(n, degree)?;
    let mut keys: Vec<&Vec<i64>> = lhs.keys().chain(rhs.keys()).collect();
    keys.sort_by_key(|e| (e.iter().sum::<i64>(), (*e).clone()));
    for e in keys {
        if e.iter().sum::<i64>() > degree as i64 {
            continue;
        }
        if lhs.get(e) != rhs.get(e) {
            return Ok(Some(e.clone()));
        }
    }
    Ok(None)
}

pub fn check_wronskian_vs_correlators(n: usize, degree: u32) -> Result<bool> {
    Ok(wronskian_mismatch(n, degree)?.is_none())
}

#[derive(Deserialize)]
struct FixtureFile {
    schema: String,
    tables: Vec<FixtureTable>,
}

#[derive(Deserialize)]
struct FixtureTable {
    n: usize,
    entries: Vec<FixtureEntry>,
}

#[derive(Deserialize)]
struct FixtureEntry {
    d: Vec<u32>,
    coeffs: Vec<[String; 2]>,
}

pub const FIXTURE_SCHEMA: &str = "kp-open-intersection-fixtures/v1";
const BUNDLED_FIXTURES: &str = include_str!("../fixtures/reference_tables.json");

/// Tabulated correlators keyed by point count, then sorted `d`.
#[derive(Clone, Debug, Default)]
pub struct Fixtures {
    tables: BTreeMap<usize, BTreeMap<Vec<u32>, PolyN>>,
}

impl Fixtures {
    pub fn bundled() -> Result<Fixtures> {
        Fixtures::from_json(BUNDLED_FIXTURES)
    }

    pub fn from_json(text: &str) -> Result<Fixtures> {
        let file: FixtureFile = serde_json::from_str(text).map_err(|e| KpError::FixtureMissing(e.to_string()))?;
        if file.schema != FIXTURE_SCHEMA {
            return Err(KpError::FixtureMissing(format!("unknown schema {}", file.schema)));
        }
        let mut tables = BTreeMap::new();
        for t in file.tables {
            let mut entries = BTreeMap::new();
            for e in t.entries {
                let value = PolyN::from_pairs(&e.coeffs).map_err(|err| KpError::FixtureMissing(err.to_string()))?;
                let mut d = e.d;
                d.sort_unstable();
                entries.insert(d, value);
            }
            tables.insert(t.n, entries);
        }
        Ok(Fixtures { tables })
    }

    pub fn table(&self, n: usize) -> Result<&BTreeMap<Vec<u32>, PolyN>> {
        self.tables.get(&n).ok_or_else(|| KpError::FixtureMissing(format!("{n}-point table")))
    }
}

/// Largest `d_i` covered by the regression for each point count.
pub fn regression_dmax(n: usize) -> Option<u32> {
    match n {
        1 => Some(104),
        2 => Some(30),
        3 => Some(10),
        4 => Some(7),
        5 => Some(6),
        6 => Some(4),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Match,
    Mismatch,
    /// Tabulated but computed as zero.
    MissingFromComputation,
    /// Computed nonzero, not tabulated.
    Unlisted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub d: Vec<u32>,
    pub expected: Option<PolyN>,
    pub computed: PolyN,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub n: usize,
    pub dmax: u32,
    pub rows: Vec<RegressionRow>,
    /// Tuples in the window whose dimension forbids a nonzero value.
    pub vanishing_checked: usize,
    pub vanishing_failed: Vec<Vec<u32>>,
}

impl RegressionReport {
    pub fn count(&self, status: RowStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// Every tabulated entry reproduced and every forbidden tuple zero.
    pub fn passed(&self) -> bool {
        self.count(RowStatus::Mismatch) == 0
            && self.count(RowStatus::MissingFromComputation) == 0
            && self.vanishing_failed.is_empty()
    }
}

pub fn regression_tables(which: usize) -> Result<RegressionReport> {
    regression_against(&Fixtures::bundled()?, which)
}

pub fn regression_against(fixtures: &Fixtures, which: usize) -> Result<RegressionReport> {
    let dmax = regression_dmax(which).ok_or_else(|| KpError::FixtureMissing(format!("{which}-point table")))?;
    let expected = fixtures.table(which)?;
    let computed = correlator_table(which, dmax)?;
    let mut rows = Vec::new();
    for (d, value) in expected {
        let got = computed.get(d).cloned().unwrap_or_else(PolyN::zero);
        let status = if &got == value {
            RowStatus::Match
        } else if got.is_zero() {
            RowStatus::MissingFromComputation
        } else {
            RowStatus::Mismatch
        };
        rows.push(RegressionRow { d: d.clone(), expected: Some(value.clone()), computed: got, status });
    }
    for (d, value) in &computed {
        if !expected.contains_key(d) && !value.is_zero() {
            rows.push(RegressionRow { d: d.clone(), expected: None, computed: value.clone(), status: RowStatus::Unlisted });
        }
    }
    let mut vanishing_checked = 0;
    let mut vanishing_failed = Vec::new();
    for d in sorted_tuples(which, dmax) {
        if crate::correlators::Correlator::dimension_ok(&d) {
            continue;
        }
        vanishing_checked += 1;
        if computed.get(&d).is_some_and(|v| !v.is_zero()) {
            vanishing_failed.push(d);
        }
    }
    Ok(RegressionReport { n: which, dmax, rows, vanishing_checked, vanishing_failed })
}

fn sorted_tuples(n: usize, dmax: u32) -> Vec<Vec<u32>> {
    fn rec(cur: &mut Vec<u32>, n: usize, min: u32, dmax: u32, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for d in min..=dmax {
            cur.push(d);
            rec(cur, n, d, dmax, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, 0, dmax, &mut out);
    out
}
