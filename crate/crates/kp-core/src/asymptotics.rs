//! The series data of the model: `C_j(N)`, `F_±(λ; ℓ)`, the polynomials
//! `P^k_{a,b}(N)` and the matrix `A(λ)`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{KpError, Result};
use crate::exactmath::{
    binom_neg_n, factorial, gamma_half_ratio, pochhammer, pochhammer_rat, rat, rat_int, BigRat,
    PolyN,
};
use crate::puiseux::PuiseuxSeries;

static C_MEMO: OnceLock<RwLock<Vec<PolyN>>> = OnceLock::new();

fn c_coeff_fresh(j: u64) -> PolyN {
    let mut acc = PolyN::zero();
    for b in 0..=2 * j {
        let sign = if b % 2 == 0 { 1 } else { -1 };
        let w = BigRat::new(
            BigInt::from(sign) * gamma_half_ratio(j + b).numer(),
            BigInt::from(3).pow(b as u32) * factorial(b) * gamma_half_ratio(j + b).denom(),
        );
        acc += &binom_neg_n(2 * j - b).scale(&w);
    }
    acc
}

/// `C_j(N)`, the coefficients of the asymptotic series of `f(λ; N)`.
pub fn c_coeff(j: u64) -> PolyN {
    let memo = C_MEMO.get_or_init(|| RwLock::new(Vec::new()));
    if let Some(c) = memo.read().unwrap().get(j as usize) {
        return c.clone();
    }
    let mut w = memo.write().unwrap();
    while w.len() <= j as usize {
        let next = c_coeff_fresh(w.len() as u64);
        w.push(next);
    }
    w[j as usize].clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

/// The argument `ℓ = s N + t` substituted into `C_j`, with `s = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NArg {
    pub s: i64,
    pub t: i64,
}

impl NArg {
    /// `N + a`
    pub fn plus(a: i64) -> Self {
        NArg { s: 1, t: a }
    }

    /// `-N - b`
    pub fn minus(b: i64) -> Self {
        NArg { s: -1, t: -b }
    }
}

fn c_at(j: u64, arg: NArg) -> PolyN {
    if arg == NArg::plus(0) {
        return c_coeff(j);
    }
    c_coeff(j).compose_affine(&rat_int(arg.s), &rat_int(arg.t))
}

/// `F_∓(λ; ℓ) = 1 + Σ (∓1)^j C_j(ℓ) x^(3j)`, valid to `x^order`.
pub fn f_series(sign: Sign, arg: NArg, order: i64) -> PuiseuxSeries {
    let jmax = if order < 0 { -1 } else { order / 3 };
    PuiseuxSeries::from_terms(
        (0..=jmax).map(|j| {
            let c = c_at(j as u64, arg);
            let c = if sign == Sign::Minus && j % 2 == 1 { -c } else { c };
            (3 * j, c)
        }),
        order,
    )
}

/// `F(N-2) - F(N) ± N x^3 F(N+1)` for a family `F(ℓ)` given by `series(shift)`.
pub fn f_recurrence_residual(
    sign: Sign,
    series: &dyn Fn(i64) -> PuiseuxSeries,
    order: i64,
) -> PuiseuxSeries {
    let lead = PolyN::n();
    let lead = if sign == Sign::Minus { -lead } else { lead };
    series(-2)
        .sub(&series(0))
        .add(&series(1).shift(3).scale(&lead))
        .truncate(order)
}

/// True iff `F_±(λ;N-2) - F_±(λ;N) ± N λ^(-3/2) F_±(λ;N+1)` vanishes to `x^order`.
pub fn check_f_recurrence(order: i64) -> bool {
    [Sign::Minus, Sign::Plus].into_iter().all(|sign| {
        let fam = |shift: i64| f_series(sign, NArg::plus(shift), order);
        f_recurrence_residual(sign, &fam, order).is_zero()
    })
}

/// Index of `P^k_{a,b}(N)` with `a, b ∈ {-1, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PPolyKey {
    pub a: i64,
    pub b: i64,
    pub k: u64,
}

impl PPolyKey {
    pub fn new(a: i64, b: i64, k: u64) -> Self {
        assert!(
            (-1..=1).contains(&a) && (-1..=1).contains(&b),
            "a and b must lie in {{-1, 0, 1}}"
        );
        PPolyKey { a, b, k }
    }

    pub fn all(kmax: u64) -> impl Iterator<Item = PPolyKey> {
        (-1..=1).flat_map(move |a| {
            (-1..=1).flat_map(move |b| (0..=kmax).map(move |k| PPolyKey::new(a, b, k)))
        })
    }
}

static P_MEMO: OnceLock<RwLock<HashMap<PPolyKey, PolyN>>> = OnceLock::new();

fn p_memo() -> &'static RwLock<HashMap<PPolyKey, PolyN>> {
    P_MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `x^(3k)` coefficient of `F_-(λ; N+a) F_+(λ; -N-b)`, computed without the memo.
pub fn p_poly_product_fresh(key: PPolyKey) -> PolyN {
    let mut acc = PolyN::zero();
    for i in 0..=key.k {
        let left = c_at(i, NArg::plus(key.a));
        let left = if i % 2 == 1 { -left } else { left };
        acc.add_mul_assign(&left, &c_at(key.k - i, NArg::minus(key.b)));
    }
    acc
}

/// Memoized `P^k_{a,b}(N)` via the series product.
pub fn p_poly_product(key: PPolyKey) -> PolyN {
    if let Some(p) = p_memo().read().unwrap().get(&key) {
        return p.clone();
    }
    let p = p_poly_product_fresh(key);
    p_memo().write().unwrap().insert(key, p.clone());
    p
}

/// Inserts externally stored values into the memo; callers verify them first.
pub fn seed_p_poly_memo(entries: impl IntoIterator<Item = (PPolyKey, PolyN)>) {
    let mut w = p_memo().write().unwrap();
    for (k, p) in entries {
        w.entry(k).or_insert(p);
    }
}

/// Snapshot of the memo, sorted by key.
pub fn p_poly_memo_entries() -> Vec<(PPolyKey, PolyN)> {
    let mut v: Vec<_> = p_memo()
        .read()
        .unwrap()
        .iter()
        .map(|(k, p)| (*k, p.clone()))
        .collect();
    v.sort_by_key(|(k, _)| *k);
    v
}

/// Coefficients `[Z^m]` for `m <= mmax` of `e^(Z/3) Σ_n t_n (-Z/4)^n`, with `t_n`
/// supplied for `n = 0..=mmax`.
fn times_exp_third(t: &[PolyN], mmax: usize) -> Vec<PolyN> {
    let g: Vec<PolyN> = t
        .iter()
        .enumerate()
        .map(|(n, c)| c.scale(&pow_rat(&rat(-1, 4), n)))
        .collect();
    (0..=mmax)
        .map(|m| {
            let mut acc = PolyN::zero();
            for (i, gi) in g.iter().enumerate().take(m + 1) {
                let e = BigRat::new(BigInt::one(), BigInt::from(3).pow((m - i) as u32) * factorial((m - i) as u64));
                acc += &gi.scale(&e);
            }
            acc
        })
        .collect()
}

fn pow_rat(x: &BigRat, n: usize) -> BigRat {
    (0..n).fold(BigRat::one(), |acc, _| acc * x)
}

/// `P^k_{a,b}(N)` from the hypergeometric generating functions.
///
/// When the lower parameter `δ` vanishes both sides have a simple pole in `δ`
/// and the identity is read on residues: `(δ)_n ~ δ (n-1)!`, so the Γ-ratio
/// becomes `1/(δ (3m-1)!)` (even case) or `1/(δ (3m)!)` (odd case) and the
/// `₂F₂` sum starts at `n = 1` with `(n-1)!` in place of `(δ)_n`.
pub fn p_poly_hypergeom(key: PPolyKey) -> Result<PolyN> {
    let PPolyKey { a, b, k } = key;
    if !(-1..=1).contains(&a) || !(-1..=1).contains(&b) {
        return Err(KpError::ResonanceUnhandled { a, b });
    }
    let m = (k / 2) as usize;
    let n = PolyN::n();
    let odd = k % 2 == 1;
    let (shift_num, lower1) = if odd { (2, rat(3, 2)) } else { (1, rat(1, 2)) };
    // α = (s - a - b)/2 - N, β = (s + a + b)/2 + N, δ = (s + a - b)/2
    let alpha = &PolyN::constant(rat(shift_num - a - b, 2)) - &n;
    let beta = &PolyN::constant(rat(shift_num + a + b, 2)) + &n;
    let delta = rat(shift_num + a - b, 2);
    let resonant = delta.is_zero();
    let terms: Vec<PolyN> = (0..=m as u64)
        .map(|i| {
            let num = &pochhammer(&alpha, i) * &pochhammer(&beta, i);
            let den = if resonant {
                if i == 0 {
                    return PolyN::zero();
                }
                pochhammer_rat(&lower1, i) * rat_int(factorial(i - 1)) * rat_int(factorial(i))
            } else {
                pochhammer_rat(&lower1, i) * pochhammer_rat(&delta, i) * rat_int(factorial(i))
            };
            num.scale(&den.recip())
        })
        .collect();
    let mut zm = times_exp_third(&terms, m).swap_remove(m);
    if odd {
        let pre = PolyN::new(vec![rat(-(a + b), 2), rat(-1, 1)]);
        zm = &zm * &pre;
    }
    let m3 = 3 * m as u64;
    let ratio = match (odd, resonant) {
        (false, false) => pochhammer_rat(&delta, m3),
        (true, false) => pochhammer_rat(&delta, m3 + 1),
        (false, true) if m == 0 => return Ok(PolyN::one()),
        (false, true) => rat_int(factorial(m3 - 1)),
        (true, true) => rat_int(factorial(m3)),
    };
    Ok(zm.scale(&ratio))
}

/// 3×3 matrix of series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSeries {
    pub entries: [[PuiseuxSeries; 3]; 3],
}

impl MatrixSeries {
    pub fn from_fn(f: impl Fn(usize, usize) -> PuiseuxSeries) -> Self {
        MatrixSeries {
            entries: std::array::from_fn(|r| std::array::from_fn(|c| f(r, c))),
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> &PuiseuxSeries {
        &self.entries[r][c]
    }

    /// Common validity order of the entries.
    pub fn max_exp(&self) -> i64 {
        self.entries
            .iter()
            .flatten()
            .map(|s| s.max_exp())
            .min()
            .unwrap()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_fn(|r, c| {
            let mut acc = self.entries[r][0].mul(&other.entries[0][c]);
            for k in 1..3 {
                acc = acc.add(&self.entries[r][k].mul(&other.entries[k][c]));
            }
            acc
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(|r, c| self.entries[r][c].sub(&other.entries[r][c]))
    }

    pub fn scale_series(&self, s: &PuiseuxSeries) -> Self {
        Self::from_fn(|r, c| self.entries[r][c].mul(s))
    }

    pub fn trace(&self) -> PuiseuxSeries {
        self.entries[0][0]
            .add(&self.entries[1][1])
            .add(&self.entries[2][2])
    }

    pub fn det(&self) -> PuiseuxSeries {
        let e = &self.entries;
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
            e[r1][c1].mul(&e[r2][c2]).sub(&e[r1][c2].mul(&e[r2][c1]))
        };
        e[0][0]
            .mul(&minor(1, 2, 1, 2))
            .sub(&e[0][1].mul(&minor(1, 2, 0, 2)))
            .add(&e[0][2].mul(&minor(1, 2, 0, 1)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|s| s.is_zero())
    }
}

/// `a` index of the P-polynomials in column `c` of `A`.
pub const COL_A: [i64; 3] = [1, -1, 0];
/// `b` index of the P-polynomials in row `r` of `A`.
pub const ROW_B: [i64; 3] = [-1, 0, 1];
const COL_OFFSET: [i64; 3] = [2, 0, 1];

/// Lowest `x`-exponent of entry `(r, c)` of `A`; the entry only has exponents
/// `base + 3k`.
pub fn a_entry_base(r: usize, c: usize) -> i64 {
    COL_OFFSET[c] - r as i64
}

/// Coefficient of `x^e` in entry `(r, c)` of `A(λ)`.
pub fn a_entry_coeff(r: usize, c: usize, e: i64) -> PolyN {
    let d = e - a_entry_base(r, c);
    if d < 0 || d % 3 != 0 {
        return PolyN::zero();
    }
    let p = p_poly_product(PPolyKey::new(COL_A[c], ROW_B[r], (d / 3) as u64));
    if c == 0 {
        &p * &PolyN::n()
    } else {
        p
    }
}

/// `A(λ)` with every entry valid to `x^order`.
pub fn a_matrix(order: i64) -> MatrixSeries {
    MatrixSeries::from_fn(|r, c| {
        let base = a_entry_base(r, c);
        let kmax = if order < base { -1 } else { (order - base) / 3 };
        PuiseuxSeries::from_terms(
            (0..=kmax).map(|k| (base + 3 * k, a_entry_coeff(r, c, base + 3 * k))),
            order,
        )
    })
}

/// `2 λ^(1/2) = 2 x^(-1)`.
pub fn two_sqrt_lambda(order: i64) -> PuiseuxSeries {
    PuiseuxSeries::monomial(PolyN::from_int(2), -1, order)
}

/// `Tr A = 2λ^(1/2)`, `A² = 2λ^(1/2) A` and `det A = 0`, each to the order it is valid.
pub fn check_a_identities(order: i64) -> bool {
    let a = a_matrix(order);
    let t = a.trace();
    let proj = a.mul(&a).sub(&a.scale_series(&two_sqrt_lambda(order)));
    t == two_sqrt_lambda(t.max_exp()) && proj.is_zero() && a.det().is_zero()
}

/// Keys with `k <= kmax` where the product and hypergeometric routes disagree.
pub fn p_method_mismatches(kmax: u64) -> Vec<PPolyKey> {
    PPolyKey::all(kmax)
        .filter(|&key| p_poly_hypergeom(key).ok() != Some(p_poly_product(key)))
        .collect()
}
