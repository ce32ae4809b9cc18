//! Exact rational scalars and polynomials in the symbolic parameter `N`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Reduced arbitrary-precision rational with positive denominator.
pub type BigRat = BigRational;

pub fn rat(num: i64, den: i64) -> BigRat {
    BigRat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: impl Into<BigInt>) -> BigRat {
    BigRat::from_integer(v.into())
}

/// `k!! = k (k-2) (k-4) ...`, with `0!! = 1`.
pub fn double_factorial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut j = k;
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    acc
}

pub fn factorial(k: u64) -> BigInt {
    (2..=k).fold(BigInt::one(), |acc, j| acc * j)
}

/// `Γ(1/2 + m) / Γ(1/2) = (2m-1)!! / 2^m`.
pub fn gamma_half_ratio(m: u64) -> BigRat {
    if m == 0 {
        return BigRat::one();
    }
    BigRat::new(double_factorial(2 * m - 1), BigInt::one() << m)
}

/// Rising factorial `(x)_n` of a rational.
pub fn pochhammer_rat(x: &BigRat, n: u64) -> BigRat {
    let mut acc = BigRat::one();
    let mut t = x.clone();
    for _ in 0..n {
        acc *= &t;
        t += BigRat::one();
    }
    acc
}

/// Rising factorial `(p)_n` of a polynomial.
pub fn pochhammer(p: &PolyN, n: u64) -> PolyN {
    let mut acc = PolyN::one();
    let mut t = p.clone();
    for _ in 0..n {
        acc = &acc * &t;
        t += &PolyN::one();
    }
    acc
}

/// `binom(-N, k) = (-N)(-N-1)...(-N-k+1) / k!` as a polynomial in `N`.
pub fn binom_neg_n(k: u64) -> PolyN {
    let mut acc = PolyN::one();
    for i in 0..k {
        acc = &acc * &PolyN::new(vec![rat_int(-(i as i64)), rat_int(-1)]);
    }
    acc.scale(&BigRat::new(BigInt::one(), factorial(k)))
}

pub fn poly_eval(p: &PolyN, v: &BigRat) -> BigRat {
    p.eval(v)
}

/// Polynomial in `N` with rational coefficients, ascending order, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolyN {
    coeffs: Vec<BigRat>,
}

impl PolyN {
    pub fn new(mut coeffs: Vec<BigRat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyN { coeffs }
    }

    pub fn zero() -> Self {
        PolyN { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRat::one())
    }

    pub fn constant(c: BigRat) -> Self {
        Self::new(vec![c])
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(rat_int(c))
    }

    /// The indeterminate `N`.
    pub fn n() -> Self {
        Self::monomial(BigRat::one(), 1)
    }

    pub fn monomial(c: BigRat, k: usize) -> Self {
        let mut v = vec![BigRat::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRat {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRat::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<BigRat> {
        match self.coeffs.len() {
            0 => Some(BigRat::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn eval(&self, v: &BigRat) -> BigRat {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRat::zero(), |acc, c| acc * v + c)
    }

    pub fn scale(&self, s: &BigRat) -> PolyN {
        if s.is_zero() {
            return PolyN::zero();
        }
        PolyN::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `p(s N + t)`.
    pub fn compose_affine(&self, s: &BigRat, t: &BigRat) -> PolyN {
        let lin = PolyN::new(vec![t.clone(), s.clone()]);
        self.coeffs.iter().rev().fold(PolyN::zero(), |acc, c| {
            &(&acc * &lin) + &PolyN::constant(c.clone())
        })
    }

    /// `self += a * b` without materialising the product.
    pub fn add_mul_assign(&mut self, a: &PolyN, b: &PolyN) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let len = a.coeffs.len() + b.coeffs.len() - 1;
        if self.coeffs.len() < len {
            self.coeffs.resize(len, BigRat::zero());
        }
        for (i, x) in a.coeffs.iter().enumerate() {
            for (j, y) in b.coeffs.iter().enumerate() {
                self.coeffs[i + j] += x * y;
            }
        }
        self.trim();
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Coefficients as `(numerator, denominator)` decimal strings.
    pub fn to_pairs(&self) -> Vec<[String; 2]> {
        self.coeffs
            .iter()
            .map(|c| [c.numer().to_string(), c.denom().to_string()])
            .collect()
    }

    pub fn from_pairs(pairs: &[[String; 2]]) -> Result<PolyN, ParsePolyError> {
        let mut cs = Vec::with_capacity(pairs.len());
        for [n, d] in pairs {
            let n: BigInt = n.parse().map_err(|_| ParsePolyError(n.clone()))?;
            let d: BigInt = d.parse().map_err(|_| ParsePolyError(d.clone()))?;
            if d.is_zero() {
                return Err(ParsePolyError("zero denominator".into()));
            }
            cs.push(BigRat::new(n, d));
        }
        Ok(PolyN::new(cs))
    }
}

impl Add<&PolyN> for &PolyN {
    type Output = PolyN;
    fn add(self, rhs: &PolyN) -> PolyN {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for PolyN {
    type Output = PolyN;
    fn add(mut self, rhs: PolyN) -> PolyN {
        self += &rhs;
        self
    }
}

impl AddAssign<&PolyN> for PolyN {
    fn add_assign(&mut self, rhs: &PolyN) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), BigRat::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self.trim();
    }
}

impl Sub<&PolyN> for &PolyN {
    type Output = PolyN;
    fn sub(self, rhs: &PolyN) -> PolyN {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for PolyN {
    type Output = PolyN;
    fn sub(mut self, rhs: PolyN) -> PolyN {
        self -= &rhs;
        self
    }
}

impl SubAssign<&PolyN> for PolyN {
    fn sub_assign(&mut self, rhs: &PolyN) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), BigRat::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self.trim();
    }
}

impl Mul<&PolyN> for &PolyN {
    type Output = PolyN;
    fn mul(self, rhs: &PolyN) -> PolyN {
        let mut out = PolyN::zero();
        out.add_mul_assign(self, rhs);
        out
    }
}

impl Mul for PolyN {
    type Output = PolyN;
    fn mul(self, rhs: PolyN) -> PolyN {
        &self * &rhs
    }
}

impl MulAssign<&PolyN> for PolyN {
    fn mul_assign(&mut self, rhs: &PolyN) {
        *self = &*self * rhs;
    }
}

impl Neg for &PolyN {
    type Output = PolyN;
    fn neg(self) -> PolyN {
        PolyN { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for PolyN {
    type Output = PolyN;
    fn neg(self) -> PolyN {
        -&self
    }
}

impl From<BigRat> for PolyN {
    fn from(c: BigRat) -> Self {
        PolyN::constant(c)
    }
}

impl From<i64> for PolyN {
    fn from(c: i64) -> Self {
        PolyN::from_int(c)
    }
}

/// Human form, e.g. `1/24 + 1/2*N^2`.
impl fmt::Display for PolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let a = c.abs();
            let var = match k {
                0 => String::new(),
                1 => "N".to_string(),
                _ => format!("N^{k}"),
            };
            if k == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{a}*{var}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial: {0}")]
pub struct ParsePolyError(pub String);

impl FromStr for PolyN {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ParsePolyError(s));
        }
        let mut acc = PolyN::zero();
        let bytes = s.as_bytes();
        let mut start = 0;
        let mut i = 0;
        while i <= bytes.len() {
            let at_split = i == bytes.len()
                || (i > start && (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^');
            if at_split {
                acc += &parse_term(&s[start..i])?;
                start = i;
            }
            i += 1;
        }
        Ok(acc)
    }
}

fn parse_term(t: &str) -> Result<PolyN, ParsePolyError> {
    let err = || ParsePolyError(t.to_string());
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    if body.is_empty() {
        return Err(err());
    }
    let (coef, var) = match body.find('N') {
        None => (body, None),
        Some(p) => {
            let c = body[..p].strip_suffix('*').unwrap_or(&body[..p]);
            if p > 0 && !body[..p].ends_with('*') {
                return Err(err());
            }
            (c, Some(&body[p + 1..]))
        }
    };
    let mut c = if coef.is_empty() {
        BigRat::one()
    } else {
        parse_rat(coef).ok_or_else(err)?
    };
    if neg {
        c = -c;
    }
    let k = match var {
        None => 0,
        Some("") => 1,
        Some(rest) => rest
            .strip_prefix('^')
            .and_then(|e| e.parse::<usize>().ok())
            .ok_or_else(err)?,
    };
    Ok(PolyN::monomial(c, k))
}

pub fn parse_rat(s: &str) -> Option<BigRat> {
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(BigRat::from_integer),
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            (!d.is_zero()).then(|| BigRat::new(n, d))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    coeffs: Vec<[String; 2]>,
}

impl Serialize for PolyN {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr { coeffs: self.to_pairs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyN {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PolyRepr::deserialize(d)?;
        PolyN::from_pairs(&r.coeffs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: u64, k: u64) -> BigInt {
        factorial(n) / (factorial(k) * factorial(n - k))
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(0), BigInt::from(1));
        assert_eq!(double_factorial(1), BigInt::from(1));
        assert_eq!(double_factorial(5), BigInt::from(15));
        assert_eq!(double_factorial(6), BigInt::from(48));
    }

    #[test]
    fn gamma_half_ratio_values() {
        assert_eq!(gamma_half_ratio(0), rat(1, 1));
        assert_eq!(gamma_half_ratio(1), rat(1, 2));
        assert_eq!(gamma_half_ratio(3), rat(15, 8));
        for m in 0..=50u64 {
            assert_eq!(
                gamma_half_ratio(m + 1),
                gamma_half_ratio(m) * rat(2 * m as i64 + 1, 2)
            );
        }
    }

    #[test]
    fn binom_neg_n_values() {
        assert_eq!(binom_neg_n(0), PolyN::one());
        assert_eq!(binom_neg_n(1), PolyN::from_ints(&[0, -1]));
        assert_eq!(
            binom_neg_n(2),
            PolyN::new(vec![rat(0, 1), rat(1, 2), rat(1, 2)])
        );
        for n in 0..=10u64 {
            for k in 0..=n {
                let v = binom_neg_n(k).eval(&rat_int(-(n as i64)));
                assert_eq!(v, BigRat::from_integer(binom(n, k)), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn eval_examples() {
        let p: PolyN = "1/24 + 1/2*N^2".parse().unwrap();
        assert_eq!(poly_eval(&p, &rat(0, 1)), rat(1, 24));
        assert_eq!(poly_eval(&p, &rat(1, 1)), rat(13, 24));
        assert_eq!(poly_eval(&PolyN::from_ints(&[0, -1]), &rat(2, 1)), rat(-2, 1));
    }

    #[test]
    fn display_and_parse() {
        let p = PolyN::new(vec![rat(1, 24), rat(0, 1), rat(1, 2)]);
        assert_eq!(p.to_string(), "1/24 + 1/2*N^2");
        assert_eq!(PolyN::from_ints(&[0, 1]).to_string(), "N");
        assert_eq!(PolyN::from_ints(&[0, -1]).to_string(), "-N");
        assert_eq!(PolyN::zero().to_string(), "0");
        let q = PolyN::new(vec![rat(-3, 7), rat(1, 1), rat(0, 1), rat(-5, 2)]);
        assert_eq!(q.to_string(), "-3/7 + N - 5/2*N^3");
        assert_eq!(q.to_string().parse::<PolyN>().unwrap(), q);
        assert!("N^".parse::<PolyN>().is_err());
        assert!("2N".parse::<PolyN>().is_err());
    }

    #[test]
    fn compose_affine_shift() {
        // (N+1)^2 = N^2 + 2N + 1
        let sq = PolyN::from_ints(&[0, 0, 1]);
        assert_eq!(
            sq.compose_affine(&rat(1, 1), &rat(1, 1)),
            PolyN::from_ints(&[1, 2, 1])
        );
        assert_eq!(
            sq.compose_affine(&rat(-1, 1), &rat(-2, 1)),
            PolyN::from_ints(&[4, 4, 1])
        );
    }

    #[test]
    fn json_round_trip() {
        let p = PolyN::new(vec![rat(607, 1451520), rat(0, 1), rat(-7, 3)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"coeffs":[["607","1451520"],["0","1"],["-7","3"]]}"#);
        assert_eq!(serde_json::from_str::<PolyN>(&s).unwrap(), p);
    }

    fn arb_poly() -> impl Strategy<Value = PolyN> {
        prop::collection::vec((-1_000_000i64..=1_000_000, 1i64..=1_000_000), 0..=9).prop_map(
            |cs| PolyN::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()),
        )
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn parse_inverts_display(a in arb_poly()) {
            prop_assert_eq!(a.to_string().parse::<PolyN>().unwrap(), a);
        }

        #[test]
        fn eval_is_a_homomorphism(a in arb_poly(), b in arb_poly(), v in -50i64..50) {
            let v = rat_int(v);
            prop_assert_eq!((&a * &b).eval(&v), a.eval(&v) * b.eval(&v));
        }
    }
}
