//! Ordered-region expansion of the cyclic trace sum.
//!
//! The sum over cyclic orders `0 -> σ_2 -> ... -> σ_n -> 0` is organised as a
//! dynamic program over path prefixes keyed by the visited set and the last
//! vertex, so prefixes shared between permutations are expanded once. A
//! variable is complete as soon as both of its edges and its matrix factor
//! have been chosen; its exponent is then final and is clipped exactly.
//!
//! Arithmetic runs over `Z[N]` in the variable `y = x/2`: in `y` every
//! coefficient of `4 A` and of the geometric kernels is an integer, and the
//! factors of 4 cancel between the `n` matrices and the `n` kernels.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::asymptotics::{a_entry_base, a_entry_coeff};
use crate::error::{KpError, Result};
use crate::exactmath::{BigRat, PolyN};

pub const MAX_VARS: usize = 8;

/// How the (n-1)! cyclic orders are traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

/// Target monomials of an expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionConfig {
    pub n: usize,
    /// Lowest exponent kept per variable; monomials at `lo..=1` must cancel.
    pub lo: i64,
    /// Highest exponent kept per variable.
    pub hi: i64,
    /// Geometric terms `m = 0..=cap` per kernel.
    pub cap: u32,
    /// Only tuples with `e_0 <= e_1 <= ... <= e_{n-1}`.
    pub sorted: bool,
    /// Only tuples with this exponent sum.
    pub total: Option<i64>,
    pub exec: Exec,
}

impl ExpansionConfig {
    pub fn window(n: usize, hi: i64, cap: u32) -> Self {
        ExpansionConfig { n, lo: 0, hi, cap, sorted: false, total: None, exec: Exec::default() }
    }

    fn upper_total(&self) -> i64 {
        self.total.unwrap_or(self.n as i64 * self.hi)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ZPoly(Vec<BigInt>);

impl ZPoly {
    fn from_poly(p: &PolyN, scale: &BigInt) -> Option<ZPoly> {
        let mut out = Vec::with_capacity(p.coeffs().len());
        for c in p.coeffs() {
            let v = c * BigRat::from_integer(scale.clone());
            if !v.is_integer() {
                return None;
            }
            out.push(v.to_integer());
        }
        Some(ZPoly(out))
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    fn add_assign(&mut self, other: &ZPoly) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), BigInt::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    /// `self += sign * a * b`
    fn add_mul(&mut self, a: &ZPoly, b: &ZPoly, negate: bool) {
        if a.0.is_empty() || b.0.is_empty() {
            return;
        }
        let len = a.0.len() + b.0.len() - 1;
        if self.0.len() < len {
            self.0.resize(len, BigInt::zero());
        }
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                let p = x * y;
                if negate {
                    self.0[i + j] -= p;
                } else {
                    self.0[i + j] += p;
                }
            }
        }
    }

    fn to_poly(&self, den: &BigInt, negate: bool) -> PolyN {
        PolyN::new(
            self.0
                .iter()
                .map(|c| {
                    let c = if negate { -c } else { c.clone() };
                    BigRat::new(c, den.clone())
                })
                .collect(),
        )
    }
}

/// `4 A` in `y`: entry `(r, c)` at exponent `e` scaled by `2^(e+2)`, looked up
/// by row and exponent (the column is fixed by `e mod 3`).
struct ATable {
    rows: [Vec<Option<(u8, ZPoly)>>; 3],
}

impl ATable {
    fn build(amax: i64) -> Result<ATable> {
        let mut rows: [Vec<Option<(u8, ZPoly)>>; 3] = Default::default();
        for (r, row) in rows.iter_mut().enumerate() {
            for e in -2..=amax {
                let c = (0..3)
                    .find(|&c| (e - a_entry_base(r, c)).rem_euclid(3) == 0)
                    .expect("residues of a row are distinct");
                let p = a_entry_coeff(r, c, e);
                let entry = if p.is_zero() {
                    None
                } else {
                    let scale = BigInt::one() << (e + 2) as usize;
                    let z = ZPoly::from_poly(&p, &scale).ok_or_else(|| {
                        KpError::NotComputed(format!("non-integral scaled entry ({r},{c}) at x^{e}"))
                    })?;
                    Some((c as u8, z))
                };
                row.push(entry);
            }
        }
        Ok(ATable { rows })
    }

    fn get(&self, row: u8, e: i64) -> Option<&(u8, ZPoly)> {
        if e < -2 {
            return None;
        }
        self.rows[row as usize].get((e + 2) as usize)?.as_ref()
    }
}

const OPEN: i8 = i8::MIN;

/// Partial cycle `0 -> ... -> v` with `v` the last vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Key {
    /// Final exponents of completed variables (`OPEN` otherwise).
    done: [i8; MAX_VARS],
    /// Row of the matrix at vertex 0, which the closing column must match.
    r0: u8,
    /// Row of the matrix at `v`.
    row: u8,
    /// Exponent collected so far by vertex 0.
    p0: i16,
    /// Exponent collected so far by `v` from its incoming kernel.
    pv: i16,
}

type Group = HashMap<Key, ZPoly>;

/// Exponents contributed by the kernel of edge `u -> w` to `(u, w)`, and its sign.
fn edge(u: usize, w: usize, m: i64) -> (i64, i64, bool) {
    if u < w {
        (2 * m + 2, -2 * m, false)
    } else {
        (-2 * m, 2 * m + 2, true)
    }
}

struct Ctx<'a> {
    cfg: &'a ExpansionConfig,
    atab: ATable,
    ub: i64,
}

impl Ctx<'_> {
    fn n(&self) -> usize {
        self.cfg.n
    }

    /// Largest matrix exponent still affordable at the current vertex.
    fn a_budget(&self, key: &Key, visited: usize) -> i64 {
        let n = self.n() as i64;
        let done_sum: i64 = key.done.iter().filter(|&&e| e != OPEN).map(|&e| e as i64).sum();
        let edges_done = visited as i64 - 1;
        let rem_a = n - visited as i64 + 1;
        let assigned = done_sum + key.p0 as i64 + key.pv as i64 - 2 * edges_done;
        self.ub - 2 * n - assigned + 2 * (rem_a - 1)
    }

    fn feasible(&self, key: &Key, visited: usize) -> bool {
        if self.a_budget(key, visited) < -2 {
            return false;
        }
        if let Some(total) = self.cfg.total {
            let done: Vec<i64> = key.done.iter().filter(|&&e| e != OPEN).map(|&e| e as i64).collect();
            let open = self.n() - done.len();
            if done.iter().sum::<i64>() + open as i64 * self.cfg.hi < total {
                return false;
            }
        }
        true
    }

    /// Range of admissible final exponents for `v`.
    fn exponent_range(&self, key: &Key, v: usize) -> (i64, i64) {
        let mut lo = self.cfg.lo;
        let mut hi = self.cfg.hi;
        if self.cfg.sorted {
            // e_0 >= p0 + 2 and e_0 <= e_v
            lo = lo.max(key.p0 as i64 + 2);
            for (u, &e) in key.done.iter().enumerate().take(self.n()) {
                if e == OPEN {
                    continue;
                }
                if u < v {
                    lo = lo.max(e as i64);
                } else {
                    hi = hi.min(e as i64);
                }
            }
        }
        (lo, hi)
    }

    fn start(&self) -> HashMap<(u16, u8), Group> {
        let mut out: HashMap<(u16, u8), Group> = HashMap::new();
        let n = self.n();
        let a_max = self.ub - 2 * n as i64 + 2 * (n as i64 - 1);
        for w in 1..n {
            let group = out.entry((1 | (1 << w), w as u8)).or_default();
            for r0 in 0..3u8 {
                for a in -2..=a_max {
                    let Some((col, z)) = self.atab.get(r0, a) else { continue };
                    for m in 0..=self.cfg.cap as i64 {
                        let (g0, gw, _) = edge(0, w, m);
                        let p0 = a + g0;
                        if p0 + 2 > self.cfg.hi {
                            break;
                        }
                        let key = Key {
                            done: [OPEN; MAX_VARS],
                            r0,
                            row: *col,
                            p0: p0 as i16,
                            pv: gw as i16,
                        };
                        if !self.feasible(&key, 2) {
                            continue;
                        }
                        group.entry(key).or_default().add_assign(z);
                    }
                }
            }
        }
        out
    }

    fn step(&self, mask: u16, v: usize, group: &Group, w: usize) -> Group {
        let visited = mask.count_ones() as usize;
        let mut out = Group::new();
        for (key, coef) in group {
            let (elo, ehi) = self.exponent_range(key, v);
            let budget = self.a_budget(key, visited);
            for e in elo..=ehi {
                for m in 0..=self.cfg.cap as i64 {
                    let (gv, gw, neg) = edge(v, w, m);
                    let a = e - key.pv as i64 - gv;
                    if a > budget {
                        if gv < 0 {
                            break;
                        }
                        continue;
                    }
                    let Some((col, z)) = self.atab.get(key.row, a) else { continue };
                    let mut next = *key;
                    next.done[v] = e as i8;
                    next.row = *col;
                    next.pv = gw as i16;
                    if !self.feasible(&next, visited + 1) {
                        continue;
                    }
                    out.entry(next).or_default().add_mul(coef, z, neg);
                }
            }
        }
        out.retain(|_, z| !z.is_zero());
        out
    }

    fn close(&self, v: usize, group: &Group) -> BTreeMap<Vec<i64>, ZPoly> {
        let n = self.n();
        let mut out: BTreeMap<Vec<i64>, ZPoly> = BTreeMap::new();
        for (key, coef) in group {
            let (elo, ehi) = self.exponent_range(key, v);
            let budget = self.a_budget(key, n);
            for e in elo..=ehi {
                for m in 0..=self.cfg.cap as i64 {
                    let (gv, g0, neg) = edge(v, 0, m);
                    let a = e - key.pv as i64 - gv;
                    if a > budget {
                        break;
                    }
                    let Some((col, z)) = self.atab.get(key.row, a) else { continue };
                    if *col != key.r0 {
                        continue;
                    }
                    let e0 = key.p0 as i64 + g0;
                    if e0 < self.cfg.lo || e0 > self.cfg.hi {
                        continue;
                    }
                    let mut exps: Vec<i64> = key.done[..n].iter().map(|&d| d as i64).collect();
                    exps[v] = e;
                    exps[0] = e0;
                    if self.cfg.sorted && exps.windows(2).any(|p| p[0] > p[1]) {
                        continue;
                    }
                    if self.cfg.total.is_some_and(|t| exps.iter().sum::<i64>() != t) {
                        continue;
                    }
                    out.entry(exps).or_default().add_mul(coef, z, neg);
                }
            }
        }
        out
    }
}

#[cfg(feature = "parallel")]
fn run_tasks<T: Send, R: Send>(exec: Exec, tasks: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    match exec {
        Exec::Parallel => tasks.into_par_iter().map(f).collect(),
        Exec::Sequential => tasks.into_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_tasks<T: Send, R: Send>(_exec: Exec, tasks: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    tasks.into_iter().map(f).collect()
}

/// `Σ_{σ: σ_1 = 0} Tr A(λ_σ1)...A(λ_σn) / ((λ_σ1-λ_σ2)...(λ_σn-λ_σ1))` restricted
/// to the configured monomials, as exact coefficients in `x`.
pub fn cyclic_trace_sum(cfg: &ExpansionConfig) -> Result<BTreeMap<Vec<i64>, PolyN>> {
    let n = cfg.n;
    assert!((2..=MAX_VARS).contains(&n), "2 <= n <= {MAX_VARS}");
    assert!(cfg.hi < i8::MAX as i64 && cfg.lo > i8::MIN as i64);
    let ub = cfg.upper_total();
    let amax = ub - 2 * n as i64 + 2 * (n as i64 - 1);
    let ctx = Ctx { cfg, atab: ATable::build(amax)?, ub };

    let mut layer = ctx.start();
    for _ in 2..n {
        let mut tasks = Vec::new();
        for (&(mask, v), group) in &layer {
            for w in 1..n {
                if mask & (1 << w) == 0 {
                    tasks.push((mask, v as usize, group, w));
                }
            }
        }
        let results = run_tasks(cfg.exec, tasks, |(mask, v, group, w)| {
            ((mask | (1 << w), w as u8), ctx.step(mask, v, group, w))
        });
        let mut next: HashMap<(u16, u8), Group> = HashMap::new();
        for (k, g) in results {
            let slot = next.entry(k).or_default();
            if slot.is_empty() {
                *slot = g;
                continue;
            }
            for (key, z) in g {
                slot.entry(key).or_default().add_assign(&z);
            }
        }
        layer = next;
    }

    let tasks: Vec<_> = layer.iter().map(|(&(_, v), g)| (v as usize, g)).collect();
    let partials = run_tasks(cfg.exec, tasks, |(v, g)| ctx.close(v, g));
    let mut acc: BTreeMap<Vec<i64>, ZPoly> = BTreeMap::new();
    for part in partials {
        for (e, z) in part {
            acc.entry(e).or_default().add_assign(&z);
        }
    }
    let mut out = BTreeMap::new();
    for (e, z) in acc {
        if z.is_zero() {
            continue;
        }
        let total: i64 = e.iter().sum();
        if total < 0 {
            return Err(KpError::NotComputed(format!("negative total degree at {e:?}")));
        }
        let den = BigInt::one() << total as usize;
        out.insert(e, z.to_poly(&den, false));
    }
    Ok(out)
}
