use super::*;
use crate::asymptotics::{a_entry_base, a_entry_coeff};
use crate::puiseux::{geom_inverse_diff, multi_mul_in, GeomKind};
use proptest::prelude::*;

fn p(s: &str) -> PolyN {
    s.parse().unwrap()
}

/// Direct product of series over all cyclic orders, one permutation at a time.
fn naive_s_n(n: usize, hi: i64, cap: u32) -> BTreeMap<Vec<i64>, PolyN> {
    let slack = 4 * cap as i64 + 4;
    let lo_w = vec![-slack; n];
    let hi_w = vec![hi + slack; n];
    let mut total = MultiSeries::new(lo_w.clone(), hi_w.clone());
    let mut rest: Vec<usize> = (1..n).collect();
    let mut perms = Vec::new();
    permute(&mut rest, 0, &mut perms);
    for perm in perms {
        let order: Vec<usize> = std::iter::once(0).chain(perm).collect();
        // Tr A(x_σ1) ⋯ A(x_σn) as a sum over index cycles
        let mut trace = MultiSeries::new(lo_w.clone(), hi_w.clone());
        for idx in 0..3usize.pow(n as u32) {
            let rows: Vec<usize> = (0..n).map(|k| (idx / 3usize.pow(k as u32)) % 3).collect();
            let mut term = MultiSeries::monomial(lo_w.clone(), hi_w.clone(), &vec![0; n], PolyN::one()).unwrap();
            for k in 0..n {
                let (r, c) = (rows[k], rows[(k + 1) % n]);
                let mut entry = MultiSeries::new(lo_w.clone(), hi_w.clone());
                let base = a_entry_base(r, c);
                let mut e = base;
                while e <= hi + slack {
                    let coef = a_entry_coeff(r, c, e);
                    if !coef.is_zero() {
                        let mut exps = vec![0; n];
                        exps[order[k]] = e;
                        entry.add_term(&exps, &coef).unwrap();
                    }
                    e += 3;
                }
                term = multi_mul_in(&term, &entry, lo_w.clone(), hi_w.clone()).unwrap();
            }
            trace = trace.add(&term).unwrap();
        }
        let mut prod = trace;
        for k in 0..n {
            let g = geom_inverse_diff(n, order[k], order[(k + 1) % n], GeomKind::Simple, cap);
            prod = multi_mul_in(&prod, &g, lo_w.clone(), hi_w.clone()).unwrap();
        }
        total = total.sub(&prod).unwrap();
    }
    if n == 2 {
        let h = geom_inverse_diff(2, 0, 1, GeomKind::HalfSquare, cap);
        total = total.sub(&h).unwrap();
    }
    total
        .terms()
        .filter(|(e, c)| e.iter().all(|&x| (0..=hi).contains(&x)) && !c.is_zero())
        .map(|(e, c)| (e.to_vec(), c.clone()))
        .collect()
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

fn engine_terms(n: usize, hi: i64, cap: u32) -> BTreeMap<Vec<i64>, PolyN> {
    s_n_expansion(n, (hi - 2) as u32, cap)
        .unwrap()
        .terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e.to_vec(), c.clone()))
        .collect()
}

#[test]
fn prefactor_values() {
    assert_eq!(prefactor(0), TwoCubeScaled::new(PolyN::from_int(-1), -1));
    assert_eq!(prefactor(2).fold().unwrap(), PolyN::constant(rat(-3, 2)));
    assert_eq!(prefactor(5), TwoCubeScaled::new(PolyN::from_int(48), -6));
    assert_eq!(prefactor(5).fold().unwrap(), PolyN::from_int(12));
    assert_eq!(prefactor(0).fold(), Err(KpError::ExponentNotDivisible(-1)));
    assert_eq!(TwoCubeScaled::new(PolyN::zero(), 1).fold().unwrap(), PolyN::zero());
}

#[test]
fn one_point_values() {
    assert_eq!(one_point(1).unwrap().value, p("1/24 + 1/2*N^2"));
    assert_eq!(one_point(1).unwrap().d, vec![2]);
    assert_eq!(one_point(2).unwrap().value, p("1/12*N + 1/12*N^3"));
    assert_eq!(one_point(3).unwrap().value, p("1/1152 + 7/144*N^2 + 1/72*N^4"));
}

#[test]
fn one_point_generating_function() {
    assert!(one_point_genfun_check(3));
    assert!(one_point_genfun_check(10));
    let mut values: Vec<PolyN> = (1..=4).map(|g| one_point(g).unwrap().value).collect();
    assert!(one_point_genfun_matches(&values));
    values[0] = &values[0] + &PolyN::one();
    assert!(!one_point_genfun_matches(&values));
}

#[test]
fn engine_matches_direct_products() {
    assert_eq!(engine_terms(2, 8, 10), naive_s_n(2, 8, 10));
    assert_eq!(engine_terms(3, 5, 4), naive_s_n(3, 5, 4));
}

#[test]
fn two_point_coefficients() {
    let s = s_n_expansion(2, 4, 10).unwrap();
    let c = s.coeff(&[2, 3]);
    assert_eq!(correlator_from_coeff(&[0, 1], &c).unwrap(), PolyN::n());
    let c = s.coeff(&[4, 4]);
    assert_eq!(correlator_from_coeff(&[2, 2], &c).unwrap(), p("1/24 + 1/2*N^2"));
}

#[test]
fn three_point_dimensional_vanishing() {
    let s = s_n_expansion(3, 4, 10).unwrap();
    let mut nonzero = 0;
    for (e, c) in s.terms() {
        let d: Vec<u32> = e.iter().map(|&x| (x - 2) as u32).collect();
        if !Correlator::dimension_ok(&d) {
            assert!(c.is_zero(), "{e:?}");
        } else if !c.is_zero() {
            nonzero += 1;
        }
    }
    assert!(nonzero > 10);
}

#[test]
fn two_point_vanishing_exhaustive() {
    let table = correlator_table(2, 10).unwrap();
    for a in 0..=10u32 {
        for b in a..=10 {
            let v = table.get(&vec![a, b]).cloned().unwrap_or_else(PolyN::zero);
            if !Correlator::dimension_ok(&[a, b]) {
                assert!(v.is_zero(), "[{a},{b}]");
            }
        }
    }
}

#[test]
fn window_expansion_is_symmetric() {
    for (n, dmax) in [(2usize, 8u32), (3, 4), (4, 2)] {
        let s = s_n_expansion(n, dmax, default_cap(dmax)).unwrap();
        for (e, c) in s.terms() {
            let mut rev = e.to_vec();
            rev.reverse();
            assert_eq!(&s.coeff(&rev), c, "{e:?}");
            let mut rot = e.to_vec();
            rot.rotate_left(1);
            assert_eq!(&s.coeff(&rot), c, "{e:?}");
        }
    }
}

#[test]
fn two_point_correction_cancels_below_window() {
    let cfg = ExpansionConfig {
        lo: -6,
        ..ExpansionConfig::window(2, 6, 12)
    };
    let terms = s_n_terms(&cfg).unwrap();
    assert!(terms.keys().all(|e| e.iter().all(|&x| x >= 2)));
}

#[test]
fn cancellation_failure_is_reported() {
    // with no geometric terms the exponent-2 monomials cannot cancel
    let cfg = ExpansionConfig::window(2, 4, 0);
    assert!(matches!(s_n_terms(&cfg), Err(KpError::CancellationFailure { .. })));
}

#[test]
fn extract_values() {
    assert_eq!(extract(&[0, 1], 2).unwrap().value, PolyN::n());
    assert_eq!(extract(&[1, 0], 2).unwrap().d, vec![0, 1]);
    assert_eq!(
        extract(&[8, 8], 8).unwrap().value,
        p("607/1451520 + 130284/1451520*N^2 + 89040/1451520*N^4 + 6720/1451520*N^6")
    );
    assert!(extract(&[4, 4], 4).unwrap().value.is_zero());
    assert_eq!(extract(&[0, 0, 0], 0).unwrap().value, PolyN::one());
    assert_eq!(extract(&[2], 2).unwrap().value, p("1/24 + 1/2*N^2"));
    assert!(extract(&[0], 0).unwrap().value.is_zero());
    assert!(matches!(extract(&[0, 5], 4), Err(KpError::NotComputed(_))));
}

#[test]
fn stability_examples() {
    assert!(stability_check(&[0, 1], 2));
    assert!(stability_check(&[4, 4, 4], 4));
    assert_eq!(extract(&[4, 4, 4], 4).unwrap().value, p("7/240 + 3/2*N^2 + N^4"));
    assert!(!stability_check_with_cap(&[8, 8], 8, 0));
}

#[test]
fn sorted_and_total_modes_agree_with_window() {
    let full = engine_terms(3, 6, 12);
    let sorted = s_n_terms(&ExpansionConfig { sorted: true, ..ExpansionConfig::window(3, 6, 12) }).unwrap();
    for (e, c) in &sorted {
        assert_eq!(full.get(e), Some(c));
    }
    assert_eq!(sorted.len(), full.keys().filter(|e| e.windows(2).all(|w| w[0] <= w[1])).count());
    for total in 6..=18 {
        let cfg = ExpansionConfig {
            sorted: true,
            total: Some(total),
            ..ExpansionConfig::window(3, 6, 12)
        };
        let slice = s_n_terms(&cfg).unwrap();
        let expected: BTreeMap<_, _> =
            sorted.iter().filter(|(e, _)| e.iter().sum::<i64>() == total).map(|(e, c)| (e.clone(), c.clone())).collect();
        assert_eq!(slice, expected, "total {total}");
    }
}

#[test]
fn sequential_matches_parallel() {
    let mut cfg = ExpansionConfig { sorted: true, ..ExpansionConfig::window(4, 5, 9) };
    let par = s_n_terms(&cfg).unwrap();
    cfg.exec = Exec::Sequential;
    assert_eq!(par, s_n_terms(&cfg).unwrap());
}

#[test]
fn cache_matches_extract() {
    let cache = CorrelatorCache::default();
    assert_eq!(cache.get(&[1, 0]).unwrap(), PolyN::n());
    assert_eq!(cache.get(&[2, 2, 2]).unwrap(), extract(&[2, 2, 2], 2).unwrap().value);
    assert!(cache.get(&[0, 0]).unwrap().is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn extract_is_order_independent(d in proptest::collection::vec(0u32..4, 2..4), seed in any::<u64>()) {
        let mut shuffled = d.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        if seed % 2 == 0 {
            shuffled.reverse();
        }
        let a = extract(&d, 3).unwrap();
        let b = extract(&shuffled, 3).unwrap();
        prop_assert_eq!(a, b);
    }
}
