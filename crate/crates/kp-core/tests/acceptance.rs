//! Acceptance criteria 1-10. Prints one line per criterion and exits nonzero
//! if any fails.

use std::time::Instant;

use kp_core::airy_oracle::numeric_suite;
use kp_core::asymptotics::{check_a_identities, check_f_recurrence, p_method_mismatches};
use kp_core::correlators::one_point;
use kp_core::validators::{
    check_closed_limit, identity_suite, regression_tables, wronskian_mismatch,
    Identity, RegressionReport, RowStatus,
};
use kp_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn summarize(r: &RegressionReport) -> String {
    let off: Vec<String> = r
        .rows
        .iter()
        .filter(|row| matches!(row.status, RowStatus::Mismatch | RowStatus::MissingFromComputation))
        .map(|row| format!("{:?}", row.d))
        .collect();
    let listed = if off.is_empty() { String::new() } else { format!(" (differing: {})", off.join(" ")) };
    format!(
        "{}-point d <= {}: {} matched, {} mismatched{listed}, {} missing, {} unlisted, {}/{} forbidden tuples zero",
        r.n,
        r.dmax,
        r.count(RowStatus::Match),
        r.count(RowStatus::Mismatch),
        r.count(RowStatus::MissingFromComputation),
        r.count(RowStatus::Unlisted),
        r.vanishing_checked - r.vanishing_failed.len(),
        r.vanishing_checked,
    )
}

fn one_point_regression() -> Result<Outcome> {
    let report = regression_tables(1)?;
    let g35 = one_point(35)?;
    let unlisted: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Unlisted)
        .map(|r| format!("{:?}", r.d))
        .collect();
    let computed_g35 = report.rows.iter().any(|r| r.d == g35.d);
    outcome(
        report.passed() && computed_g35,
        format!("{}; g = 35 computed, untabulated: {}", summarize(&report), unlisted.join(" ")),
    )
}

fn two_point_regression() -> Result<Outcome> {
    let report = regression_tables(2)?;
    outcome(report.passed() && report.count(RowStatus::Unlisted) == 0, summarize(&report))
}

fn multi_point_regression() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 3..=6 {
        let report = regression_tables(n)?;
        ok &= report.passed() && report.count(RowStatus::Unlisted) == 0;
        parts.push(summarize(&report));
    }
    outcome(ok, parts.join("; "))
}

fn closed_limit() -> Result<Outcome> {
    outcome(check_closed_limit(17)?, "h <= 17")
}

fn p_methods() -> Result<Outcome> {
    let bad = p_method_mismatches(20);
    outcome(bad.is_empty(), format!("9 pairs, k <= 20, {} mismatches", bad.len()))
}

fn a_identities() -> Result<Outcome> {
    let bad: Vec<i64> = (1..=20).filter(|&k| !check_a_identities(k)).collect();
    outcome(bad.is_empty(), format!("K = 1..20, failing orders {bad:?}"))
}

fn f_recurrence() -> Result<Outcome> {
    let bad: Vec<i64> = (0..=30).filter(|&k| !check_f_recurrence(k)).collect();
    outcome(bad.is_empty(), format!("K = 0..30, failing orders {bad:?}"))
}

fn string_dilaton() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for identity in [Identity::String, Identity::Dilaton] {
        let checks = identity_suite(identity, 12, 4)?;
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.ms.clone()).collect();
        ok &= failed.is_empty();
        parts.push(format!("{identity:?}: {}/{} zero {failed:?}", checks.len() - failed.len(), checks.len()));
    }
    outcome(ok, parts.join(", "))
}

fn wronskian() -> Result<Outcome> {
    let one = wronskian_mismatch(1, 15)?;
    let two = wronskian_mismatch(2, 8)?;
    let show = |m: &Option<Vec<i64>>| m.as_ref().map_or("equal".to_string(), |e| format!("differs at {e:?}"));
    outcome(
        one.is_none() && two.is_none(),
        format!("n = 1 to degree 15: {}, n = 2 to degree 8: {}", show(&one), show(&two)),
    )
}

fn numeric() -> Result<Outcome> {
    let probes = numeric_suite(false);
    let failed: Vec<String> = probes
        .iter()
        .filter(|p| !p.passed)
        .map(|p| format!("{} (value {:.3e}, bound {:.3e})", p.name, p.value, p.bound))
        .collect();
    outcome(
        failed.is_empty(),
        format!("{}/{} probes pass; failing: {}", probes.len() - failed.len(), probes.len(), failed.join("; ")),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("one-point regression", one_point_regression),
        ("two-point regression", two_point_regression),
        ("multi-point regression", multi_point_regression),
        ("closed limit", closed_limit),
        ("P-polynomial cross-method equality", p_methods),
        ("A-matrix identities", a_identities),
        ("F recurrence", f_recurrence),
        ("string and dilaton suites", string_dilaton),
        ("Wronskian oracle", wronskian),
        ("numeric suite", numeric),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match run() {
            Ok(o) => (if o.passed { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {:>2} {status} {name} [{:.1}s]: {detail}", i + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
