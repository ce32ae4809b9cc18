//! Validation suites behind `kp check`.

use clap::ValueEnum;
use kp_core::airy_oracle::numeric_suite;
use kp_core::asymptotics::{check_a_identities, check_f_recurrence, p_method_mismatches};
use kp_core::correlators::one_point_genfun_check;
use kp_core::validators::{
    check_closed_limit, identity_suite, regression_tables, wronskian_mismatch, Identity, RowStatus,
};
use kp_core::Result;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    String,
    Dilaton,
    Closed,
    Tables,
    Wronskian,
    Amatrix,
    Ppoly,
    Numeric,
}

const EACH: [Suite; 8] = [
    Suite::String,
    Suite::Dilaton,
    Suite::Closed,
    Suite::Tables,
    Suite::Wronskian,
    Suite::Amatrix,
    Suite::Ppoly,
    Suite::Numeric,
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn human(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{status} {} {}: {}\n", c.suite.name(), c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        s.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        s
    }
}

impl Suite {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

struct Runner {
    suite: Suite,
    out: Vec<CheckResult>,
}

impl Runner {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.out.push(CheckResult { suite: self.suite, name: name.into(), passed, detail: detail.into() });
    }

    fn push_result(&mut self, name: &str, r: Result<(bool, String)>) {
        match r {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

pub fn run(suite: Suite, quick: bool) -> CheckReport {
    let suites: Vec<Suite> = if suite == Suite::All { EACH.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for s in suites {
        let mut r = Runner { suite: s, out: Vec::new() };
        run_one(&mut r, quick);
        checks.extend(r.out);
    }
    CheckReport { passed: checks.iter().all(|c| c.passed), checks }
}

fn run_one(r: &mut Runner, quick: bool) {
    match r.suite {
        Suite::All => unreachable!("expanded by run"),
        Suite::String | Suite::Dilaton => {
            let identity = if r.suite == Suite::String { Identity::String } else { Identity::Dilaton };
            let (max_sum, points) = if quick { (8, 3) } else { (12, 4) };
            let res = identity_suite(identity, max_sum, points).map(|checks| {
                let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.ms.clone()).collect();
                let detail = format!(
                    "{}/{} residuals vanish (sum m <= {max_sum}, up to {points} points){}",
                    checks.len() - failed.len(),
                    checks.len(),
                    if failed.is_empty() { String::new() } else { format!("; nonzero at {failed:?}") }
                );
                (failed.is_empty(), detail)
            });
            r.push_result("identity residuals", res);
        }
        Suite::Closed => {
            let hmax = if quick { 10 } else { 17 };
            r.push_result("N = 0 limit", check_closed_limit(hmax).map(|ok| (ok, format!("h <= {hmax}"))));
            let gmax = if quick { 10 } else { 35 };
            r.push("one-point generating function", one_point_genfun_check(gmax), format!("g <= {gmax}"));
        }
        Suite::Tables => {
            for n in 1..=6 {
                let res = regression_tables(n).map(|rep| {
                    let bad: Vec<_> = rep
                        .rows
                        .iter()
                        .filter(|row| matches!(row.status, RowStatus::Mismatch | RowStatus::MissingFromComputation))
                        .map(|row| row.d.clone())
                        .collect();
                    let unlisted = rep.count(RowStatus::Unlisted);
                    let passed = rep.passed() && (n == 1 || unlisted == 0);
                    let detail = format!(
                        "d <= {}: {} matched, {} unlisted, {}/{} forbidden tuples zero{}",
                        rep.dmax,
                        rep.count(RowStatus::Match),
                        unlisted,
                        rep.vanishing_checked - rep.vanishing_failed.len(),
                        rep.vanishing_checked,
                        if bad.is_empty() { String::new() } else { format!("; differing at {bad:?}") }
                    );
                    (passed, detail)
                });
                r.push_result(&format!("{n}-point table"), res);
            }
        }
        Suite::Wronskian => {
            let degrees = if quick { [(1, 9), (2, 5)] } else { [(1, 15), (2, 8)] };
            for (n, degree) in degrees {
                let res = wronskian_mismatch(n, degree).map(|m| match m {
                    None => (true, format!("log Z agrees to degree {degree}")),
                    Some(e) => (false, format!("differs at exponent {e:?}")),
                });
                r.push_result(&format!("n = {n}"), res);
            }
        }
        Suite::Amatrix => {
            let kmax = if quick { 10 } else { 20 };
            let bad: Vec<i64> = (1..=kmax).filter(|&k| !check_a_identities(k)).collect();
            r.push("trace, projector, determinant", bad.is_empty(), format!("orders 1..={kmax}, failing {bad:?}"));
        }
        Suite::Ppoly => {
            let kmax = if quick { 10 } else { 20 };
            let bad = p_method_mismatches(kmax);
            r.push(
                "product vs hypergeometric",
                bad.is_empty(),
                format!("9 index pairs, k <= {kmax}, {} mismatches", bad.len()),
            );
            let kmax = if quick { 15 } else { 30 };
            let bad: Vec<i64> = (0..=kmax).filter(|&k| !check_f_recurrence(k)).collect();
            r.push("F recurrence", bad.is_empty(), format!("orders 0..={kmax}, failing {bad:?}"));
        }
        Suite::Numeric => {
            for p in numeric_suite(quick) {
                let detail = if p.bound.is_nan() {
                    format!("value {:.3e}", p.value)
                } else {
                    format!("value {:.3e}, bound {:.3e}", p.value, p.bound)
                };
                r.push(p.name, p.passed, detail);
            }
        }
    }
}
