//! Verification checks and reports.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// `measured <= bound + slack`.
    AtMost,
    /// `|measured - bound| <= slack`.
    Equal,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::AtMost => "at-most",
            CheckKind::Equal => "equal",
        }
    }
}

/// One verified inequality or equality. Slack is reported separately from
/// the bound so the margin is always visible.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        let pass = measured <= bound + slack;
        Self { name: name.into(), kind: CheckKind::AtMost, measured, bound, slack, pass }
    }

    pub fn equal(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let pass = (measured - expected).abs() <= tol;
        Self { name: name.into(), kind: CheckKind::Equal, measured, bound: expected, slack: tol, pass }
    }

    /// Relative deviation `|measured/expected - 1|` checked against `tol`.
    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let dev = (measured / expected - 1.0).abs();
        let mut c = Self::at_most(name, dev, 0.0, tol);
        if !dev.is_finite() {
            c.pass = false;
        }
        c
    }

    /// Boolean property; recorded as `measured = 0` when it holds.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0, 0.0)
    }
}

/// One row of a paired time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub tau: f64,
    pub w2: f64,
    pub bound: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub m4_a: f64,
    pub m4_b: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub name: String,
    pub rows: Vec<SeriesRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub scale: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
}

pub const REPORT_CSV_HEADER: &str = "suite,check,kind,measured,bound,slack,pass";

impl VerificationReport {
    pub fn new(suite: &str, scale: &str, seed: u64) -> Self {
        Self { suite: suite.to_string(), scale: scale.to_string(), seed, checks: Vec::new(), series: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.series.extend(other.series);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_CSV_HEADER);
        s.push('\n');
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e},{:e},{}",
                self.suite,
                c.name,
                c.kind.name(),
                c.measured,
                c.bound,
                c.slack,
                c.pass
            );
        }
        s
    }

    /// Human-readable listing, one line per check.
    pub fn render(&self) -> String {
        let mut s = format!("suite {} (scale {}, seed {})\n", self.suite, self.scale, self.seed);
        for c in &self.checks {
            let rel = match c.kind {
                CheckKind::AtMost => "<=",
                CheckKind::Equal => "==",
            };
            let _ = writeln!(
                s,
                "  [{}] {}: measured {:.6e} {rel} {:.6e} (slack {:.3e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound,
                c.slack
            );
        }
        let _ = writeln!(s, "{}: {} checks, {} failed", self.suite, self.checks.len(), self.failures());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_decides_inequalities() {
        assert!(Check::at_most("a", 1.05, 1.0, 0.1).pass);
        assert!(!Check::at_most("a", 1.2, 1.0, 0.1).pass);
        assert!(!Check::at_most("a", f64::NAN, 1.0, 0.1).pass);
        assert!(Check::equal("b", 0.99, 1.0, 0.02).pass);
        assert!(!Check::equal("b", 1.03, 1.0, 0.02).pass);
        assert!(!Check::relative("c", 1.0, 0.0, 0.5).pass);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut r = VerificationReport::new("lemmas", "quick", 1);
        r.checks.push(Check::holds("x", true));
        r.checks.push(Check::holds("y", false));
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with("false"));
        assert!(!r.pass());
    }
}
