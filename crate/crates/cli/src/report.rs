//! The verification report: one record per check, the ledger and the
//! measured constants.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use tubelog::comb::{CheckStatus, StageRecord};
use tubelog::ParameterLedger;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Greater,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Less => "<",
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Greater => ">",
        })
    }
}

/// `value relation bound`, e.g. a worst error against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    #[serde(with = "tubelog::hexfloat")]
    pub value: f64,
    pub relation: Relation,
    #[serde(with = "tubelog::hexfloat")]
    pub bound: f64,
    pub passed: bool,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let passed = match relation {
            Relation::Less => value < bound,
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Greater => value > bound,
        };
        Measurement {
            label: label.into(),
            value,
            relation,
            bound,
            passed,
        }
    }

    pub fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::AtMost, bound)
    }

    pub fn less(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::Less, bound)
    }

    pub fn at_least(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::AtLeast, bound)
    }

    pub fn greater(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::Greater, bound)
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self::at_least(label, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// Signed distance to the bound, positive on the passing side, divided
    /// by `|bound|` when the bound is nonzero. NaN counts as `-inf`.
    pub fn margin(&self) -> f64 {
        let diff = match self.relation {
            Relation::Less | Relation::AtMost => self.bound - self.value,
            Relation::AtLeast | Relation::Greater => self.value - self.bound,
        };
        let m = if self.bound != 0.0 && self.bound.is_finite() {
            diff / self.bound.abs()
        } else {
            diff
        };
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub statement: String,
    pub grid: String,
    pub status: CheckStatus,
    /// Smallest [`Measurement::margin`]; `None` when nothing was measured.
    #[serde(with = "tubelog::hexfloat::option")]
    pub worst_margin: Option<f64>,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: &str, statement: &str, grid: String) -> Self {
        CheckRecord {
            name: name.into(),
            statement: statement.into(),
            grid,
            status: CheckStatus::Pass,
            worst_margin: None,
            measurements: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, m: Measurement) {
        self.measurements.push(m);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// An error that stopped part of the check: noted, and a failure.
    pub fn error(&mut self, what: &str, e: impl fmt::Display) {
        self.note(format!("{what}: {e}"));
        self.push(Measurement::holds(format!("{what} evaluated"), false));
    }

    /// Set status and worst margin from the measurements. `not_certified`
    /// only applies when nothing failed.
    pub fn finish(mut self, not_certified: bool) -> Self {
        self.worst_margin = self.measurements.iter().map(Measurement::margin).reduce(f64::min);
        let failed = self.measurements.iter().any(|m| !m.passed);
        self.status = if failed {
            CheckStatus::Fail
        } else if not_certified {
            CheckStatus::NotCertified
        } else {
            CheckStatus::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub requested_depth: usize,
    pub reached_depth: Option<usize>,
    pub complete: bool,
    pub exhausted: Option<String>,
    pub stages: Vec<StageRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    #[serde(with = "tubelog::hexfloat")]
    pub value: f64,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub ledger: ParameterLedger,
    pub construction: ConstructionSummary,
    pub checks: Vec<CheckRecord>,
    pub constants: BTreeMap<String, Constant>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotCertified => "NOT CERTIFIED",
            };
            let margin = c.worst_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
            out.push_str(&format!("{status:<13} {:<24} worst margin {margin}\n", c.name));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_are_relative_to_the_bound() {
        assert_eq!(Measurement::at_most("x", 0.5, 2.0).margin(), 0.75);
        assert_eq!(Measurement::at_least("x", 1.0, 4.0).margin(), -0.75);
        assert_eq!(Measurement::at_most("x", 0.5, 0.0).margin(), -0.5);
        assert_eq!(Measurement::at_most("x", f64::NAN, 1.0).margin(), f64::NEG_INFINITY);
        assert!(!Measurement::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Measurement::less("x", 1.0, 1.0).passed);
    }

    #[test]
    fn status_from_measurements() {
        let mut c = CheckRecord::new("x", "", String::new());
        c.push(Measurement::holds("a", true));
        let c = c.finish(true);
        assert_eq!(c.status, CheckStatus::NotCertified);
        assert!(c.passed());
        let mut d = CheckRecord::new("y", "", String::new());
        d.push(Measurement::holds("a", false));
        assert_eq!(d.finish(true).status, CheckStatus::Fail);
    }
}
