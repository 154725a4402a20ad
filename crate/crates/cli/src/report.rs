//! Report documents and check records.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

/// How `value` is compared with `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    /// PASS iff `value ≤ threshold`.
    AtMost,
    /// PASS iff `value > threshold`.
    Above,
    /// PASS iff `value == threshold`.
    Equals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub comparator: Comparator,
    /// `null` when the quantity is not finite or could not be computed; such
    /// checks always FAIL.
    pub value: Option<f64>,
    pub threshold: f64,
    /// Point at which the check failed.
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl CheckRecord {
    fn new(name: &str, comparator: Comparator, value: f64, threshold: f64, witness: Option<Vec<f64>>, detail: String) -> Self {
        let ok = match comparator {
            Comparator::AtMost => value <= threshold,
            Comparator::Above => value > threshold,
            Comparator::Equals => value == threshold,
        } && value.is_finite();
        CheckRecord {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            comparator,
            value: finite(value),
            threshold,
            witness: if ok { None } else { witness },
            detail,
        }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64, witness: Option<Vec<f64>>, detail: impl Into<String>) -> Self {
        Self::new(name, Comparator::AtMost, value, threshold, witness, detail.into())
    }

    pub fn above(name: &str, value: f64, threshold: f64, witness: Option<Vec<f64>>, detail: impl Into<String>) -> Self {
        Self::new(name, Comparator::Above, value, threshold, witness, detail.into())
    }

    pub fn equals(name: &str, value: f64, expected: f64, witness: Option<Vec<f64>>, detail: impl Into<String>) -> Self {
        Self::new(name, Comparator::Equals, value, expected, witness, detail.into())
    }

    /// A boolean outcome recorded as `1 == 1`.
    pub fn holds(name: &str, ok: bool, witness: Option<Vec<f64>>, detail: impl Into<String>) -> Self {
        Self::equals(name, if ok { 1.0 } else { 0.0 }, 1.0, witness, detail)
    }

    /// A check whose computation raised an error.
    pub fn error(name: &str, err: impl std::fmt::Display) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Fail,
            comparator: Comparator::AtMost,
            value: None,
            threshold: 0.0,
            witness: None,
            detail: format!("error: {err}"),
        }
    }

    /// Recomputes the status from the other fields.
    pub fn derived_status(&self) -> Status {
        let ok = match (self.value, self.comparator) {
            (None, _) => false,
            (Some(v), Comparator::AtMost) => v <= self.threshold,
            (Some(v), Comparator::Above) => v > self.threshold,
            (Some(v), Comparator::Equals) => v == self.threshold,
        };
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub config: ScenarioConfig,
    pub status: Status,
    pub checks: Vec<CheckRecord>,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(config: &ScenarioConfig, checks: Vec<CheckRecord>, wall_clock_seconds: f64) -> Self {
        let status = if checks.iter().all(CheckRecord::passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            scenario: config.scenario.clone(),
            config: config.clone(),
            status,
            checks,
            wall_clock_seconds,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report with the wall-clock field zeroed, for comparisons.
    pub fn without_timing(&self) -> Report {
        Report {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }
}
