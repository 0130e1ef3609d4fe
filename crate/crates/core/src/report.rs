//! Machine-readable verification reports.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Failure descriptions kept per check; the count is always exact.
pub const MAX_LISTED_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Short identifier, e.g. `shift-orthonormality.gram`.
    pub name: String,
    /// The identity being tested, in words.
    pub condition: String,
    pub passed: bool,
    /// Number of instances evaluated.
    pub evaluated: usize,
    pub failed: usize,
    /// Largest deviation seen in the complex embedding.
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, condition: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            condition: condition.into(),
            passed: true,
            evaluated: 0,
            failed: 0,
            max_deviation: 0.0,
            failures: Vec::new(),
        }
    }

    /// Records one instance; `describe` runs only for failures.
    pub fn record(&mut self, ok: bool, deviation: f64, describe: impl FnOnce() -> String) {
        self.evaluated += 1;
        if deviation > self.max_deviation || deviation.is_nan() {
            self.max_deviation = deviation;
        }
        if !ok {
            self.passed = false;
            self.failed += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(describe());
            }
        }
    }

    /// Folds in a batch produced elsewhere, e.g. by a parallel loop.
    pub fn absorb(&mut self, other: Check) {
        self.evaluated += other.evaluated;
        self.failed += other.failed;
        self.passed &= other.passed;
        if other.max_deviation > self.max_deviation || other.max_deviation.is_nan() {
            self.max_deviation = other.max_deviation;
        }
        let room = MAX_LISTED_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }

    pub fn fail(mut self, why: impl Into<String>) -> Self {
        self.record(false, f64::INFINITY, || why.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            passed: true,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.max_deviation)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.title,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {} ({} checked, {} failed, max deviation {:.3e})",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.evaluated,
                c.failed,
                c.max_deviation
            )?;
            for why in &c.failures {
                writeln!(f, "      {why}")?;
            }
        }
        Ok(())
    }
}
