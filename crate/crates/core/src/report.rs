//! Condition reports produced by the geometry and multiplier checkers.

use serde::Serialize;

/// Grid point at which a condition was observed to fail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Witness {
    pub rho: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub detail: String,
}

impl ConditionCheck {
    pub fn pass(name: &str, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            witness: None,
            detail,
        }
    }

    pub fn fail(name: &str, witness: Option<Witness>, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            witness,
            detail,
        }
    }
}

/// Per-condition verdicts with witness points for failures.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn push(&mut self, check: ConditionCheck) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}
