//! Structured audit reports: inputs, observed quantities, the bound they are
//! held against, and the resulting margin. A report passes exactly when
//! `margin >= -tolerance`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

pub fn named(name: &str, value: f64) -> NamedValue {
    NamedValue {
        name: name.to_string(),
        value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub audit_name: String,
    pub space: String,
    pub parameters: Vec<NamedValue>,
    pub observed: Vec<NamedValue>,
    pub bound: NamedValue,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub flags: Vec<String>,
    pub runtime_ms: u64,
}

impl AuditReport {
    pub fn new(
        audit_name: &str,
        space: &str,
        parameters: Vec<NamedValue>,
        observed: Vec<NamedValue>,
        bound: NamedValue,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        AuditReport {
            audit_name: audit_name.to_string(),
            space: space.to_string(),
            parameters,
            observed,
            bound,
            // normalize a negative zero out of min-aggregated margins
            margin: margin + 0.0,
            tolerance,
            passed: margin >= -tolerance,
            flags: Vec::new(),
            runtime_ms: 0,
        }
    }

    pub fn with_flag(mut self, flag: String) -> Self {
        self.flags.push(flag);
        self
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|nv| nv.name == name)
            .map(|nv| nv.value)
    }

    pub fn observation(&self, name: &str) -> Option<f64> {
        self.observed
            .iter()
            .find(|nv| nv.name == name)
            .map(|nv| nv.value)
    }

    /// Collapses per-case reports (for example one per test pair) into one
    /// report carrying the worst margin. Observations are taken from the
    /// worst case; bound and tolerance must agree across the inputs.
    pub fn merge(audit_name: &str, reports: Vec<AuditReport>) -> AuditReport {
        assert!(!reports.is_empty(), "cannot merge zero reports");
        let count = reports.len();
        let worst = reports
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.margin.partial_cmp(&b.margin).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let all_passed = reports.iter().all(|r| r.passed);
        let mut flags: Vec<String> = Vec::new();
        for r in &reports {
            for f in &r.flags {
                if !flags.contains(f) {
                    flags.push(f.clone());
                }
            }
        }
        let total_ms = reports.iter().map(|r| r.runtime_ms).sum();
        let mut merged = reports.into_iter().nth(worst).unwrap();
        merged.audit_name = audit_name.to_string();
        merged.observed.push(named("merged_cases", count as f64));
        merged.passed = all_passed;
        merged.flags = flags;
        merged.runtime_ms = total_ms;
        merged
    }
}
