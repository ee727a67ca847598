use serde::Serialize;

/// One tolerance test; `value < limit` passes.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub invariant: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(invariant: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            invariant: invariant.into(),
            value,
            limit,
            // NaN fails
            pass: value < limit,
        }
    }

    /// Integer-valued property with an exact expected value; the recorded
    /// value is the absolute mismatch.
    pub fn exact(invariant: impl Into<String>, found: usize, expected: usize) -> Self {
        Self::below(invariant, found.abs_diff(expected) as f64, 0.5)
    }

    pub fn holds(invariant: impl Into<String>, ok: bool) -> Self {
        Self::below(invariant, if ok { 0.0 } else { 1.0 }, 0.5)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub fn print_checks(checks: &[Check]) {
    for c in checks {
        println!(
            "  [{}] {:<40} {:>11.3e} < {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.invariant,
            c.value,
            c.limit
        );
    }
}
