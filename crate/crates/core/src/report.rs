//! Check outcomes as plain values.

use serde::Serialize;

use crate::poly::MultiPoly;

/// One side-by-side comparison that disagreed. `basis` names the basis
/// element (algebra or module index) the two polynomials multiply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub basis: Option<i64>,
    pub lhs: MultiPoly,
    pub rhs: MultiPoly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub indices: Vec<i64>,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn pass(check: &str, indices: Vec<i64>) -> Self {
        CheckReport {
            check: check.to_string(),
            indices,
            passed: true,
            witnesses: Vec::new(),
            note: None,
        }
    }

    pub fn fail(check: &str, indices: Vec<i64>, note: impl Into<String>) -> Self {
        CheckReport {
            check: check.to_string(),
            indices,
            passed: false,
            witnesses: Vec::new(),
            note: Some(note.into()),
        }
    }

    /// Builds a report from per-basis comparisons; passes iff every pair is equal.
    pub fn compare(
        check: &str,
        indices: Vec<i64>,
        pairs: impl IntoIterator<Item = (Option<i64>, MultiPoly, MultiPoly)>,
    ) -> Self {
        let witnesses: Vec<Witness> = pairs
            .into_iter()
            .filter(|(_, l, r)| l != r)
            .map(|(basis, lhs, rhs)| Witness { basis, lhs, rhs })
            .collect();
        CheckReport {
            check: check.to_string(),
            indices,
            passed: witnesses.is_empty(),
            witnesses,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A batch of checks, e.g. one window sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn push(&mut self, r: CheckReport) {
        self.checks.push(r);
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }
}
