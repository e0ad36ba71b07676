use std::fmt;

use serde::{Deserialize, Serialize};

/// A point where a checked inequality fails, with both sides evaluated there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Coordinates of the offending sample; their meaning is given by `note`.
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub note: String,
}

/// Three-valued verdict of a hypothesis checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CheckResult {
    Satisfied,
    Violated(Witness),
    Inconclusive(String),
}

impl CheckResult {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, CheckResult::Satisfied)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, CheckResult::Violated(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CheckResult::Violated(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckResult::Satisfied => write!(f, "Satisfied"),
            CheckResult::Violated(w) => write!(
                f,
                "Violated at {:?}: {} (lhs = {}, rhs = {})",
                w.point, w.note, w.lhs, w.rhs
            ),
            CheckResult::Inconclusive(r) => write!(f, "Inconclusive: {r}"),
        }
    }
}
