use serde::Serialize;
use serde_json::{json, Value};

use crate::metric::Violation;
use crate::rational::Rational;

/// A closed interval `[lo, hi]`; `hi = None` means unbounded above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Option<Rational>,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn unbounded(lo: Rational) -> Self {
        Self { lo, hi: None }
    }

    pub fn is_empty(&self) -> bool {
        matches!(&self.hi, Some(hi) if *hi < self.lo)
    }

    pub fn contains(&self, v: &Rational) -> bool {
        *v >= self.lo && self.hi.as_ref().is_none_or(|hi| v <= hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.clone().min(b.clone())),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        Interval { lo, hi }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.hi {
            Some(hi) => write!(f, "[{}, {}]", self.lo, hi),
            None => write!(f, "[{}, inf)", self.lo),
        }
    }
}

/// One rejected entry of a [`DistanceSpec`](crate::extension::DistanceSpec).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecViolation {
    /// `g(a) = 0` would duplicate `a`.
    Zero { point: usize },
    Negative { point: usize, value: Rational },
    /// `|g(a) - g(b)| <= d(a,b) <= g(a) + g(b)` fails.
    Pair {
        a: usize,
        b: usize,
        distance: Rational,
        ga: Rational,
        gb: Rational,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed distance matrix: {0}")]
    Structure(String),
    #[error("not a metric: {} violation(s)", .0.len())]
    InvalidMetric(Vec<Violation>),
    #[error("distance specification rejected: {} violation(s)", .0.len())]
    Spec(Vec<SpecViolation>),
    #[error("unknown point {0}")]
    UnknownPoint(usize),
    #[error("tuple lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("precondition failed: {message}")]
    Precondition { message: String, context: Value },
    #[error("infeasible: {message}")]
    Infeasible { message: String, context: Value },
    #[error("partition covers only up to {covered}, need {required}")]
    Coverage { covered: Rational, required: Rational },
    #[error("search budget of {0} steps exhausted")]
    Budget(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn precondition(message: impl Into<String>, context: Value) -> Self {
        Error::Precondition {
            message: message.into(),
            context,
        }
    }

    pub fn infeasible(message: impl Into<String>, context: Value) -> Self {
        Error::Infeasible {
            message: message.into(),
            context,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Structure(_) => "structure",
            Error::InvalidMetric(_) => "invalid_metric",
            Error::Spec(_) => "spec_violation",
            Error::UnknownPoint(_) => "unknown_point",
            Error::LengthMismatch(..) => "length_mismatch",
            Error::Precondition { .. } => "precondition",
            Error::Infeasible { .. } => "infeasible",
            Error::Coverage { .. } => "coverage",
            Error::Budget(_) => "budget_exhausted",
            Error::Parse(_) => "parse",
        }
    }

    pub fn context(&self) -> Value {
        match self {
            Error::Structure(_) | Error::Parse(_) => Value::Null,
            Error::InvalidMetric(v) => json!({ "violations": v }),
            Error::Spec(v) => json!({ "violations": v }),
            Error::UnknownPoint(p) => json!({ "point": p }),
            Error::LengthMismatch(a, b) => json!({ "left": a, "right": b }),
            Error::Precondition { context, .. } | Error::Infeasible { context, .. } => {
                context.clone()
            }
            Error::Coverage { covered, required } => {
                json!({ "covered": covered, "required": required })
            }
            Error::Budget(n) => json!({ "budget": n }),
        }
    }

    /// `{code, message, context}`.
    pub fn to_json(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "context": self.context() })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
