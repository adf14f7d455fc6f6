//! Mixed-integer QP: convex QP relaxations explored by branch and bound,
//! with a running objective lower bound that doubles as an infeasibility
//! certificate against an acceptance threshold.

mod bnb;
mod ldl;
mod qp;
mod sparse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bnb::{branch, lower_bound, solve, BnbNode};
pub use qp::{solve_qp, solve_qp_with, KktResiduals, QpError, QpProblem, QpSettings, QpSolution};
pub use sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiqpError {
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("binary index {0} out of range")]
    BinaryIndex(usize),
    #[error("binary index {0} listed twice")]
    DuplicateBinary(usize),
    #[error("branch called on an integral solution")]
    Integral,
    #[error("fixture format: {0}")]
    Format(String),
}

/// Convex QP data plus the set of variables restricted to {0, 1}.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MIQProblem {
    #[serde(flatten)]
    pub qp: QpProblem,
    pub binaries: Vec<usize>,
}

impl MIQProblem {
    pub fn num_vars(&self) -> usize {
        self.qp.num_vars()
    }

    pub fn validate(&self) -> Result<(), MiqpError> {
        self.qp.validate()?;
        let mut seen = vec![false; self.num_vars()];
        for &b in &self.binaries {
            if b >= seen.len() {
                return Err(MiqpError::BinaryIndex(b));
            }
            if seen[b] {
                return Err(MiqpError::DuplicateBinary(b));
            }
            seen[b] = true;
        }
        Ok(())
    }

    /// The QP with all binaries relaxed to `[0, 1]`.
    pub fn relaxation(&self) -> QpProblem {
        let mut qp = self.qp.clone();
        for &b in &self.binaries {
            qp.ineq_matrix.push_row(vec![(b, 1.0)]);
            qp.ineq_rhs.push(1.0);
            qp.ineq_matrix.push_row(vec![(b, -1.0)]);
            qp.ineq_rhs.push(0.0);
        }
        qp
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MiqpError> {
        let p: Self = serde_json::from_str(text).map_err(|e| MiqpError::Format(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub integrality: f64,
    pub absolute_gap: f64,
    pub relative_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrality: 1e-6,
            absolute_gap: 1e-6,
            relative_gap: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Acceptance threshold; the search stops once the lower bound exceeds it.
    pub j_max: f64,
    pub tolerances: Tolerances,
    /// Maximum number of QP relaxations.
    pub iteration_limit: usize,
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            j_max: f64::INFINITY,
            tolerances: Tolerances::default(),
            iteration_limit: 10_000,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    InfeasibleCertified,
    BoundExceeded,
    IterationLimit,
}

/// One line of the per-iteration trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    #[serde(with = "ext_float")]
    pub j_lower: f64,
    #[serde(with = "ext_float")]
    pub j_upper: f64,
    pub open: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Incumbent z₊, if any integral solution was found.
    pub incumbent: Option<Vec<f64>>,
    /// j₊ (`+∞` without incumbent).
    pub upper_bound: f64,
    /// j⁻ at termination.
    pub lower_bound: f64,
    /// Number of QP relaxations solved.
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
}

impl SolveOutcome {
    /// Trace as line-delimited JSON.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.trace {
            out.push_str(&serde_json::to_string(t).expect("trace serializes"));
            out.push('\n');
        }
        out
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod ext_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad float {t:?}"))),
            },
        }
    }
}
