//! Experiment reports with a stable, versioned JSON layout. Identical
//! config and seed must serialize byte-identically, so every field is
//! deterministic and declared in a fixed order.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub const REPORT_SCHEMA: &str = "shuffle-sum/report/1";

/// An analytic bound that may be infinite (infeasible plan). Serializes as
/// a JSON number, or the string `"inf"` when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn from_f64(v: f64) -> Bound {
        if v.is_finite() {
            Bound::Finite(v)
        } else {
            Bound::Infinite
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Bound::Finite(v) => *v,
            Bound::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => serializer.serialize_f64(*v),
            Bound::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v:.1}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// Aggregated results of one experiment. `runs = 0` (with empty per-run
/// data) marks an infeasible plan whose bound is `inf`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub protocol: String,
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub messages: Option<u32>,
    pub runs: u64,
    pub seed: u64,
    pub dataset: String,
    /// Identifier of the bound formula backing `analytic_mse_bound`.
    pub formula: &'static str,
    pub analytic_mse_bound: Bound,
    pub true_sum: f64,
    /// `|sum - output| / n` per run, in run order.
    pub per_run_std_error: Vec<f64>,
    pub mean_std_error: Option<f64>,
    pub std_dev_std_error: Option<f64>,
    /// Mean squared error of the raw sum estimate across runs.
    pub empirical_mse: Option<f64>,
    pub mean_output: Option<f64>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One row of the bounds comparison table.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub protocol: String,
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Message count per user; `None` renders as a dash (central model).
    pub messages: Option<u32>,
    pub mse_bound: Bound,
    /// Identifier of the generating formula, carried into JSON output.
    pub formula: &'static str,
}

impl Serialize for BoundsRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut row = serializer.serialize_struct("BoundsRow", 7)?;
        row.serialize_field("protocol", &self.protocol)?;
        row.serialize_field("n", &self.n)?;
        row.serialize_field("epsilon", &self.epsilon)?;
        row.serialize_field("delta", &self.delta)?;
        row.serialize_field("messages", &self.messages)?;
        row.serialize_field("mse_bound", &self.mse_bound)?;
        row.serialize_field("formula", &self.formula)?;
        row.end()
    }
}
