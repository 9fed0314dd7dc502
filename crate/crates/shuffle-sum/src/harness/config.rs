//! Experiment configuration: protocol selection, dataset specification and
//! the flat key-value config file the `run` command accepts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::dataset::Normalizer;

/// Which mechanism an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolSelector {
    Single,
    Recursive,
    RecursiveOpt,
    Ikos,
    CentralLaplace,
    LocalLaplace,
    LocalRr,
}

impl ProtocolSelector {
    pub const ALL: [ProtocolSelector; 7] = [
        ProtocolSelector::Single,
        ProtocolSelector::Recursive,
        ProtocolSelector::RecursiveOpt,
        ProtocolSelector::Ikos,
        ProtocolSelector::CentralLaplace,
        ProtocolSelector::LocalLaplace,
        ProtocolSelector::LocalRr,
    ];
}

impl std::str::FromStr for ProtocolSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(ProtocolSelector::Single),
            "recursive" => Ok(ProtocolSelector::Recursive),
            "recursive-opt" => Ok(ProtocolSelector::RecursiveOpt),
            "ikos" => Ok(ProtocolSelector::Ikos),
            "central-laplace" => Ok(ProtocolSelector::CentralLaplace),
            "local-laplace" => Ok(ProtocolSelector::LocalLaplace),
            "local-rr" => Ok(ProtocolSelector::LocalRr),
            other => Err(Error::Config(format!("unknown protocol {other:?}"))),
        }
    }
}

impl std::fmt::Display for ProtocolSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ProtocolSelector::Single => "single",
            ProtocolSelector::Recursive => "recursive",
            ProtocolSelector::RecursiveOpt => "recursive-opt",
            ProtocolSelector::Ikos => "ikos",
            ProtocolSelector::CentralLaplace => "central-laplace",
            ProtocolSelector::LocalLaplace => "local-laplace",
            ProtocolSelector::LocalRr => "local-rr",
        };
        f.write_str(name)
    }
}

/// Where the input data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Uniform,
    Normal { mean: f64, std: f64 },
    Csv {
        path: PathBuf,
        column: String,
        normalizer: Normalizer,
    },
}

impl DatasetSpec {
    pub fn label(&self) -> String {
        match self {
            DatasetSpec::Uniform => "ur".into(),
            DatasetSpec::Normal { mean, std } => format!("normal({mean},{std})"),
            DatasetSpec::Csv {
                path,
                column,
                normalizer,
            } => format!("csv({},{column},{normalizer})", path.display()),
        }
    }
}

/// A fully-specified experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub protocol: ProtocolSelector,
    pub n: u64,
    pub epsilon: f64,
    /// Defaults to `1/n^2` when unset.
    pub delta: Option<f64>,
    /// Message count for the recursive planners; their default is 2.
    pub messages: Option<usize>,
    pub runs: u64,
    pub seed: u64,
    pub dataset: DatasetSpec,
}

impl ExperimentConfig {
    pub fn effective_delta(&self) -> f64 {
        self.delta
            .unwrap_or_else(|| 1.0 / (self.n as f64 * self.n as f64))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        // CSV datasets define their own size.
        if self.n < 1 && !matches!(self.dataset, DatasetSpec::Csv { .. }) {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses a flat `key = value` config file: one pair per line, `#` starts a
/// comment, keys match the CLI flag names without the leading dashes.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got {raw:?}", idx + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
