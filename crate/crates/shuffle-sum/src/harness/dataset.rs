//! Dataset generation and CSV ingestion for the experiment runner.

use std::path::Path;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// `n` i.i.d. uniform values in [0, 1], reproducible by seed.
pub fn gen_uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| rng.uniform_f64()).collect()
}

/// `n` i.i.d. normal samples clipped into [0, 1]. A zero deviation gives the
/// constant `clip(mean)`.
pub fn gen_normal(n: usize, mean: f64, std: f64, seed: u64) -> Result<Vec<f64>> {
    if !(std >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "standard deviation must be nonnegative, got {std}"
        )));
    }
    let mut rng = RngStream::new(seed, 0);
    if std == 0.0 {
        return Ok(vec![mean.clamp(0.0, 1.0); n]);
    }
    let normal = Normal::new(mean, std)
        .map_err(|e| Error::InvalidParameter(format!("normal dataset: {e}")))?;
    Ok((0..n)
        .map(|_| normal.sample(&mut rng).clamp(0.0, 1.0))
        .collect())
}

/// How a CSV column is mapped into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalizer {
    /// Divide by the column maximum.
    Max,
    /// Affine map of [min, max] onto [0, 1].
    MinMax,
    /// Divide by a fixed denominator.
    Fixed(f64),
}

impl std::str::FromStr for Normalizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Normalizer::Max),
            "minmax" => Ok(Normalizer::MinMax),
            other => {
                if let Some(body) = other
                    .strip_prefix("fixed(")
                    .and_then(|rest| rest.strip_suffix(')'))
                {
                    let denom: f64 = body.parse().map_err(|_| {
                        Error::Config(format!("bad fixed normalizer denominator {body:?}"))
                    })?;
                    return Ok(Normalizer::Fixed(denom));
                }
                if let Ok(denom) = other.parse::<f64>() {
                    return Ok(Normalizer::Fixed(denom));
                }
                Err(Error::Config(format!(
                    "unknown normalizer {other:?}; expected max, minmax or fixed(<denominator>)"
                )))
            }
        }
    }
}

impl std::fmt::Display for Normalizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Normalizer::Max => write!(f, "max"),
            Normalizer::MinMax => write!(f, "minmax"),
            Normalizer::Fixed(d) => write!(f, "fixed({d})"),
        }
    }
}

/// Loads a numeric column from a headered, comma-separated UTF-8 file and
/// normalizes it into [0, 1].
pub fn load_csv(path: &Path, column: &str, normalizer: Normalizer) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let index = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;

    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(index).unwrap_or("");
        let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
            // Line 1 is the header.
            line: row + 2,
            column: column.to_string(),
            value: cell.to_string(),
        })?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyColumn(column.to_string()));
    }
    normalize(values, column, normalizer)
}

fn normalize(mut values: Vec<f64>, column: &str, normalizer: Normalizer) -> Result<Vec<f64>> {
    match normalizer {
        Normalizer::Max => {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(max > 0.0) {
                return Err(Error::Degenerate {
                    column: column.to_string(),
                    reason: format!("column maximum {max} is not positive"),
                });
            }
            for v in &mut values {
                *v /= max;
            }
        }
        Normalizer::MinMax => {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            if max == min {
                return Err(Error::Degenerate {
                    column: column.to_string(),
                    reason: "zero range".into(),
                });
            }
            for v in &mut values {
                *v = (*v - min) / (max - min);
            }
        }
        Normalizer::Fixed(denom) => {
            if !(denom > 0.0) {
                return Err(Error::Degenerate {
                    column: column.to_string(),
                    reason: format!("fixed denominator {denom} is not positive"),
                });
            }
            for v in &mut values {
                *v /= denom;
            }
        }
    }
    if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Degenerate {
            column: column.to_string(),
            reason: format!("value {bad} falls outside [0,1] after normalization"),
        });
    }
    Ok(values)
}
