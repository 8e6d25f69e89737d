use std::path::PathBuf;

use thiserror::Error;

/// A violated instance invariant, reported at construction or ingestion time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("an application needs at least 2 components, found {0}")]
    TooFewComponents(usize),
    #[error("at least one radio interface is required")]
    NoRadios,
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("component {0} depends on itself")]
    SelfDependency(usize),
    #[error("dependency {from} -> {to} points backwards in the execution order")]
    BackwardEdge { from: usize, to: usize },
    #[error("data[{from}][{to}] is non-zero but there is no dependency {from} -> {to}")]
    DataWithoutEdge { from: usize, to: usize },
    #[error("alpha[{from}][{to}] must be 0 or 1, found {value}")]
    NonBinaryDependency { from: usize, to: usize, value: u8 },
    #[error("{field}[{index}] must be finite and >= 0, found {value}")]
    Negative {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{field}[{index}] must be finite and > 0, found {value}")]
    NonPositive {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("active power of component {component} ({active} W) must exceed idle power ({idle} W)")]
    ActiveNotAboveIdle { component: usize, active: f64, idle: f64 },
    #[error("pinned component {0} is out of range")]
    PinnedOutOfRange(usize),
    #[error("unknown {quantity} unit {unit:?}")]
    UnknownUnit { quantity: &'static str, unit: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(#[from] ValidationError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid parameter ranges: {0}")]
    InvalidRanges(String),
    #[error("{free} free components is too many to enumerate (limit {limit})")]
    TooLarge { free: usize, limit: usize },
    #[error("no placement satisfies the constraints ({evaluated} evaluated)")]
    NoFeasiblePlacement { evaluated: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index, len })
    }
}
