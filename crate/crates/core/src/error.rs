use std::path::PathBuf;

use crate::panel::PillarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unexpected header {found:?}, expected {expected:?}")]
    BadHeader { found: String, expected: String },

    #[error("vintage {vintage:?}: pillar {pillar} has {found} variables, expected {expected}")]
    PillarCount {
        vintage: String,
        pillar: PillarId,
        found: usize,
        expected: usize,
    },

    #[error("vintage {vintage:?}: duplicate variable id {id:?}")]
    DuplicateVariable { vintage: String, id: String },

    #[error("line {line}: no registry vintage covers year {year}")]
    UnknownVintage { line: u64, year: i32 },

    #[error("line {line}: variable {id:?} is not in vintage {vintage:?}")]
    UnknownVariable { line: u64, id: String, vintage: String },

    #[error("line {line}: duplicate observation ({country}, {year}, {variable})")]
    DuplicateObservation {
        line: u64,
        country: String,
        year: i32,
        variable: String,
    },

    #[error("line {line}: value {value:?} is not a number")]
    NonNumeric { line: u64, value: String },

    #[error("line {line}: value {value} is not finite")]
    NonFinite { line: u64, value: f64 },

    #[error("line {line}: unknown country code {code:?}")]
    UnknownCountry { line: u64, code: String },

    #[error("line {line}: {code:?} is not an ISO3 country code")]
    InvalidCountryCode { line: u64, code: String },

    #[error("no values to take extrema of")]
    EmptyExtrema,

    #[error("value {value} lies outside [{worst}, {best}]")]
    OutOfRange { value: f64, best: f64, worst: f64 },

    #[error("no observations for variable {variable:?} in {year}")]
    EmptySlice { year: i32, variable: String },

    #[error("no registry vintage covers year {0}")]
    YearWithoutVintage(i32),

    #[error("cannot rank an empty list")]
    EmptyRanking,

    #[error("{country} {year}: {pillar} index is missing")]
    MissingIndex {
        country: String,
        year: i32,
        pillar: PillarId,
    },

    #[error("need at least 2 complete points to cluster, found {0}")]
    TooFewPoints(usize),

    #[error("cut size k = {k} outside 1..={n}")]
    CutOutOfRange { k: usize, n: usize },

    #[error("country {0} is not in the distance matrix")]
    UnknownFocal(String),

    #[error("unsupported format {0:?}")]
    UnsupportedFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse {
            line,
            message: err.to_string(),
        }
    }
}
