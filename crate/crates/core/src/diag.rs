//! Non-fatal diagnostics collected alongside computed artifacts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::panel::PillarId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// Permissive registry load accepted a vintage with off-count pillars.
    PillarCount {
        vintage: String,
        pillar: PillarId,
        found: usize,
        expected: usize,
    },
    /// Every observed country shares one raw value; all were mapped to the midpoint.
    DegenerateRange {
        year: i32,
        variable: String,
        value: f64,
    },
    /// A registry variable has no observations in a year and was skipped.
    EmptySlice { year: i32, variable: String },
    /// Pillar coverage fell below the configured minimum; the index is missing.
    LowCoverage {
        country: String,
        year: i32,
        pillar: PillarId,
        coverage: f64,
        min_coverage: f64,
    },
    /// Country dropped from clustering because an index is missing.
    ExcludedFromClustering { country: String, year: i32 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::PillarCount {
                vintage,
                pillar,
                found,
                expected,
            } => write!(
                f,
                "vintage {vintage:?}: pillar {pillar} has {found} variables (expected {expected})"
            ),
            Warning::DegenerateRange {
                year,
                variable,
                value,
            } => write!(
                f,
                "{variable} {year}: all observed values equal {value}; standardized to 4.0"
            ),
            Warning::EmptySlice { year, variable } => {
                write!(f, "{variable} {year}: no observations")
            }
            Warning::LowCoverage {
                country,
                year,
                pillar,
                coverage,
                min_coverage,
            } => write!(
                f,
                "{country} {year}: {pillar} coverage {coverage:.3} below {min_coverage}; index missing"
            ),
            Warning::ExcludedFromClustering { country, year } => {
                write!(f, "{country} {year}: incomplete indices, excluded from clustering")
            }
        }
    }
}
