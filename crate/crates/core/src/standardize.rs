//! Min-max standardization onto the 1–7 scale and pillar aggregation.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diag::Warning;
use crate::error::{Error, Result};
use crate::panel::{Orientation, PillarId, RawPanel, Registry};

pub const SCALE_MIN: f64 = 1.0;
pub const SCALE_MAX: f64 = 7.0;
pub const SCALE_MID: f64 = 4.0;
pub const DEFAULT_MIN_COVERAGE: f64 = 0.5;

pub const INDICES_HEADER: [&str; 8] = [
    "country",
    "year",
    "F",
    "O",
    "I",
    "F_coverage",
    "O_coverage",
    "I_coverage",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub best: f64,
    pub worst: f64,
}

impl Extrema {
    pub fn is_degenerate(&self) -> bool {
        self.best == self.worst
    }
}

pub fn oriented_extrema(values: &[f64], orientation: Orientation) -> Result<Extrema> {
    let (min, max) = values
        .iter()
        .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(Error::EmptyExtrema)?;
    Ok(match orientation {
        Orientation::HigherIsBetter => Extrema { best: max, worst: min },
        Orientation::LowerIsBetter => Extrema { best: min, worst: max },
    })
}

/// `6 · (value − worst) / (best − worst) + 1`.
///
/// A degenerate range (`best == worst`) maps to [`SCALE_MID`]; callers that
/// own a slice record the matching [`Warning::DegenerateRange`]. Values
/// outside the closed interval between `worst` and `best` are rejected.
pub fn minmax_standardize(value: f64, best: f64, worst: f64) -> Result<f64> {
    let (lo, hi) = if best >= worst { (worst, best) } else { (best, worst) };
    if !(lo..=hi).contains(&value) {
        return Err(Error::OutOfRange { value, best, worst });
    }
    if best == worst {
        return Ok(SCALE_MID);
    }
    // Ratio first: it lies in [0, 1] exactly, so the result stays inside [1, 7].
    let ratio = (value - worst) / (best - worst);
    Ok((SCALE_MAX - SCALE_MIN) * ratio + SCALE_MIN)
}

/// Standardized values of one variable in one year.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSlice {
    pub year: i32,
    pub variable: String,
    pub extrema: Extrema,
    /// `(country, s)` in panel country order; unobserved countries are absent.
    pub values: Vec<(String, f64)>,
}

impl StandardizedSlice {
    pub fn get(&self, country: &str) -> Option<f64> {
        self.values.iter().find(|(c, _)| c == country).map(|(_, s)| *s)
    }

    pub fn is_degenerate(&self) -> bool {
        self.extrema.is_degenerate()
    }

    pub fn warning(&self) -> Option<Warning> {
        self.is_degenerate().then(|| Warning::DegenerateRange {
            year: self.year,
            variable: self.variable.clone(),
            value: self.extrema.best,
        })
    }
}

/// Standardize already-extracted `(country, raw)` pairs.
pub fn standardize_values<S: AsRef<str>>(
    year: i32,
    variable: &str,
    raw: &[(S, f64)],
    orientation: Orientation,
) -> Result<StandardizedSlice> {
    let only: Vec<f64> = raw.iter().map(|(_, v)| *v).collect();
    let extrema = oriented_extrema(&only, orientation).map_err(|_| Error::EmptySlice {
        year,
        variable: variable.to_string(),
    })?;
    let values = raw
        .iter()
        .map(|(c, v)| Ok((c.as_ref().to_string(), minmax_standardize(*v, extrema.best, extrema.worst)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StandardizedSlice {
        year,
        variable: variable.to_string(),
        extrema,
        values,
    })
}

/// Extrema are taken over the countries observed in this `(year, variable)` only.
pub fn standardize_slice(panel: &RawPanel, year: i32, variable: &str, registry: &Registry) -> Result<StandardizedSlice> {
    let spec = registry.variable(year, variable).ok_or_else(|| Error::UnknownVariable {
        line: 0,
        id: variable.to_string(),
        vintage: registry.vintage_for_year(year).unwrap_or("?").to_string(),
    })?;
    standardize_values(year, variable, &panel.slice(year, variable), spec.orientation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PillarIndex {
    pub value: Option<f64>,
    pub coverage: f64,
}

/// Mean of the standardized values present for one pillar.
///
/// `pillar_size` is the number of registry variables in the pillar. The index
/// is missing when no values are present or coverage is below `min_coverage`.
pub fn pillar_index(values: &[f64], pillar_size: usize, min_coverage: f64) -> PillarIndex {
    let coverage = if pillar_size == 0 {
        0.0
    } else {
        values.len() as f64 / pillar_size as f64
    };
    if values.is_empty() || coverage < min_coverage {
        return PillarIndex { value: None, coverage };
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    PillarIndex {
        value: Some(mean.clamp(lo, hi)),
        coverage,
    }
}

/// F, O and I indices of one country in one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoiRow {
    pub country: String,
    pub year: i32,
    /// Indexed by [`PillarId::index`].
    pub indices: [Option<f64>; 3],
    pub coverage: [f64; 3],
}

impl FoiRow {
    pub fn complete(country: impl Into<String>, year: i32, f: f64, o: f64, i: f64) -> Self {
        FoiRow {
            country: country.into(),
            year,
            indices: [Some(f), Some(o), Some(i)],
            coverage: [1.0; 3],
        }
    }

    pub fn get(&self, pillar: PillarId) -> Option<f64> {
        self.indices[pillar.index()]
    }

    /// `(F, O, I)` when all three are present.
    pub fn point(&self) -> Option<[f64; 3]> {
        match self.indices {
            [Some(f), Some(o), Some(i)] => Some([f, o, i]),
            _ => None,
        }
    }

    pub fn require_point(&self) -> Result<[f64; 3]> {
        for pillar in PillarId::ALL {
            if self.get(pillar).is_none() {
                return Err(Error::MissingIndex {
                    country: self.country.clone(),
                    year: self.year,
                    pillar,
                });
            }
        }
        Ok(self.point().expect("all indices present"))
    }
}

/// Rows sorted by `(year, country)`, plus warnings raised while computing them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FoiTable {
    rows: Vec<FoiRow>,
    #[serde(default)]
    warnings: Vec<Warning>,
}

impl FoiTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = FoiRow>) -> Self {
        let mut table = FoiTable::new();
        for row in rows {
            table.insert(row);
        }
        table
    }

    /// Inserts or replaces the row for `(row.year, row.country)`.
    pub fn insert(&mut self, row: FoiRow) {
        match self.search(&row.country, row.year) {
            Ok(i) => self.rows[i] = row,
            Err(i) => self.rows.insert(i, row),
        }
    }

    pub fn remove(&mut self, country: &str, year: i32) -> Option<FoiRow> {
        self.search(country, year).ok().map(|i| self.rows.remove(i))
    }

    fn search(&self, country: &str, year: i32) -> std::result::Result<usize, usize> {
        self.rows
            .binary_search_by(|r| (r.year, r.country.as_str()).cmp(&(year, country)))
    }

    pub fn get(&self, country: &str, year: i32) -> Option<&FoiRow> {
        self.search(country, year).ok().map(|i| &self.rows[i])
    }

    pub fn get_mut(&mut self, country: &str, year: i32) -> Option<&mut FoiRow> {
        self.search(country, year).ok().map(move |i| &mut self.rows[i])
    }

    pub fn rows(&self) -> &[FoiRow] {
        &self.rows
    }

    /// Rows of one year, sorted by country code.
    pub fn year(&self, year: i32) -> impl Iterator<Item = &FoiRow> {
        self.rows.iter().filter(move |r| r.year == year)
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.rows.iter().map(|r| r.year).collect();
        years.dedup();
        years
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(INDICES_HEADER).map_err(Error::csv)?;
        for row in &self.rows {
            let idx = row.indices.map(|v| v.map(|x| x.to_string()).unwrap_or_default());
            let cov = row.coverage.map(|c| c.to_string());
            wtr.write_record([
                row.country.as_str(),
                &row.year.to_string(),
                &idx[0],
                &idx[1],
                &idx[2],
                &cov[0],
                &cov[1],
                &cov[2],
            ])
            .map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<indices>", e))
    }

    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(Error::csv)?;
        if header.iter().ne(INDICES_HEADER.iter().copied()) {
            return Err(Error::BadHeader {
                found: header.iter().collect::<Vec<_>>().join(","),
                expected: INDICES_HEADER.join(","),
            });
        }
        let mut table = FoiTable::new();
        for record in rdr.records() {
            let record = record.map_err(Error::csv)?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let num = |s: &str| -> Result<f64> {
                let v = s.parse::<f64>().map_err(|_| Error::NonNumeric {
                    line,
                    value: s.to_string(),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { line, value: v })
                }
            };
            let year = record[1].parse::<i32>().map_err(|_| Error::Parse {
                line,
                message: format!("year {:?} is not an integer", &record[1]),
            })?;
            let mut indices = [None; 3];
            let mut coverage = [0.0; 3];
            for p in 0..3 {
                let cell = &record[2 + p];
                indices[p] = if cell.is_empty() { None } else { Some(num(cell)?) };
                coverage[p] = num(&record[5 + p])?;
            }
            if table.get(&record[0], year).is_some() {
                return Err(Error::DuplicateObservation {
                    line,
                    country: record[0].to_string(),
                    year,
                    variable: "indices".into(),
                });
            }
            table.insert(FoiRow {
                country: record[0].to_string(),
                year,
                indices,
                coverage,
            });
        }
        Ok(table)
    }
}

pub fn load_indices(path: impl AsRef<Path>) -> Result<FoiTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    FoiTable::parse(file)
}

/// Standardize every registry variable of each year and average per pillar.
///
/// Variables with no observations in a year are skipped with a warning and
/// count as missing for every country.
pub fn compute_foi(panel: &RawPanel, registry: &Registry, years: &[i32], min_coverage: f64) -> Result<FoiTable> {
    if !(0.0..=1.0).contains(&min_coverage) {
        return Err(Error::Config(format!("min_coverage {min_coverage} outside [0, 1]")));
    }
    let mut table = FoiTable::new();
    for &year in years {
        let vars = registry
            .variables_for_year(year)
            .ok_or(Error::YearWithoutVintage(year))?;

        let mut slices = Vec::with_capacity(vars.len());
        for spec in vars {
            match standardize_slice(panel, year, &spec.id, registry) {
                Ok(slice) => {
                    table.warnings.extend(slice.warning());
                    slices.push((spec.pillar, slice));
                }
                Err(Error::EmptySlice { year, variable }) => {
                    table.warnings.push(Warning::EmptySlice { year, variable })
                }
                Err(e) => return Err(e),
            }
        }

        for country in panel.countries() {
            let mut row = FoiRow {
                country: country.clone(),
                year,
                indices: [None; 3],
                coverage: [0.0; 3],
            };
            for pillar in PillarId::ALL {
                let values: Vec<f64> = slices
                    .iter()
                    .filter(|(p, _)| *p == pillar)
                    .filter_map(|(_, s)| s.get(country))
                    .collect();
                let size = vars.iter().filter(|s| s.pillar == pillar).count();
                let idx = pillar_index(&values, size, min_coverage);
                if idx.value.is_none() {
                    table.warnings.push(Warning::LowCoverage {
                        country: country.clone(),
                        year,
                        pillar,
                        coverage: idx.coverage,
                        min_coverage,
                    });
                }
                row.indices[pillar.index()] = idx.value;
                row.coverage[pillar.index()] = idx.coverage;
            }
            table.insert(row);
        }
    }
    Ok(table)
}
