//! Variable registry, raw observation panel and coverage accounting.
//!
//! Registry, panel and country-set files are comma-delimited UTF-8 text with
//! fixed headers (see [`REGISTRY_HEADER`] and [`PANEL_HEADER`]). Loading is
//! pure: the same rows in any order produce the same [`RawPanel`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diag::Warning;
use crate::error::{Error, Result};

pub const REGISTRY_HEADER: [&str; 6] = ["variable", "pillar", "orientation", "label", "vintage", "source"];
pub const PANEL_HEADER: [&str; 4] = ["country", "year", "variable", "value"];

/// Variables per pillar in a complete vintage, indexed by [`PillarId::index`].
pub const EXPECTED_PILLAR_COUNTS: [usize; 3] = [11, 5, 8];

const DEFAULT_REGISTRY: &str = include_str!("../data/registry_default.csv");
const OECD_2010: &str = include_str!("../data/oecd34.txt");
const OECD_2020: &str = include_str!("../data/oecd38.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PillarId {
    F,
    O,
    I,
}

impl PillarId {
    pub const ALL: [PillarId; 3] = [PillarId::F, PillarId::O, PillarId::I];

    pub fn index(self) -> usize {
        match self {
            PillarId::F => 0,
            PillarId::O => 1,
            PillarId::I => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            PillarId::F => 'F',
            PillarId::O => 'O',
            PillarId::I => 'I',
        }
    }
}

impl fmt::Display for PillarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PillarId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "F" => Ok(PillarId::F),
            "O" => Ok(PillarId::O),
            "I" => Ok(PillarId::I),
            other => Err(format!("unknown pillar {other:?}, expected F, O or I")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::HigherIsBetter => Orientation::LowerIsBetter,
            Orientation::LowerIsBetter => Orientation::HigherIsBetter,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Orientation::HigherIsBetter => '+',
            Orientation::LowerIsBetter => '-',
        }
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+" => Ok(Orientation::HigherIsBetter),
            "-" => Ok(Orientation::LowerIsBetter),
            other => Err(format!("unknown orientation {other:?}, expected + or -")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: String,
    pub pillar: PillarId,
    pub orientation: Orientation,
    pub label: String,
    pub vintage: String,
    pub source: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LoadMode {
    #[default]
    Strict,
    /// Off-count pillars become warnings instead of errors.
    Permissive,
}

/// Variable specifications grouped by vintage, plus the year → vintage map.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    vintages: BTreeMap<String, Vec<VariableSpec>>,
    years: BTreeMap<i32, String>,
    warnings: Vec<Warning>,
}

impl Registry {
    /// Validates pillar counts and id uniqueness per vintage.
    ///
    /// The year map starts as 2000 and 2010 → `legacy`, 2020 → `2020`; years
    /// not in the map fall back to a vintage named after the year itself.
    pub fn from_specs(specs: Vec<VariableSpec>, mode: LoadMode) -> Result<Self> {
        let mut vintages: BTreeMap<String, Vec<VariableSpec>> = BTreeMap::new();
        for spec in specs {
            let list = vintages.entry(spec.vintage.clone()).or_default();
            if list.iter().any(|s| s.id == spec.id) {
                return Err(Error::DuplicateVariable {
                    vintage: spec.vintage,
                    id: spec.id,
                });
            }
            list.push(spec);
        }

        let mut warnings = Vec::new();
        for (vintage, list) in &vintages {
            for pillar in PillarId::ALL {
                let found = list.iter().filter(|s| s.pillar == pillar).count();
                let expected = EXPECTED_PILLAR_COUNTS[pillar.index()];
                if found != expected {
                    match mode {
                        LoadMode::Strict => {
                            return Err(Error::PillarCount {
                                vintage: vintage.clone(),
                                pillar,
                                found,
                                expected,
                            })
                        }
                        LoadMode::Permissive => warnings.push(Warning::PillarCount {
                            vintage: vintage.clone(),
                            pillar,
                            found,
                            expected,
                        }),
                    }
                }
            }
        }

        let years = [(2000, "legacy"), (2010, "legacy"), (2020, "2020")]
            .into_iter()
            .map(|(y, v)| (y, v.to_string()))
            .collect();

        Ok(Registry {
            vintages,
            years,
            warnings,
        })
    }

    pub fn parse<R: Read>(reader: R, mode: LoadMode) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, &REGISTRY_HEADER)?;

        let mut specs = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(Error::csv)?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let parse_err = |message: String| Error::Parse { line, message };
            let id = record[0].to_string();
            if id.is_empty() {
                return Err(parse_err("empty variable id".into()));
            }
            specs.push(VariableSpec {
                id,
                pillar: record[1].parse().map_err(parse_err)?,
                orientation: record[2].parse().map_err(parse_err)?,
                label: record[3].to_string(),
                vintage: record[4].to_string(),
                source: record[5].to_string(),
            });
        }
        Registry::from_specs(specs, mode)
    }

    /// The bundled 24-variable registry for the `legacy` and `2020` vintages.
    pub fn default_registry() -> Self {
        Registry::parse(DEFAULT_REGISTRY.as_bytes(), LoadMode::Strict)
            .expect("bundled registry is valid")
    }

    /// Route `year` to `vintage`, replacing any existing mapping.
    pub fn map_year(&mut self, year: i32, vintage: impl Into<String>) {
        self.years.insert(year, vintage.into());
    }

    pub fn vintage_for_year(&self, year: i32) -> Option<&str> {
        match self.years.get(&year) {
            Some(v) if self.vintages.contains_key(v) => Some(v.as_str()),
            Some(_) => None,
            None => {
                let own = year.to_string();
                self.vintages.get_key_value(&own).map(|(k, _)| k.as_str())
            }
        }
    }

    pub fn vintage(&self, name: &str) -> Option<&[VariableSpec]> {
        self.vintages.get(name).map(Vec::as_slice)
    }

    pub fn vintages(&self) -> impl Iterator<Item = (&str, &[VariableSpec])> {
        self.vintages.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn variables_for_year(&self, year: i32) -> Option<&[VariableSpec]> {
        self.vintage_for_year(year).and_then(|v| self.vintage(v))
    }

    pub fn variable(&self, year: i32, id: &str) -> Option<&VariableSpec> {
        self.variables_for_year(year)?.iter().find(|s| s.id == id)
    }

    pub fn pillar_count(&self, year: i32, pillar: PillarId) -> usize {
        self.variables_for_year(year)
            .map(|vars| vars.iter().filter(|s| s.pillar == pillar).count())
            .unwrap_or(0)
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(REGISTRY_HEADER).map_err(Error::csv)?;
        for spec in self.vintages.values().flatten() {
            wtr.write_record([
                spec.id.as_str(),
                &spec.pillar.to_string(),
                &spec.orientation.symbol().to_string(),
                &spec.label,
                &spec.vintage,
                &spec.source,
            ])
            .map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<registry>", e))
    }
}

pub fn load_registry(path: impl AsRef<Path>, mode: LoadMode) -> Result<Registry> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Registry::parse(file, mode)
}

/// An ordered list of ISO3 country codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountrySet {
    codes: Vec<String>,
}

impl CountrySet {
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (i, code) in codes.into_iter().enumerate() {
            let code: String = code.into();
            if !is_iso3(&code) {
                return Err(Error::InvalidCountryCode {
                    line: i as u64 + 1,
                    code,
                });
            }
            if seen.insert(code.clone()) {
                out.push(code);
            }
        }
        Ok(CountrySet { codes: out })
    }

    /// One code per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut codes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let code = raw.trim();
            if code.is_empty() || code.starts_with('#') {
                continue;
            }
            if !is_iso3(code) {
                return Err(Error::InvalidCountryCode {
                    line: i as u64 + 1,
                    code: code.to_string(),
                });
            }
            codes.push(code.to_string());
        }
        CountrySet::new(codes)
    }

    /// The 34 countries that were OECD members in 2010.
    pub fn oecd_2010() -> Self {
        CountrySet::parse(OECD_2010).expect("bundled country set is valid")
    }

    /// The 38 OECD members as of 2020.
    pub fn oecd_2020() -> Self {
        CountrySet::parse(OECD_2020).expect("bundled country set is valid")
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn contains(&self, code: &str) -> bool {
        self.codes.iter().any(|c| c == code)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

pub fn load_country_set(path: impl AsRef<Path>) -> Result<CountrySet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CountrySet::parse(&text)
}

fn is_iso3(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// Key of one raw observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObsKey {
    pub country: String,
    pub year: i32,
    pub variable: String,
}

#[derive(Debug, Clone)]
pub struct Observation {
    pub country: String,
    pub year: i32,
    pub variable: String,
    pub value: f64,
    /// Source line, used only for error messages.
    pub line: u64,
}

/// Validated `(country, year, variable) → value` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    observations: BTreeMap<ObsKey, f64>,
    countries: Vec<String>,
}

impl RawPanel {
    /// Validates every observation against `registry` and, if given, `countries`.
    ///
    /// With a country set the panel's country list is that set in its order;
    /// otherwise it is the sorted list of observed codes.
    pub fn from_observations<I>(obs: I, registry: &Registry, countries: Option<&CountrySet>) -> Result<Self>
    where
        I: IntoIterator<Item = Observation>,
    {
        let mut observations = BTreeMap::new();
        for o in obs {
            if !is_iso3(&o.country) {
                return Err(Error::InvalidCountryCode {
                    line: o.line,
                    code: o.country,
                });
            }
            if let Some(set) = countries {
                if !set.contains(&o.country) {
                    return Err(Error::UnknownCountry {
                        line: o.line,
                        code: o.country,
                    });
                }
            }
            let vintage = registry.vintage_for_year(o.year).ok_or(Error::UnknownVintage {
                line: o.line,
                year: o.year,
            })?;
            if registry.variable(o.year, &o.variable).is_none() {
                return Err(Error::UnknownVariable {
                    line: o.line,
                    id: o.variable,
                    vintage: vintage.to_string(),
                });
            }
            if !o.value.is_finite() {
                return Err(Error::NonFinite {
                    line: o.line,
                    value: o.value,
                });
            }
            let key = ObsKey {
                country: o.country,
                year: o.year,
                variable: o.variable,
            };
            if observations.contains_key(&key) {
                return Err(Error::DuplicateObservation {
                    line: o.line,
                    country: key.country,
                    year: key.year,
                    variable: key.variable,
                });
            }
            observations.insert(key, o.value);
        }

        let countries = match countries {
            Some(set) => set.codes().to_vec(),
            None => observations
                .keys()
                .map(|k| k.country.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        Ok(RawPanel {
            observations,
            countries,
        })
    }

    pub fn parse<R: Read>(reader: R, registry: &Registry, countries: Option<&CountrySet>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, &PANEL_HEADER)?;

        let mut obs = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(Error::csv)?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let year = record[1].parse::<i32>().map_err(|_| Error::Parse {
                line,
                message: format!("year {:?} is not an integer", &record[1]),
            })?;
            let value = record[3].parse::<f64>().map_err(|_| Error::NonNumeric {
                line,
                value: record[3].to_string(),
            })?;
            obs.push(Observation {
                country: record[0].to_string(),
                year,
                variable: record[2].to_string(),
                value,
                line,
            });
        }
        RawPanel::from_observations(obs, registry, countries)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.observations.keys().map(|k| k.year).collect()
    }

    pub fn get(&self, country: &str, year: i32, variable: &str) -> Option<f64> {
        let key = ObsKey {
            country: country.to_string(),
            year,
            variable: variable.to_string(),
        };
        self.observations.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObsKey, f64)> {
        self.observations.iter().map(|(k, v)| (k, *v))
    }

    /// Observed `(country, value)` pairs for one variable-year, in country-list order.
    pub fn slice(&self, year: i32, variable: &str) -> Vec<(&str, f64)> {
        self.countries
            .iter()
            .filter_map(|c| self.get(c, year, variable).map(|v| (c.as_str(), v)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(PANEL_HEADER).map_err(Error::csv)?;
        for (k, v) in &self.observations {
            wtr.write_record([k.country.as_str(), &k.year.to_string(), &k.variable, &v.to_string()])
                .map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<panel>", e))
    }
}

pub fn load_panel(path: impl AsRef<Path>, registry: &Registry, countries: Option<&CountrySet>) -> Result<RawPanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    RawPanel::parse(file, registry, countries)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(Error::csv)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
            expected: expected.join(","),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableCoverage {
    pub year: i32,
    pub variable: String,
    pub observed: usize,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PillarCoverage {
    pub country: String,
    pub year: i32,
    pub pillar: PillarId,
    pub observed: usize,
    pub expected: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CoverageReport {
    pub variables: Vec<VariableCoverage>,
    pub pillars: Vec<PillarCoverage>,
}

impl CoverageReport {
    pub fn pillar(&self, country: &str, year: i32, pillar: PillarId) -> Option<&PillarCoverage> {
        self.pillars
            .iter()
            .find(|p| p.country == country && p.year == year && p.pillar == pillar)
    }
}

/// Per variable-year and per country-year-pillar coverage of `panel`.
pub fn coverage(panel: &RawPanel, registry: &Registry) -> CoverageReport {
    let mut report = CoverageReport::default();
    for year in panel.years() {
        let Some(vars) = registry.variables_for_year(year) else {
            continue;
        };
        for spec in vars {
            let missing: Vec<String> = panel
                .countries()
                .iter()
                .filter(|c| panel.get(c, year, &spec.id).is_none())
                .cloned()
                .collect();
            report.variables.push(VariableCoverage {
                year,
                variable: spec.id.clone(),
                observed: panel.countries().len() - missing.len(),
                missing,
            });
        }
        for country in panel.countries() {
            for pillar in PillarId::ALL {
                let in_pillar = vars.iter().filter(|s| s.pillar == pillar);
                let expected = in_pillar.clone().count();
                let observed = in_pillar
                    .filter(|s| panel.get(country, year, &s.id).is_some())
                    .count();
                let fraction = if expected == 0 {
                    0.0
                } else {
                    observed as f64 / expected as f64
                };
                report.pillars.push(PillarCoverage {
                    country: country.clone(),
                    year,
                    pillar,
                    observed,
                    expected,
                    fraction,
                });
            }
        }
    }
    report
}
