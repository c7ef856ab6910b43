//! Half-scale classification into the eight high/low F·O·I cells.
//!
//! A pillar is high when its index is strictly above the threshold and low
//! when strictly below. An index exactly at the threshold yields
//! [`HalfScaleLabel::Boundary`] naming every such pillar.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::panel::PillarId;
use crate::standardize::{FoiRow, FoiTable};

pub const DEFAULT_THRESHOLD: f64 = 4.0;
pub const HALFSCALE_HEADER: [&str; 6] = ["country", "year", "F", "O", "I", "label"];

/// One of the eight cells; `high[p]` is true when pillar `p` is above threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub high: [bool; 3],
}

impl Cell {
    /// All cells, in the order FOI, FOi, FoI, fOI, Foi, fOi, foI, foi.
    pub const ALL: [Cell; 8] = [
        Cell { high: [true, true, true] },
        Cell { high: [true, true, false] },
        Cell { high: [true, false, true] },
        Cell { high: [false, true, true] },
        Cell { high: [true, false, false] },
        Cell { high: [false, true, false] },
        Cell { high: [false, false, true] },
        Cell { high: [false, false, false] },
    ];

    pub fn name(&self) -> String {
        PillarId::ALL
            .iter()
            .map(|p| {
                let c = p.letter();
                if self.high[p.index()] {
                    c
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect()
    }

    /// "High F, O, I"-style description.
    pub fn describe(&self) -> String {
        let pick = |want: bool| -> Vec<String> {
            PillarId::ALL
                .iter()
                .filter(|p| self.high[p.index()] == want)
                .map(|p| p.to_string())
                .collect()
        };
        let (hi, lo) = (pick(true), pick(false));
        match (hi.is_empty(), lo.is_empty()) {
            (false, true) => format!("High {}", hi.join(", ")),
            (true, false) => format!("Low {}", lo.join(", ")),
            _ => format!("High {}, low {}", hi.join(", "), lo.join(", ")),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Cell {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 {
            return Err(format!("bad cell {s:?}"));
        }
        let mut high = [false; 3];
        for p in PillarId::ALL {
            let c = chars[p.index()];
            if c == p.letter() {
                high[p.index()] = true;
            } else if c != p.letter().to_ascii_lowercase() {
                return Err(format!("bad cell {s:?}"));
            }
        }
        Ok(Cell { high })
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HalfScaleLabel {
    Cell(Cell),
    /// Pillars whose index equals the threshold exactly.
    Boundary(Vec<PillarId>),
}

impl HalfScaleLabel {
    pub fn cell(&self) -> Option<Cell> {
        match self {
            HalfScaleLabel::Cell(c) => Some(*c),
            HalfScaleLabel::Boundary(_) => None,
        }
    }
}

impl fmt::Display for HalfScaleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfScaleLabel::Cell(c) => write!(f, "{c}"),
            HalfScaleLabel::Boundary(ps) => {
                f.write_str("boundary:")?;
                ps.iter().try_for_each(|p| write!(f, "{p}"))
            }
        }
    }
}

impl FromStr for HalfScaleLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.strip_prefix("boundary:") {
            Some(rest) => {
                let set: BTreeSet<PillarId> = rest
                    .chars()
                    .map(|c| c.to_string().parse())
                    .collect::<std::result::Result<_, _>>()?;
                if set.is_empty() {
                    return Err("boundary label names no pillar".into());
                }
                Ok(HalfScaleLabel::Boundary(set.into_iter().collect()))
            }
            None => s.parse().map(HalfScaleLabel::Cell),
        }
    }
}

impl Serialize for HalfScaleLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn classify(f: f64, o: f64, i: f64, threshold: f64) -> HalfScaleLabel {
    let values = [f, o, i];
    let at: Vec<PillarId> = PillarId::ALL
        .into_iter()
        .filter(|p| values[p.index()] == threshold)
        .collect();
    if at.is_empty() {
        HalfScaleLabel::Cell(Cell {
            high: values.map(|v| v > threshold),
        })
    } else {
        HalfScaleLabel::Boundary(at)
    }
}

pub fn classify_row(row: &FoiRow, threshold: f64) -> Result<HalfScaleLabel> {
    let [f, o, i] = row.require_point()?;
    Ok(classify(f, o, i, threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classified {
    pub country: String,
    pub point: [f64; 3],
    pub label: HalfScaleLabel,
}

/// Labels of every complete row in one year, grouped by cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfScaleTable {
    pub year: i32,
    pub threshold: f64,
    /// Sorted by country code.
    pub rows: Vec<Classified>,
    /// Countries with a missing index.
    pub unclassified: Vec<String>,
}

impl HalfScaleTable {
    pub fn label(&self, country: &str) -> Option<&HalfScaleLabel> {
        self.rows.iter().find(|r| r.country == country).map(|r| &r.label)
    }

    pub fn members(&self, cell: Cell) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.label == HalfScaleLabel::Cell(cell))
            .map(|r| r.country.as_str())
            .collect()
    }

    /// All eight cells in [`Cell::ALL`] order, empty ones included.
    pub fn cells(&self) -> Vec<(Cell, Vec<&str>)> {
        Cell::ALL.iter().map(|c| (*c, self.members(*c))).collect()
    }

    pub fn boundary(&self) -> Vec<(&str, &[PillarId])> {
        self.rows
            .iter()
            .filter_map(|r| match &r.label {
                HalfScaleLabel::Boundary(ps) => Some((r.country.as_str(), ps.as_slice())),
                HalfScaleLabel::Cell(_) => None,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(HALFSCALE_HEADER).map_err(Error::csv)?;
        for r in &self.rows {
            wtr.write_record([
                r.country.clone(),
                self.year.to_string(),
                r.point[0].to_string(),
                r.point[1].to_string(),
                r.point[2].to_string(),
                r.label.to_string(),
            ])
            .map_err(Error::csv)?;
        }
        wtr.flush().map_err(|e| Error::io("<halfscale>", e))
    }
}

pub fn halfscale_table(foi: &FoiTable, year: i32) -> HalfScaleTable {
    halfscale_table_with(foi, year, DEFAULT_THRESHOLD)
}

pub fn halfscale_table_with(foi: &FoiTable, year: i32, threshold: f64) -> HalfScaleTable {
    let mut rows = Vec::new();
    let mut unclassified = Vec::new();
    for row in foi.year(year) {
        match row.point() {
            Some(point) => rows.push(Classified {
                country: row.country.clone(),
                point,
                label: classify(point[0], point[1], point[2], threshold),
            }),
            None => unclassified.push(row.country.clone()),
        }
    }
    HalfScaleTable {
        year,
        threshold,
        rows,
        unclassified,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub country: String,
    pub from: Option<HalfScaleLabel>,
    pub to: Option<HalfScaleLabel>,
    pub moved: bool,
}

/// Label pairs for every country classified in either table, by country code.
pub fn transitions(a: &HalfScaleTable, b: &HalfScaleTable) -> Vec<Transition> {
    let countries: BTreeSet<&str> = a
        .rows
        .iter()
        .chain(&b.rows)
        .map(|r| r.country.as_str())
        .collect();
    countries
        .into_iter()
        .map(|c| {
            let from = a.label(c).cloned();
            let to = b.label(c).cloned();
            Transition {
                country: c.to_string(),
                moved: from != to,
                from,
                to,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell(s: &str) -> HalfScaleLabel {
        HalfScaleLabel::Cell(s.parse().unwrap())
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(3.1, 4.4, 2.6, 4.0), cell("fOi"));
        assert_eq!(classify(4.7, 3.7, 4.1, 4.0), cell("FoI"));
        assert_eq!(classify(3.8, 6.1, 4.6, 4.0), cell("fOI"));
        assert_eq!(classify(4.0, 4.9, 4.6, 4.0), HalfScaleLabel::Boundary(vec![PillarId::F]));
        assert_eq!(
            classify(4.0, 4.0, 4.0, 4.0),
            HalfScaleLabel::Boundary(vec![PillarId::F, PillarId::O, PillarId::I])
        );
    }

    #[test]
    fn label_strings() {
        assert_eq!(Cell::ALL.map(|c| c.name()), ["FOI", "FOi", "FoI", "fOI", "Foi", "fOi", "foI", "foi"]);
        assert_eq!(HalfScaleLabel::Boundary(vec![PillarId::F]).to_string(), "boundary:F");
        assert_eq!(HalfScaleLabel::Boundary(vec![PillarId::O, PillarId::I]).to_string(), "boundary:OI");
        for s in ["FOI", "fOi", "boundary:F", "boundary:FOI"] {
            assert_eq!(s.parse::<HalfScaleLabel>().unwrap().to_string(), s);
        }
        assert!("FOX".parse::<HalfScaleLabel>().is_err());
        assert!("boundary:".parse::<HalfScaleLabel>().is_err());
        assert_eq!(Cell::ALL[5].describe(), "High O, low F, I");
        assert_eq!(Cell::ALL[0].describe(), "High F, O, I");
    }

    #[test]
    fn missing_index_errors() {
        let row = FoiRow {
            country: "HUN".into(),
            year: 2020,
            indices: [Some(3.1), None, Some(2.6)],
            coverage: [1.0, 0.0, 1.0],
        };
        assert!(matches!(classify_row(&row, 4.0), Err(Error::MissingIndex { .. })));
        let table = halfscale_table(&FoiTable::from_rows([row]), 2020);
        assert_eq!(table.unclassified, ["HUN"]);
    }

    #[test]
    fn identical_points_share_a_cell() {
        let foi = FoiTable::from_rows(["AAA", "BBB", "CCC"].map(|c| FoiRow::complete(c, 2020, 5.0, 5.0, 5.0)));
        let table = halfscale_table(&foi, 2020);
        assert_eq!(table.members(Cell::ALL[0]), ["AAA", "BBB", "CCC"]);
        assert_eq!(table.cells().iter().filter(|(_, m)| !m.is_empty()).count(), 1);
    }

    #[test]
    fn transitions_flag_moves() {
        let a = halfscale_table(
            &FoiTable::from_rows([
                FoiRow::complete("HUN", 2010, 3.2, 4.6, 2.5),
                FoiRow::complete("ISR", 2010, 3.6, 4.9, 4.1),
                FoiRow::complete("XXX", 2010, 5.0, 5.0, 5.0),
            ]),
            2010,
        );
        let b = halfscale_table(
            &FoiTable::from_rows([
                FoiRow::complete("HUN", 2020, 3.1, 4.4, 2.6),
                FoiRow::complete("ISR", 2020, 4.5, 4.6, 4.1),
            ]),
            2020,
        );
        let t = transitions(&a, &b);
        assert_eq!(t.len(), 3);
        assert!(!t[0].moved);
        assert_eq!(t[0].to, Some(cell("fOi")));
        assert!(t[1].moved);
        assert_eq!((t[1].from.clone(), t[1].to.clone()), (Some(cell("fOI")), Some(cell("FOI"))));
        assert_eq!(t[2].to, None);
        assert!(t[2].moved);
    }

    #[test]
    fn halfscale_csv() {
        let foi = FoiTable::from_rows([
            FoiRow::complete("CAN", 2020, 4.0, 4.9, 4.6),
            FoiRow::complete("HUN", 2020, 3.1, 4.4, 2.6),
        ]);
        let mut buf = Vec::new();
        halfscale_table(&foi, 2020).write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "country,year,F,O,I,label\nCAN,2020,4,4.9,4.6,boundary:F\nHUN,2020,3.1,4.4,2.6,fOi\n"
        );
    }

    proptest! {
        #[test]
        fn label_letters_track_comparisons(p in prop::array::uniform3(1f64..=7.0)) {
            let label = classify(p[0], p[1], p[2], 4.0);
            match &label {
                HalfScaleLabel::Cell(c) => {
                    let name: Vec<char> = c.name().chars().collect();
                    for k in 0..3 {
                        prop_assert_eq!(name[k].is_ascii_uppercase(), p[k] > 4.0);
                        prop_assert!(p[k] != 4.0);
                    }
                }
                HalfScaleLabel::Boundary(ps) => {
                    prop_assert!(!ps.is_empty());
                    for q in ps {
                        prop_assert_eq!(p[q.index()], 4.0);
                    }
                }
            }
        }

        #[test]
        fn small_perturbations_keep_cell(p in prop::array::uniform3(1f64..=7.0), t in -0.999f64..0.999) {
            let gap = p.iter().map(|v| (v - 4.0).abs()).fold(f64::INFINITY, f64::min);
            prop_assume!(gap > 0.0);
            let eps = t * gap;
            let moved = classify(p[0] + eps, p[1] + eps, p[2] + eps, 4.0);
            prop_assert_eq!(moved, classify(p[0], p[1], p[2], 4.0));
        }
    }
}
