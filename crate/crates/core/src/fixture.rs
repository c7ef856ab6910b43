//! Published index table for the 34 countries that were OECD members in
//! 2010, with the printed ranks, the proximity list around Hungary and the
//! half-scale cell memberships for 2020.
//!
//! Values are the printed one-decimal figures, so every check against them
//! carries a rounding tolerance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::halfscale::Cell;
use crate::panel::{CountrySet, Observation, Orientation, PillarId, RawPanel, Registry};
use crate::standardize::{FoiRow, FoiTable, SCALE_MAX, SCALE_MIN};

pub const FIXTURE_YEARS: [i32; 3] = [2020, 2010, 2000];

type PublishedRow = (&'static str, &'static str, [[f64; 3]; 3], [[usize; 3]; 3]);

/// `(code, name, [year][pillar] value, [year][pillar] rank)`, years as in [`FIXTURE_YEARS`].
const PUBLISHED: [PublishedRow; 34] = [
    ("AUS", "Australia", [[3.8, 5.3, 4.6], [4.6, 5.3, 4.4], [4.5, 4.6, 4.3]], [[24, 4, 12], [13, 10, 6], [18, 11, 14]]),
    ("AUT", "Austria", [[4.4, 5.1, 3.9], [5.1, 5.4, 4.0], [5.3, 4.2, 4.7]], [[10, 8, 18], [9, 8, 12], [7, 16, 7]]),
    ("BEL", "Belgium", [[3.8, 4.9, 3.6], [4.2, 5.6, 3.5], [5.1, 4.9, 4.3]], [[22, 14, 22], [17, 5, 21], [11, 7, 16]]),
    ("CAN", "Canada", [[4.0, 4.9, 4.6], [4.2, 5.4, 4.5], [4.9, 5.0, 4.7]], [[17, 11, 11], [18, 7, 2], [15, 4, 8]]),
    ("CHL", "Chile", [[3.6, 3.9, 3.8], [3.8, 5.0, 4.1], [3.9, 4.0, 2.9]], [[27, 29, 19], [21, 14, 9], [23, 20, 31]]),
    ("CZE", "Czechia", [[3.8, 4.2, 3.2], [3.4, 5.0, 3.6], [3.1, 2.4, 3.3]], [[25, 25, 25], [27, 15, 20], [31, 33, 27]]),
    ("DNK", "Denmark", [[4.9, 5.0, 4.7], [5.3, 5.8, 4.3], [5.2, 4.4, 4.8]], [[4, 10, 9], [8, 2, 7], [9, 14, 5]]),
    ("EST", "Estonia", [[4.2, 4.7, 3.6], [3.2, 4.9, 3.1], [3.1, 3.7, 3.3]], [[16, 16, 21], [30, 16, 25], [30, 22, 26]]),
    ("FIN", "Finland", [[4.6, 5.1, 4.9], [5.4, 5.7, 4.0], [5.6, 4.6, 5.1]], [[7, 9, 6], [7, 3, 13], [5, 12, 2]]),
    ("FRA", "France", [[4.2, 4.3, 3.5], [4.7, 4.5, 3.0], [5.0, 4.0, 4.3]], [[15, 22, 23], [12, 21, 27], [13, 19, 15]]),
    ("DEU", "Germany", [[4.4, 4.7, 4.5], [4.8, 5.3, 3.7], [4.9, 4.3, 4.3]], [[11, 17, 15], [11, 11, 18], [14, 15, 13]]),
    ("GRC", "Greece", [[3.3, 2.9, 1.9], [3.1, 3.7, 2.5], [3.0, 2.8, 3.2]], [[30, 34, 34], [31, 32, 34], [32, 31, 29]]),
    ("HUN", "Hungary", [[3.1, 4.4, 2.6], [3.2, 4.6, 2.5], [3.4, 3.2, 3.4]], [[33, 21, 33], [29, 19, 33], [28, 26, 24]]),
    ("ISL", "Iceland", [[5.3, 4.2, 5.0], [5.8, 2.3, 4.4], [5.6, 4.1, 5.1]], [[1, 24, 4], [3, 34, 5], [2, 17, 3]]),
    ("IRL", "Ireland", [[4.3, 4.6, 5.0], [4.2, 4.2, 3.9], [4.1, 4.7, 4.5]], [[14, 18, 5], [19, 28, 16], [20, 10, 12]]),
    ("ISR", "Israel", [[4.5, 4.6, 4.1], [3.6, 4.9, 4.1], [4.2, 4.1, 4.3]], [[9, 19, 17], [26, 17, 10], [19, 18, 17]]),
    ("ITA", "Italy", [[3.5, 3.5, 2.7], [3.7, 3.8, 2.7], [3.9, 3.2, 3.6]], [[28, 32, 32], [22, 30, 32], [24, 28, 21]]),
    ("JPN", "Japan", [[4.7, 3.7, 4.1], [5.5, 3.7, 4.0], [5.6, 3.5, 3.5]], [[6, 30, 16], [5, 31, 14], [3, 24, 22]]),
    ("KOR", "Korea", [[4.3, 4.3, 3.8], [4.5, 4.3, 3.3], [4.0, 3.5, 3.3]], [[12, 23, 20], [14, 26, 22], [22, 25, 28]]),
    ("LUX", "Luxembourg", [[3.8, 6.1, 4.6], [6.1, 6.6, 4.5], [5.4, 5.8, 5.7]], [[23, 1, 13], [1, 1, 4], [6, 1, 1]]),
    ("MEX", "Mexico", [[3.0, 4.1, 3.3], [2.6, 4.0, 2.9], [3.0, 3.0, 2.4]], [[34, 26, 24], [34, 29, 30], [33, 30, 34]]),
    ("NLD", "Netherlands", [[4.3, 5.3, 5.3], [4.9, 5.5, 3.8], [5.1, 5.0, 4.6]], [[13, 6, 2], [10, 6, 17], [10, 3, 9]]),
    ("NZL", "New Zealand", [[4.5, 5.1, 4.8], [4.4, 4.5, 4.0], [4.7, 4.5, 4.1]], [[8, 7, 8], [15, 20, 15], [17, 13, 18]]),
    ("NOR", "Norway", [[4.7, 4.9, 4.9], [5.5, 5.7, 4.1], [5.2, 5.0, 4.6]], [[5, 13, 7], [4, 4, 11], [8, 5, 10]]),
    ("POL", "Poland", [[3.7, 4.0, 3.1], [3.1, 4.4, 3.1], [3.2, 3.2, 2.8]], [[26, 28, 29], [32, 22, 26], [29, 29, 32]]),
    ("PRT", "Portugal", [[3.9, 3.7, 3.1], [3.7, 4.3, 2.9], [3.6, 3.9, 3.4]], [[19, 31, 28], [25, 24, 29], [26, 21, 23]]),
    ("SVK", "Slovakia", [[3.4, 4.8, 2.9], [3.3, 4.8, 3.3], [3.6, 2.6, 3.1]], [[29, 15, 31], [28, 18, 23], [27, 32, 30]]),
    ("SVN", "Slovenia", [[4.0, 4.5, 3.2], [3.7, 5.1, 2.7], [4.1, 3.2, 3.3]], [[18, 20, 26], [23, 13, 31], [21, 27, 25]]),
    ("ESP", "Spain", [[3.2, 4.0, 3.1], [3.7, 4.2, 3.0], [3.7, 3.7, 4.0]], [[31, 27, 27], [24, 27, 28], [25, 23, 20]]),
    ("SWE", "Sweden", [[4.9, 4.9, 4.6], [5.5, 5.2, 4.1], [5.6, 4.8, 4.7]], [[3, 12, 14], [6, 12, 8], [4, 9, 6]]),
    ("CHE", "Switzerland", [[5.2, 5.4, 5.6], [5.9, 5.4, 4.9], [5.9, 4.8, 4.9]], [[2, 3, 1], [2, 9, 1], [1, 8, 4]]),
    ("TUR", "Turkey", [[3.1, 3.2, 3.1], [3.0, 3.6, 3.1], [2.9, 1.9, 2.6]], [[32, 33, 30], [33, 33, 24], [34, 34, 33]]),
    ("GBR", "United Kingdom", [[3.8, 5.3, 4.7], [4.3, 4.3, 3.6], [4.8, 5.0, 4.1]], [[21, 5, 10], [16, 23, 19], [16, 6, 19]]),
    ("USA", "United States", [[3.9, 5.4, 5.3], [4.1, 4.3, 4.5], [5.0, 5.0, 4.5]], [[20, 2, 3], [20, 25, 3], [12, 2, 11]]),
];

/// Hungary's `(F, O, I)` ranks per year.
pub const HUNGARY_TRAJECTORY: [(i32, [usize; 3]); 3] = [(2020, [33, 21, 33]), (2010, [29, 19, 33]), (2000, [28, 26, 24])];

/// A range of cluster counts and the `(country, distance)` pairs printed for it.
pub type ProximityRow = (std::ops::RangeInclusive<usize>, &'static [(&'static str, f64)]);

/// Members of Hungary's cluster and their printed squared distance to it,
/// by range of cluster counts. Includes LVA and LTU, which have no fixture indices.
pub const PROXIMITY_TABLE: [ProximityRow; 3] = [
    (
        3..=8,
        &[
            ("BEL", 1.72),
            ("CHL", 1.95),
            ("CZE", 0.9),
            ("EST", 2.27),
            ("FRA", 2.0),
            ("ITA", 0.97),
            ("KOR", 2.85),
            ("LVA", 0.84),
            ("LTU", 1.32),
            ("MEX", 0.5),
            ("POL", 0.79),
            ("PRT", 1.53),
            ("SVK", 0.33),
            ("SVN", 1.19),
            ("ESP", 0.44),
        ],
    ),
    (
        9..=10,
        &[
            ("CHL", 1.95),
            ("CZE", 0.9),
            ("ITA", 0.97),
            ("LVA", 0.84),
            ("LTU", 1.32),
            ("MEX", 0.5),
            ("POL", 0.79),
            ("PRT", 1.53),
            ("SVK", 0.33),
            ("ESP", 0.44),
        ],
    ),
    (11..=11, &[("SVK", 0.33)]),
];

/// Published 2020 half-scale cells over the 38 members, in [`Cell::ALL`] order.
pub const HALFSCALE_2020: [(&str, &[&str]); 8] = [
    ("FOI", &["DNK", "FIN", "DEU", "ISL", "IRL", "ISR", "NLD", "NZL", "NOR", "SWE", "CHE"]),
    ("FOi", &["AUT", "EST", "FRA", "KOR"]),
    ("FoI", &["JPN"]),
    ("fOI", &["AUS", "LUX", "GBR", "USA"]),
    ("Foi", &[]),
    ("fOi", &["BEL", "CZE", "HUN", "LVA", "LTU", "MEX", "POL", "SVK", "SVN", "ESP"]),
    ("foI", &[]),
    ("foi", &["CHL", "COL", "CRI", "GRC", "ITA", "PRT", "TUR"]),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub code: String,
    pub name: String,
    pub year: i32,
    pub values: [f64; 3],
    pub ranks: [usize; 3],
}

/// Editable copy of the published tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fixture {
    pub rows: Vec<FixtureRow>,
}

impl Default for Fixture {
    fn default() -> Self {
        Fixture::published()
    }
}

impl Fixture {
    pub fn published() -> Self {
        let mut rows = Vec::with_capacity(PUBLISHED.len() * 3);
        for (code, name, values, ranks) in PUBLISHED {
            for (k, year) in FIXTURE_YEARS.iter().enumerate() {
                rows.push(FixtureRow {
                    code: code.to_string(),
                    name: name.to_string(),
                    year: *year,
                    values: values[k],
                    ranks: ranks[k],
                });
            }
        }
        Fixture { rows }
    }

    pub fn row(&self, code: &str, year: i32) -> Option<&FixtureRow> {
        self.rows.iter().find(|r| r.code == code && r.year == year)
    }

    pub fn countries(&self) -> Vec<&str> {
        let mut codes: Vec<&str> = self.rows.iter().map(|r| r.code.as_str()).collect();
        codes.sort_unstable();
        codes.dedup();
        codes
    }

    pub fn name(&self, code: &str) -> Option<&str> {
        self.rows.iter().find(|r| r.code == code).map(|r| r.name.as_str())
    }

    /// Drops every row of `code`.
    pub fn remove_country(&mut self, code: &str) {
        self.rows.retain(|r| r.code != code);
    }

    pub fn set_value(&mut self, code: &str, year: i32, pillar: PillarId, value: f64) -> Result<()> {
        let row = self
            .rows
            .iter_mut()
            .find(|r| r.code == code && r.year == year)
            .ok_or_else(|| Error::Config(format!("no fixture row for {code} {year}")))?;
        row.values[pillar.index()] = value;
        Ok(())
    }

    pub fn foi_table(&self) -> FoiTable {
        FoiTable::from_rows(self.rows.iter().map(|r| {
            let [f, o, i] = r.values;
            FoiRow::complete(r.code.clone(), r.year, f, o, i)
        }))
    }

    pub fn country_set(&self) -> Result<CountrySet> {
        CountrySet::new(self.countries())
    }

    /// A raw panel whose standardized pillar means reproduce the fixture values.
    ///
    /// Per pillar of `m` variables, the `j`-th highest country scores 7 on
    /// variable `j` and the `j`-th lowest scores 1, each compensating evenly
    /// on its other variables so its row mean stays at the target. Every
    /// variable therefore spans exactly 1..7 and standardization is the
    /// identity up to a per-variable affine relabelling of the raw values.
    pub fn synthetic_panel(&self, registry: &Registry, years: &[i32]) -> Result<RawPanel> {
        let set = self.country_set()?;
        let mut obs = Vec::new();
        for &year in years {
            let vars = registry
                .variables_for_year(year)
                .ok_or(Error::YearWithoutVintage(year))?;
            let rows: Vec<&FixtureRow> = self.rows.iter().filter(|r| r.year == year).collect();
            for pillar in PillarId::ALL {
                let specs: Vec<_> = vars.iter().filter(|s| s.pillar == pillar).collect();
                let targets: Vec<(&str, f64)> = rows
                    .iter()
                    .map(|r| (r.code.as_str(), r.values[pillar.index()]))
                    .collect();
                let grid = anchor_grid(&targets, specs.len())
                    .map_err(|msg| Error::Config(format!("{year} {pillar}: {msg}")))?;
                for (j, spec) in specs.iter().enumerate() {
                    let scale = 1.0 + j as f64;
                    let offset = 10.0 * j as f64;
                    for (c, (code, _)) in targets.iter().enumerate() {
                        let s = grid[c][j];
                        let oriented = match spec.orientation {
                            Orientation::HigherIsBetter => s,
                            Orientation::LowerIsBetter => SCALE_MIN + SCALE_MAX - s,
                        };
                        obs.push(Observation {
                            country: code.to_string(),
                            year,
                            variable: spec.id.clone(),
                            value: offset + scale * oriented,
                            line: 0,
                        });
                    }
                }
            }
        }
        RawPanel::from_observations(obs, registry, Some(&set))
    }
}

/// Scores in `[1, 7]` with row means equal to `targets` and every column
/// reaching both 1 and 7.
fn anchor_grid(targets: &[(&str, f64)], m: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    let n = targets.len();
    if m < 2 || n < 2 * m {
        return Err(format!("cannot anchor {m} variables with {n} countries"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| targets[b].1.total_cmp(&targets[a].1).then(targets[a].0.cmp(targets[b].0)));

    let mut grid: Vec<Vec<f64>> = targets.iter().map(|(_, t)| vec![*t; m]).collect();
    let spread = (m - 1) as f64;
    for j in 0..m {
        let top = order[j];
        let bottom = order[n - 1 - j];
        let t = targets[top].1;
        let rest = t - (SCALE_MAX - t) / spread;
        if rest < SCALE_MIN {
            return Err(format!("{} ({t}) too low to anchor the maximum", targets[top].0));
        }
        grid[top] = (0..m).map(|k| if k == j { SCALE_MAX } else { rest }).collect();

        let t = targets[bottom].1;
        let rest = t + (t - SCALE_MIN) / spread;
        if rest > SCALE_MAX {
            return Err(format!("{} ({t}) too high to anchor the minimum", targets[bottom].0));
        }
        grid[bottom] = (0..m).map(|k| if k == j { SCALE_MIN } else { rest }).collect();
    }
    Ok(grid)
}

/// Fixture 2020 cells keyed by parsed [`Cell`].
pub fn published_cells() -> Vec<(Cell, Vec<&'static str>)> {
    HALFSCALE_2020
        .iter()
        .map(|(name, members)| (name.parse().expect("valid cell name"), members.to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standardize::compute_foi;

    #[test]
    fn published_shape() {
        let fx = Fixture::published();
        assert_eq!(fx.countries().len(), 34);
        assert_eq!(fx.rows.len(), 102);
        let hun = fx.row("HUN", 2020).unwrap();
        assert_eq!(hun.values, [3.1, 4.4, 2.6]);
        assert_eq!(hun.ranks, [33, 21, 33]);
        assert_eq!(fx.row("ISL", 2020).unwrap().values[0], 5.3);
        assert_eq!(fx.name("GBR"), Some("United Kingdom"));
        let mut oecd = CountrySet::oecd_2010().codes().to_vec();
        oecd.sort();
        assert_eq!(fx.country_set().unwrap().codes(), oecd.as_slice());
        let cells = published_cells();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells.iter().map(|(_, m)| m.len()).sum::<usize>(), 37);
    }

    #[test]
    fn edits() {
        let mut fx = Fixture::published();
        fx.set_value("HUN", 2020, PillarId::O, 3.9).unwrap();
        assert_eq!(fx.row("HUN", 2020).unwrap().values[1], 3.9);
        fx.remove_country("SVK");
        assert!(fx.row("SVK", 2020).is_none());
        assert!(fx.set_value("SVK", 2020, PillarId::O, 1.0).is_err());
    }

    #[test]
    fn synthetic_panel_reproduces_hungary() {
        let fx = Fixture::published();
        let reg = Registry::default_registry();
        let panel = fx.synthetic_panel(&reg, &[2020]).unwrap();
        assert_eq!(panel.len(), 816);
        let foi = compute_foi(&panel, &reg, &[2020], 0.5).unwrap();
        let hun = foi.get("HUN", 2020).unwrap().point().unwrap();
        for (got, want) in hun.iter().zip([3.1, 4.4, 2.6]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn anchor_grid_rejects_impossible_targets() {
        let t: Vec<(&str, f64)> = vec![("A", 1.0), ("B", 1.0), ("C", 1.0), ("D", 1.0)];
        assert!(anchor_grid(&t, 2).is_err());
        assert!(anchor_grid(&t[..3], 2).is_err());
        assert!(anchor_grid(&t, 1).is_err());
    }
}
