//! Per-pillar rankings with deterministic tie-breaking.
//!
//! Ranks are distinct integers `1..=n`: descending by value, equal values
//! ordered by country code. Countries whose values coincide after display
//! rounding (one decimal, half-up) form a tie group, since a printed table
//! cannot distinguish their order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::PillarId;
use crate::report::display_round;
use crate::standardize::FoiTable;

pub const RANKS_HEADER: [&str; 6] = ["country", "year", "pillar", "value", "rank", "tie_group_id"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub country: String,
    pub value: f64,
    pub rank: usize,
    /// 1-based id of the display-rounding tie group, if any.
    pub tie_group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Ranking {
    /// Sorted by rank.
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn rank_of(&self, country: &str) -> Option<usize> {
        self.entry(country).map(|e| e.rank)
    }

    pub fn entry(&self, country: &str) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.country == country)
    }

    /// Members of each tie group, in rank order.
    pub fn tie_groups(&self) -> BTreeMap<usize, Vec<&RankEntry>> {
        let mut groups: BTreeMap<usize, Vec<&RankEntry>> = BTreeMap::new();
        for e in &self.entries {
            if let Some(g) = e.tie_group {
                groups.entry(g).or_default().push(e);
            }
        }
        groups
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn rank<S: AsRef<str>>(values: &[(S, f64)]) -> Result<Ranking> {
    if values.is_empty() {
        return Err(Error::EmptyRanking);
    }
    let mut sorted: Vec<(&str, f64)> = values.iter().map(|(c, v)| (c.as_ref(), *v)).collect();
    sorted.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });

    let mut entries: Vec<RankEntry> = sorted
        .iter()
        .enumerate()
        .map(|(i, (c, v))| RankEntry {
            country: c.to_string(),
            value: *v,
            rank: i + 1,
            tie_group: None,
        })
        .collect();

    // Rounded values are non-increasing along the order, so groups are contiguous runs.
    let mut group = 0;
    let mut start = 0;
    while start < entries.len() {
        let shown = display_round(entries[start].value);
        let mut end = start + 1;
        while end < entries.len() && display_round(entries[end].value) == shown {
            end += 1;
        }
        if end - start > 1 {
            group += 1;
            for e in &mut entries[start..end] {
                e.tie_group = Some(group);
            }
        }
        start = end;
    }
    Ok(Ranking { entries })
}

/// Rankings keyed by `(year, pillar)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankTable {
    tables: BTreeMap<(i32, PillarId), Ranking>,
}

impl Serialize for RankTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Section<'a> {
            year: i32,
            pillar: PillarId,
            entries: &'a [RankEntry],
        }
        s.collect_seq(self.tables.iter().map(|((year, pillar), r)| Section {
            year: *year,
            pillar: *pillar,
            entries: &r.entries,
        }))
    }
}

impl RankTable {
    /// Ranks every `(year, pillar)` over countries with that index present.
    pub fn from_foi(foi: &FoiTable) -> Self {
        let mut tables = BTreeMap::new();
        for year in foi.years() {
            for pillar in PillarId::ALL {
                let values: Vec<(&str, f64)> = foi
                    .year(year)
                    .filter_map(|r| r.get(pillar).map(|v| (r.country.as_str(), v)))
                    .collect();
                if let Ok(ranking) = rank(&values) {
                    tables.insert((year, pillar), ranking);
                }
            }
        }
        RankTable { tables }
    }

    pub fn get(&self, year: i32, pillar: PillarId) -> Option<&Ranking> {
        self.tables.get(&(year, pillar))
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.tables.keys().map(|(y, _)| *y).collect();
        years.dedup();
        years
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, PillarId, &Ranking)> {
        self.tables.iter().map(|((y, p), r)| (*y, *p, r))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(RANKS_HEADER).map_err(Error::csv)?;
        for ((year, pillar), ranking) in &self.tables {
            for e in &ranking.entries {
                wtr.write_record([
                    e.country.as_str(),
                    &year.to_string(),
                    &pillar.to_string(),
                    &e.value.to_string(),
                    &e.rank.to_string(),
                    &e.tie_group.map(|g| g.to_string()).unwrap_or_default(),
                ])
                .map_err(Error::csv)?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<ranks>", e))
    }
}

/// F, O and I ranks of one country in one year; `None` where it is unranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectoryPoint {
    pub year: i32,
    pub ranks: [Option<usize>; 3],
}

/// Ranks of `country` for every year in `ranks`, oldest first.
pub fn trajectory(ranks: &RankTable, country: &str) -> Vec<TrajectoryPoint> {
    ranks
        .years()
        .into_iter()
        .map(|year| TrajectoryPoint {
            year,
            ranks: PillarId::ALL.map(|p| ranks.get(year, p).and_then(|r| r.rank_of(country))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standardize::FoiRow;
    use proptest::prelude::*;

    #[test]
    fn sorted_input_keeps_order() {
        let r = rank(&[("A", 5.0), ("B", 4.0), ("C", 3.0)]).unwrap();
        let got: Vec<(&str, usize)> = r.entries.iter().map(|e| (e.country.as_str(), e.rank)).collect();
        assert_eq!(got, vec![("A", 1), ("B", 2), ("C", 3)]);
        assert!(r.tie_groups().is_empty());
    }

    #[test]
    fn exact_tie_is_lexicographic_and_grouped() {
        let r = rank(&[("SWE", 4.9), ("DNK", 4.9), ("CHE", 5.2), ("FIN", 4.6)]).unwrap();
        assert_eq!(r.rank_of("CHE"), Some(1));
        assert_eq!(r.rank_of("DNK"), Some(2));
        assert_eq!(r.rank_of("SWE"), Some(3));
        assert_eq!(r.entry("DNK").unwrap().tie_group, Some(1));
        assert_eq!(r.entry("SWE").unwrap().tie_group, Some(1));
        assert_eq!(r.entry("CHE").unwrap().tie_group, None);
    }

    #[test]
    fn rounding_tie_keeps_value_order() {
        // Both display as 4.9 but the unrounded order wins.
        let r = rank(&[("AAA", 4.86), ("BBB", 4.91)]).unwrap();
        assert_eq!(r.rank_of("BBB"), Some(1));
        assert_eq!(r.entries[0].tie_group, r.entries[1].tie_group);
        assert!(r.entries[0].tie_group.is_some());
    }

    #[test]
    fn empty_is_an_error() {
        let none: [(&str, f64); 0] = [];
        assert!(matches!(rank(&none), Err(Error::EmptyRanking)));
    }

    #[test]
    fn trajectory_with_missing_pillar() {
        let mut foi = FoiTable::new();
        foi.insert(FoiRow::complete("AAA", 2010, 3.0, 4.0, 5.0));
        foi.insert(FoiRow::complete("BBB", 2010, 4.0, 5.0, 6.0));
        foi.insert(FoiRow {
            country: "AAA".into(),
            year: 2020,
            indices: [Some(3.0), None, Some(5.0)],
            coverage: [1.0, 0.0, 1.0],
        });
        foi.insert(FoiRow::complete("BBB", 2020, 2.0, 5.0, 6.0));
        let table = RankTable::from_foi(&foi);
        let t = trajectory(&table, "AAA");
        assert_eq!(t[0], TrajectoryPoint { year: 2010, ranks: [Some(2), Some(2), Some(2)] });
        assert_eq!(t[1], TrajectoryPoint { year: 2020, ranks: [Some(1), None, Some(2)] });
        assert_eq!(table.get(2020, PillarId::O).unwrap().len(), 1);
    }

    #[test]
    fn ranks_csv_layout() {
        let foi = FoiTable::from_rows([
            FoiRow::complete("AAA", 2020, 3.0, 4.0, 5.0),
            FoiRow::complete("BBB", 2020, 3.0, 5.0, 6.0),
        ]);
        let mut buf = Vec::new();
        RankTable::from_foi(&foi).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("country,year,pillar,value,rank,tie_group_id"));
        assert_eq!(lines.next(), Some("AAA,2020,F,3,1,1"));
        assert_eq!(lines.next(), Some("BBB,2020,F,3,2,1"));
        assert_eq!(lines.next(), Some("BBB,2020,O,5,1,"));
    }

    proptest! {
        #[test]
        fn permutation_and_monotone_transform(
            vals in prop::collection::vec(1f64..7.0, 1..30),
            seed in any::<u64>(),
        ) {
            let named: Vec<(String, f64)> = vals.iter().enumerate().map(|(i, v)| (format!("C{i:02}"), *v)).collect();
            let base = rank(&named).unwrap();

            let mut shuffled = named.clone();
            let n = shuffled.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(&rank(&shuffled).unwrap(), &base);

            let cubed: Vec<(String, f64)> = named.iter().map(|(c, v)| (c.clone(), v.powi(3) + 2.0)).collect();
            let cubed_rank = rank(&cubed).unwrap();
            let order: Vec<&str> = cubed_rank.entries.iter().map(|e| e.country.as_str()).collect();
            let base_order: Vec<&str> = base.entries.iter().map(|e| e.country.as_str()).collect();
            prop_assert_eq!(order, base_order);

            let ranks: Vec<usize> = base.entries.iter().map(|e| e.rank).collect();
            prop_assert_eq!(ranks, (1..=n).collect::<Vec<_>>());
            for w in base.entries.windows(2) {
                prop_assert!(w[0].value >= w[1].value);
            }
        }
    }
}
