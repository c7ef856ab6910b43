//! Rendering of computed artifacts as markdown, JSON or CSV.
//!
//! Output is byte-stable for fixed input. Markdown shows one-decimal values
//! rounded half-up; JSON and CSV keep full precision.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::cluster::{agglomerate, cluster_means, cut, distance_matrix, proximity_report, ClusterCut, ClusterMeans, Dendrogram, Proximity};
use crate::error::{Error, Result};
use crate::halfscale::{transitions, HalfScaleTable, Transition};
use crate::panel::PillarId;
use crate::ranking::{trajectory, RankTable, TrajectoryPoint};
use crate::standardize::FoiTable;

/// Rounds to one decimal, halves away from zero.
pub fn display_round(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn display(x: f64) -> String {
    format!("{:.1}", display_round(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Markdown => "md",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalTrajectory {
    pub country: String,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSection {
    pub year: i32,
    pub k: usize,
    pub cut: ClusterCut,
    pub means: Vec<ClusterMeans>,
    pub excluded: Vec<String>,
    pub focal: Option<String>,
    pub proximity: Vec<Proximity>,
}

impl ClusterSection {
    /// Clusters `year` at `k`; also returns the full tree.
    pub fn compute(foi: &FoiTable, year: i32, k: usize, focal: Option<&str>) -> Result<(Self, Dendrogram)> {
        let dm = distance_matrix(foi, year)?;
        let tree = agglomerate(&dm)?;
        let cut = cut(&tree, k)?;
        let means = cluster_means(&cut, foi, year)?;
        let proximity = match focal {
            Some(f) => proximity_report(&dm, f, &cut)?,
            None => Vec::new(),
        };
        let section = ClusterSection {
            year,
            k,
            cut,
            means,
            excluded: dm.excluded().to_vec(),
            focal: focal.map(str::to_string),
            proximity,
        };
        Ok((section, tree))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionSection {
    pub from_year: i32,
    pub to_year: i32,
    pub rows: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub indices: FoiTable,
    pub ranks: RankTable,
    pub trajectory: Option<FocalTrajectory>,
    pub clustering: Option<ClusterSection>,
    pub halfscale: Vec<HalfScaleTable>,
    pub transitions: Vec<TransitionSection>,
}

impl Report {
    /// Assembles a report; transitions are taken between consecutive half-scale years.
    pub fn new(
        foi: FoiTable,
        clustering: Option<ClusterSection>,
        mut halfscale: Vec<HalfScaleTable>,
        focal: Option<&str>,
    ) -> Self {
        let ranks = RankTable::from_foi(&foi);
        halfscale.sort_by_key(|h| h.year);
        let transitions = halfscale
            .windows(2)
            .map(|w| TransitionSection {
                from_year: w[0].year,
                to_year: w[1].year,
                rows: transitions(&w[0], &w[1]),
            })
            .collect();
        let trajectory = focal.map(|c| FocalTrajectory {
            country: c.to_string(),
            points: trajectory(&ranks, c).into_iter().rev().collect(),
        });
        Report {
            indices: foi,
            ranks,
            trajectory,
            clustering,
            halfscale,
            transitions,
        }
    }
}

pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Markdown => Ok(markdown(report)),
        Format::Csv => csv_grid(report),
    }
}

/// Recovers the index table from a JSON report.
pub fn indices_from_json(text: &str) -> Result<FoiTable> {
    #[derive(serde::Deserialize)]
    struct Partial {
        indices: FoiTable,
    }
    Ok(serde_json::from_str::<Partial>(text)?.indices)
}

/// Column order: pillar-major, most recent year first.
fn grid_columns(report: &Report) -> Vec<(PillarId, i32)> {
    let mut years = report.indices.years();
    years.reverse();
    PillarId::ALL
        .iter()
        .flat_map(|p| years.iter().map(move |y| (*p, *y)))
        .collect()
}

fn countries(report: &Report) -> Vec<&str> {
    let mut c: Vec<&str> = report.indices.rows().iter().map(|r| r.country.as_str()).collect();
    c.sort_unstable();
    c.dedup();
    c
}

fn csv_grid(report: &Report) -> Result<String> {
    let cols = grid_columns(report);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["country".to_string()];
    for (p, y) in &cols {
        header.push(format!("{p}-{y}"));
        header.push(format!("{p}-{y}_rank"));
    }
    wtr.write_record(&header).map_err(Error::csv)?;
    for c in countries(report) {
        let mut rec = vec![c.to_string()];
        for (p, y) in &cols {
            let value = report.indices.get(c, *y).and_then(|r| r.get(*p));
            let rank = report.ranks.get(*y, *p).and_then(|r| r.rank_of(c));
            rec.push(value.map(|v| v.to_string()).unwrap_or_default());
            rec.push(rank.map(|r| r.to_string()).unwrap_or_default());
        }
        wtr.write_record(&rec).map_err(Error::csv)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::io("<report>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn markdown(report: &Report) -> String {
    let mut out = String::from("# FOI index report\n\n## Index scores and ranks\n\n");
    let cols = grid_columns(report);

    if cols.is_empty() {
        out.push_str("No index rows.\n");
    } else {
        out.push_str("| Country |");
        for (p, y) in &cols {
            let _ = write!(out, " {p}-{y} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(cols.len()));
        out.push('\n');
        for c in countries(report) {
            let _ = write!(out, "| {c} |");
            for (p, y) in &cols {
                let value = report.indices.get(c, *y).and_then(|r| r.get(*p));
                let rank = report.ranks.get(*y, *p).and_then(|r| r.rank_of(c));
                match (value, rank) {
                    (Some(v), Some(r)) => {
                        let _ = write!(out, " {} ({r}.) |", display(v));
                    }
                    _ => out.push_str(" – |"),
                }
            }
            out.push('\n');
        }
    }

    if let Some(t) = &report.trajectory {
        let _ = write!(out, "\n## Rank trajectory: {}\n\n| Year | F rank | O rank | I rank |\n|---|---|---|---|\n", t.country);
        for p in &t.points {
            let cell = |r: Option<usize>| r.map(|r| r.to_string()).unwrap_or_else(|| "–".into());
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                p.year,
                cell(p.ranks[0]),
                cell(p.ranks[1]),
                cell(p.ranks[2])
            );
        }
    }

    out.push_str("\n## Hierarchical clustering\n\n");
    match &report.clustering {
        None => out.push_str("No clusters.\n"),
        Some(cs) => {
            let _ = write!(
                out,
                "Average linkage on squared Euclidean distances, {} indices, k = {}.\n\n",
                cs.year, cs.k
            );
            out.push_str("| Cluster | Size | F | O | I | Members |\n|---|---|---|---|---|---|\n");
            for m in &cs.means {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    m.cluster,
                    m.size,
                    display(m.means[0]),
                    display(m.means[1]),
                    display(m.means[2]),
                    cs.cut.members(m.cluster).join(", ")
                );
            }
            if !cs.excluded.is_empty() {
                let _ = write!(out, "\nExcluded (incomplete indices): {}\n", cs.excluded.join(", "));
            }
            if let Some(focal) = &cs.focal {
                let _ = write!(out, "\n### Proximity to {focal}\n\n");
                if cs.proximity.is_empty() {
                    out.push_str("No other members in its cluster.\n");
                } else {
                    out.push_str("| Country | Squared distance |\n|---|---|\n");
                    for p in &cs.proximity {
                        let _ = writeln!(out, "| {} | {:.2} |", p.country, p.distance);
                    }
                }
            }
        }
    }

    for h in &report.halfscale {
        let _ = write!(out, "\n## Half-scale cells ({})\n\n| Cell | Members |\n|---|---|\n", h.year);
        for (cell, members) in h.cells() {
            let list = if members.is_empty() { "–".to_string() } else { members.join(", ") };
            let _ = writeln!(out, "| {} ({}) | {} |", cell.describe(), cell, list);
        }
        let boundary = h.boundary();
        if !boundary.is_empty() {
            let list: Vec<String> = boundary
                .iter()
                .map(|(c, ps)| format!("{c} ({})", ps.iter().map(|p| p.to_string()).collect::<String>()))
                .collect();
            let _ = write!(out, "\nAt the threshold: {}\n", list.join(", "));
        }
    }

    for t in &report.transitions {
        let _ = write!(
            out,
            "\n## Transitions {} → {}\n\n| Country | {} | {} | Moved |\n|---|---|---|---|\n",
            t.from_year, t.to_year, t.from_year, t.to_year
        );
        for row in &t.rows {
            let label = |l: &Option<crate::halfscale::HalfScaleLabel>| {
                l.as_ref().map(|l| l.to_string()).unwrap_or_else(|| "–".into())
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                row.country,
                label(&row.from),
                label(&row.to),
                if row.moved { "yes" } else { "no" }
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standardize::FoiRow;

    fn small() -> FoiTable {
        FoiTable::from_rows([
            FoiRow::complete("HUN", 2020, 3.1, 4.4, 2.6),
            FoiRow::complete("SVK", 2020, 3.4, 4.8, 2.9),
            FoiRow::complete("ISL", 2020, 5.3, 4.2, 5.0),
        ])
    }

    #[test]
    fn display_rounding_is_half_up() {
        assert_eq!(display(3.12), "3.1");
        assert_eq!(display(3.15), "3.2");
        assert_eq!(display(4.25), "4.3");
        assert_eq!(display(4.0), "4.0");
        assert_eq!(display_round(4.949), 4.9);
    }

    #[test]
    fn markdown_without_clusters() {
        let report = Report::new(small(), None, vec![], Some("HUN"));
        let md = emit_report(&report, Format::Markdown).unwrap();
        assert!(md.contains("| HUN | 3.1 (3.) | 4.4 (2.) | 2.6 (3.) |"), "{md}");
        assert!(md.contains("## Hierarchical clustering\n\nNo clusters."));
        assert!(md.contains("| 2020 | 3 | 2 | 3 |"));
    }

    #[test]
    fn json_round_trips_indices() {
        let mut foi = small();
        foi.insert(FoiRow::complete("AAA", 2020, 1.0 / 3.0 + 2.0, 0.1 + 0.2 + 4.0, 6.999999999999));
        let report = Report::new(foi.clone(), None, vec![], None);
        let json = emit_report(&report, Format::Json).unwrap();
        assert_eq!(indices_from_json(&json).unwrap(), foi);
    }

    #[test]
    fn csv_grid_has_rank_columns() {
        let report = Report::new(small(), None, vec![], None);
        let text = emit_report(&report, Format::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("country,F-2020,F-2020_rank,O-2020,O-2020_rank,I-2020,I-2020_rank")
        );
        assert_eq!(lines.next(), Some("HUN,3.1,3,4.4,2,2.6,3"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!(matches!("pdf".parse::<Format>(), Err(Error::UnsupportedFormat(_))));
    }
}
