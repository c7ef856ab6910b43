//! Fixture verification suite.
//!
//! Each check recomputes a published result from the embedded fixture and
//! records measured vs expected values. Failures are ledger entries, not
//! errors, so edited fixtures can be probed. Randomized checks use a fixed
//! seed and the rendered ledger is byte-stable.

pub mod oracle;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cluster::{agglomerate, cluster_means, cut, distance_matrix, DistanceMatrix};
use crate::fixture::{published_cells, Fixture, HUNGARY_TRAJECTORY, PROXIMITY_TABLE};
use crate::halfscale::{halfscale_table, HalfScaleLabel, DEFAULT_THRESHOLD};
use crate::panel::{Orientation, PillarId};
use crate::ranking::{rank, trajectory, RankTable};
use crate::report::display;
use crate::standardize::{pillar_index, standardize_values, SCALE_MAX, SCALE_MID, SCALE_MIN};

/// Absolute tolerance on squared distances: ±0.05 rounding per coordinate bounds the error near 0.2.
pub const PROXIMITY_TOLERANCE: f64 = 0.20;
pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const PROPERTY_TOLERANCE: f64 = 1e-12;

const FOCAL: &str = "HUN";
const NEAREST: &str = "SVK";
/// Published cluster members outside the 34-country fixture.
const NOT_IN_FIXTURE: [&str; 2] = ["LVA", "LTU"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ledger {
    pub criteria: Vec<Criterion>,
}

impl Ledger {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: u8) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                out,
                "[{}] {}. {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.name
            );
            let _ = writeln!(out, "    measured:  {}", c.measured);
            let _ = writeln!(out, "    expected:  {}", c.expected);
            let _ = writeln!(out, "    tolerance: {}", c.tolerance);
            for n in &c.notes {
                let _ = writeln!(out, "    note: {n}");
            }
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} criteria passed", self.criteria.len());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub oracle_trials: usize,
    pub max_oracle_points: usize,
    pub slice_trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0x05EE_DF01,
            oracle_trials: 200,
            max_oracle_points: 8,
            slice_trials: 1000,
        }
    }
}

/// Runs every check against the published fixture.
pub fn verify_fixture() -> Ledger {
    verify_with(&Fixture::published(), &VerifyOptions::default())
}

pub fn verify_with(fixture: &Fixture, opts: &VerifyOptions) -> Ledger {
    Ledger {
        criteria: vec![
            halfscale_reproduction(fixture),
            halfscale_anchor(fixture),
            proximity_reproduction(fixture),
            rank_consistency(fixture),
            oracle_equivalence(opts),
            cluster_plausibility(fixture),
            standardization_properties(opts),
        ],
    }
}

fn fmt_label(l: Option<&HalfScaleLabel>) -> String {
    l.map(|l| l.to_string()).unwrap_or_else(|| "absent".into())
}

pub fn halfscale_reproduction(fixture: &Fixture) -> Criterion {
    let started = Instant::now();
    let foi = fixture.foi_table();
    let table = halfscale_table(&foi, 2020);
    let cells = published_cells();

    let mut matched = 0;
    let mut compared = 0;
    let mut boundary_ok = 0;
    let mut boundary_seen = 0;
    let mut notes = Vec::new();
    for row in fixture.rows.iter().filter(|r| r.year == 2020) {
        let got = table.label(&row.code);
        let at: Vec<PillarId> = PillarId::ALL
            .into_iter()
            .filter(|p| row.values[p.index()] == DEFAULT_THRESHOLD)
            .collect();
        if at.is_empty() {
            compared += 1;
            let published = cells.iter().find(|(_, m)| m.contains(&row.code.as_str())).map(|(c, _)| *c);
            match (published, got) {
                (Some(cell), Some(HalfScaleLabel::Cell(c))) if *c == cell => matched += 1,
                (published, got) => notes.push(format!(
                    "{}: classified {}, published {}",
                    row.code,
                    fmt_label(got),
                    published.map(|c| c.to_string()).unwrap_or_else(|| "none".into())
                )),
            }
        } else {
            boundary_seen += 1;
            if got == Some(&HalfScaleLabel::Boundary(at.clone())) {
                boundary_ok += 1;
            } else {
                notes.push(format!("{}: expected boundary, classified {}", row.code, fmt_label(got)));
            }
            let published = cells.iter().find(|(_, m)| m.contains(&row.code.as_str())).map(|(c, _)| *c);
            notes.push(match published {
                Some(cell) => format!(
                    "{} sits on the threshold after rounding; the published cell {} reflects its unrounded index",
                    row.code, cell
                ),
                None => format!("{} sits on the threshold and is absent from every published cell", row.code),
            });
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let fast = elapsed < 1.0;
    if !fast {
        notes.push("runtime exceeded 1 s".into());
    }
    Criterion {
        id: 1,
        name: "Half-scale cells 2020".into(),
        passed: compared == 30 && matched == compared && boundary_seen == 4 && boundary_ok == 4 && fast,
        measured: format!("{matched}/{compared} cells match; {boundary_ok}/{boundary_seen} boundary countries flagged"),
        expected: "30/30 cells match; 4/4 boundary (CAN, POL, SVN, ESP); runtime < 1 s".into(),
        tolerance: "exact".into(),
        notes,
    }
}

pub fn halfscale_anchor(fixture: &Fixture) -> Criterion {
    let foi = fixture.foi_table();
    let t2010 = halfscale_table(&foi, 2010);
    let t2020 = halfscale_table(&foi, 2020);
    let checks = [
        ("HUN", "fOi", "fOi"),
        ("ISR", "fOI", "FOI"),
        ("CHL", "fOI", "foi"),
    ];
    let mut measured = Vec::new();
    let mut passed = true;
    for (code, from, to) in checks {
        let a = fmt_label(t2010.label(code));
        let b = fmt_label(t2020.label(code));
        passed &= a == from && b == to;
        measured.push(format!("{code} {a}→{b}"));
    }
    Criterion {
        id: 2,
        name: "Half-scale 2010 anchor and transitions".into(),
        passed,
        measured: measured.join(", "),
        expected: checks
            .iter()
            .map(|(c, a, b)| format!("{c} {a}→{b}"))
            .collect::<Vec<_>>()
            .join(", "),
        tolerance: "exact".into(),
        notes: vec![],
    }
}

pub fn proximity_reproduction(fixture: &Fixture) -> Criterion {
    let foi = fixture.foi_table();
    let (_, members) = &PROXIMITY_TABLE[0];
    let expected_members: Vec<&(&str, f64)> = members.iter().filter(|(c, _)| !NOT_IN_FIXTURE.contains(c)).collect();

    let mut notes = Vec::new();
    let dm = match distance_matrix(&foi, 2020) {
        Ok(dm) => dm,
        Err(e) => return failed(3, "Proximity to Hungary", &e.to_string()),
    };
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for (code, printed) in &expected_members {
        match dm.between(FOCAL, code) {
            Some(d) => {
                let err = (d - printed).abs();
                worst = worst.max(err);
                if err <= PROXIMITY_TOLERANCE {
                    within += 1;
                } else {
                    notes.push(format!("{code}: {d:.2} vs printed {printed:.2}"));
                }
            }
            None => notes.push(format!("{code}: missing from fixture")),
        }
    }
    let nearest = nearest_neighbour(&dm, FOCAL);
    let nearest_ok = nearest.as_deref() == Some(NEAREST);
    if !nearest_ok {
        notes.push(format!("nearest neighbour is {}", nearest.as_deref().unwrap_or("none")));
    }
    Criterion {
        id: 3,
        name: "Proximity to Hungary".into(),
        passed: within == expected_members.len() && nearest_ok,
        measured: format!(
            "{within}/{} within tolerance (max abs error {worst:.3}); nearest {}",
            expected_members.len(),
            nearest.as_deref().unwrap_or("none")
        ),
        expected: format!("{n}/{n} within tolerance; nearest {NEAREST}", n = expected_members.len()),
        tolerance: format!("±{PROXIMITY_TOLERANCE:.2} absolute"),
        notes,
    }
}

fn nearest_neighbour(dm: &DistanceMatrix, focal: &str) -> Option<String> {
    let fi = dm.index_of(focal)?;
    (0..dm.len())
        .filter(|&j| j != fi)
        .min_by(|&a, &b| dm.get(fi, a).total_cmp(&dm.get(fi, b)))
        .map(|j| dm.labels()[j].clone())
}

pub fn rank_consistency(fixture: &Fixture) -> Criterion {
    let mut exact = 0;
    let mut grouped = 0;
    let mut mismatches = Vec::new();
    for year in [2020, 2010, 2000] {
        for pillar in PillarId::ALL {
            let rows: Vec<_> = fixture.rows.iter().filter(|r| r.year == year).collect();
            let values: Vec<(&str, f64)> = rows.iter().map(|r| (r.code.as_str(), r.values[pillar.index()])).collect();
            let Ok(ranking) = rank(&values) else {
                mismatches.push(format!("{pillar}-{year}: no rows"));
                continue;
            };
            let printed = |code: &str| {
                rows.iter()
                    .find(|r| r.code == code)
                    .map(|r| r.ranks[pillar.index()])
                    .unwrap_or(0)
            };
            for e in ranking.entries.iter().filter(|e| e.tie_group.is_none()) {
                if e.rank == printed(&e.country) {
                    exact += 1;
                } else {
                    mismatches.push(format!("{}-{year} {}: {} vs {}", pillar, e.country, e.rank, printed(&e.country)));
                }
            }
            for (_, group) in ranking.tie_groups() {
                let ours: BTreeSet<usize> = group.iter().map(|e| e.rank).collect();
                let theirs: BTreeSet<usize> = group.iter().map(|e| printed(&e.country)).collect();
                if ours == theirs {
                    grouped += group.len();
                } else {
                    let names: Vec<&str> = group.iter().map(|e| e.country.as_str()).collect();
                    mismatches.push(format!("{pillar}-{year} tie group {}: {ours:?} vs {theirs:?}", names.join("/")));
                }
            }
        }
    }

    let ranks = RankTable::from_foi(&fixture.foi_table());
    let traj = trajectory(&ranks, FOCAL);
    let mut traj_ok = true;
    let mut traj_seen = Vec::new();
    let mut trajectory_notes = Vec::new();
    for (year, want) in HUNGARY_TRAJECTORY {
        let got = traj.iter().find(|p| p.year == year).map(|p| p.ranks);
        let fmt = |r: [Option<usize>; 3]| {
            r.map(|x| x.map(|x| x.to_string()).unwrap_or_else(|| "-".into())).join(",")
        };
        traj_seen.push(format!("{year}: ({})", got.map(fmt).unwrap_or_else(|| "absent".into())));
        traj_ok &= got == Some(want.map(Some));
        for pillar in PillarId::ALL {
            let Some(entry) = ranks.get(year, pillar).and_then(|r| r.entry(FOCAL)) else {
                continue;
            };
            let published = want[pillar.index()];
            if entry.rank == published {
                continue;
            }
            let partners: Vec<&str> = ranks
                .get(year, pillar)
                .map(|r| r.tie_groups().remove(&entry.tie_group.unwrap_or(0)).unwrap_or_default())
                .unwrap_or_default()
                .into_iter()
                .filter(|e| e.country != FOCAL)
                .map(|e| e.country.as_str())
                .collect();
            let why = if partners.is_empty() {
                "not in a tie group".to_string()
            } else {
                format!("tied at {} with {}; order needs unrounded values", display(entry.value), partners.join("/"))
            };
            trajectory_notes.push(format!("{FOCAL} {pillar}-{year}: {} vs published {published}; {why}", entry.rank));
        }
    }
    let mut notes = mismatches.clone();
    notes.extend(trajectory_notes);

    Criterion {
        id: 4,
        name: "Rank consistency and Hungary trajectory".into(),
        passed: mismatches.is_empty() && traj_ok,
        measured: format!(
            "{exact} exact, {grouped} in tie groups consistent, {} mismatches; HUN {}",
            mismatches.len(),
            traj_seen.join(" ")
        ),
        expected: "0 mismatches; HUN 2020: (33,21,33) 2010: (29,19,33) 2000: (28,26,24)".into(),
        tolerance: "exact outside tie groups; permutation within tie groups; trajectory exact".into(),
        notes,
    }
}

pub fn oracle_equivalence(opts: &VerifyOptions) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut non_monotone = 0;
    for trial in 0..opts.oracle_trials {
        let n = rng.gen_range(2..=opts.max_oracle_points.max(2));
        let points: Vec<[f64; 3]> = (0..n)
            .map(|_| [0, 1, 2].map(|_| rng.gen_range(SCALE_MIN..=SCALE_MAX)))
            .collect();
        let labels = (0..n).map(|i| format!("P{i}")).collect();
        let tree = match agglomerate(&DistanceMatrix::from_points(labels, &points)) {
            Ok(t) => t,
            Err(e) => {
                failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let expected = oracle::upgma_brute_force(&points);
        let merges = tree.merges();
        let same_shape = merges.len() == expected.len()
            && merges
                .iter()
                .zip(&expected)
                .all(|(m, &(l, r, _, s))| (m.left, m.right, m.size) == (l, r, s));
        if !same_shape {
            failures.push(format!("trial {trial}: merge sequence differs"));
            continue;
        }
        for (m, (_, _, h, _)) in merges.iter().zip(&expected) {
            max_err = max_err.max((m.height - h).abs());
        }
        if merges.windows(2).any(|w| w[1].height < w[0].height) {
            non_monotone += 1;
        }
    }
    let passed = failures.is_empty() && max_err <= ORACLE_TOLERANCE && non_monotone == 0 && opts.oracle_trials >= 100;
    Criterion {
        id: 5,
        name: "Agglomeration matches brute-force average linkage".into(),
        passed,
        measured: format!(
            "{} trials, {} sequence mismatches, max height error {:.1e}, {non_monotone} non-monotone",
            opts.oracle_trials,
            failures.len(),
            max_err
        ),
        expected: "≥100 trials, 0 mismatches, 0 non-monotone".into(),
        tolerance: format!("{ORACLE_TOLERANCE:.0e} on heights"),
        notes: failures.into_iter().take(5).collect(),
    }
}

pub fn cluster_plausibility(fixture: &Fixture) -> Criterion {
    let foi = fixture.foi_table();
    let run = || -> crate::error::Result<(bool, usize, [f64; 3])> {
        let dm = distance_matrix(&foi, 2020)?;
        let tree = agglomerate(&dm)?;
        let three = cut(&tree, 3)?;
        let home = three
            .cluster_of(FOCAL)
            .ok_or_else(|| crate::error::Error::UnknownFocal(FOCAL.into()))?;
        let with_svk = three.cluster_of(NEAREST) == Some(home);
        let members = three.members(home);
        let (_, published) = &PROXIMITY_TABLE[0];
        let shared = published
            .iter()
            .filter(|(c, _)| !NOT_IN_FIXTURE.contains(c) && members.contains(c))
            .count();
        let means = cluster_means(&three, &foi, 2020)?;
        Ok((with_svk, shared, means[home - 1].means))
    };
    match run() {
        Ok((with_svk, shared, [f, o, i])) => Criterion {
            id: 6,
            name: "Three-cluster structure around Hungary".into(),
            passed: with_svk && shared >= 11 && o > f && o > i,
            measured: format!(
                "HUN/SVK together: {with_svk}; {shared}/13 published members in HUN cluster; means F {f:.2} O {o:.2} I {i:.2}"
            ),
            expected: "together; ≥11/13; mean O > mean F and mean O > mean I".into(),
            tolerance: "property-level".into(),
            notes: vec![],
        },
        Err(e) => failed(6, "Three-cluster structure around Hungary", &e.to_string()),
    }
}

pub fn standardization_properties(opts: &VerifyOptions) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xA5A5);
    let mut failures: Vec<String> = Vec::new();
    let mut degenerate = 0;
    let mut max_affine: f64 = 0.0;
    let mut max_flip: f64 = 0.0;
    let mut max_mean: f64 = 0.0;

    for trial in 0..opts.slice_trials {
        let n = rng.gen_range(1..=40);
        let flat = rng.gen_bool(0.05);
        let base = rng.gen_range(0.0..100.0);
        let raw: Vec<(String, f64)> = (0..n)
            .map(|i| (format!("C{i:02}"), if flat { base } else { rng.gen_range(0.0..100.0) }))
            .collect();
        let a = rng.gen_range(0.1..10.0);
        let b = rng.gen_range(-100.0..100.0);
        let moved: Vec<(String, f64)> = raw.iter().map(|(c, v)| (c.clone(), a * v + b)).collect();

        let (up, down, shifted) = match (
            standardize_values(2020, "x", &raw, Orientation::HigherIsBetter),
            standardize_values(2020, "x", &raw, Orientation::LowerIsBetter),
            standardize_values(2020, "x", &moved, Orientation::HigherIsBetter),
        ) {
            (Ok(u), Ok(d), Ok(s)) => (u, d, s),
            _ => {
                failures.push(format!("trial {trial}: standardization error"));
                continue;
            }
        };
        let s: Vec<f64> = up.values.iter().map(|v| v.1).collect();

        if up.is_degenerate() {
            degenerate += 1;
            if !s.iter().all(|v| *v == SCALE_MID) || up.warning().is_none() {
                failures.push(format!("trial {trial}: degenerate slice not mapped to 4.0 with warning"));
            }
            continue;
        }
        if s.iter().any(|v| !(SCALE_MIN..=SCALE_MAX).contains(v)) {
            failures.push(format!("trial {trial}: value outside [1, 7]"));
        }
        let (lo_i, hi_i) = argmin_argmax(&raw);
        if s[lo_i] != SCALE_MIN || s[hi_i] != SCALE_MAX {
            failures.push(format!("trial {trial}: endpoints map to {} and {}", s[lo_i], s[hi_i]));
        }
        for ((x, y), z) in up.values.iter().zip(&shifted.values).zip(&down.values) {
            max_affine = max_affine.max((x.1 - y.1).abs());
            max_flip = max_flip.max((x.1 + z.1 - 8.0).abs());
        }
        let size = s.len();
        let idx = pillar_index(&s, size, 0.0).value.unwrap_or(f64::NAN);
        let brute = s.iter().rev().fold(0.0, |acc, v| acc + v) / size as f64;
        max_mean = max_mean.max((idx - brute).abs());
    }
    for (what, err) in [("affine", max_affine), ("flip", max_flip), ("mean", max_mean)] {
        if err.is_nan() || err > PROPERTY_TOLERANCE {
            failures.push(format!("{what} error {err:.1e}"));
        }
    }
    Criterion {
        id: 7,
        name: "Standardization properties".into(),
        passed: failures.is_empty() && opts.slice_trials >= 1000,
        measured: format!(
            "{} slices ({degenerate} degenerate); max error affine {max_affine:.1e}, flip {max_flip:.1e}, mean {max_mean:.1e}; {} failures",
            opts.slice_trials,
            failures.len()
        ),
        expected: "endpoints 1 and 7, outputs in [1, 7], degenerate → 4.0 with warning, 0 failures".into(),
        tolerance: format!("{PROPERTY_TOLERANCE:.0e}"),
        notes: failures.into_iter().take(5).collect(),
    }
}

fn argmin_argmax(raw: &[(String, f64)]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, (_, v)) in raw.iter().enumerate() {
        if *v < raw[lo].1 {
            lo = i;
        }
        if *v > raw[hi].1 {
            hi = i;
        }
    }
    (lo, hi)
}

fn failed(id: u8, name: &str, why: &str) -> Criterion {
    Criterion {
        id,
        name: name.into(),
        passed: false,
        measured: format!("error: {why}"),
        expected: "computable".into(),
        tolerance: "-".into(),
        notes: vec![],
    }
}
