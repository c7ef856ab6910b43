use std::fs;

use foikit_core::cluster::{agglomerate, cut, distance_matrix};
use foikit_core::halfscale::HALFSCALE_HEADER;
use foikit_core::panel::{PANEL_HEADER, REGISTRY_HEADER};
use foikit_core::ranking::RANKS_HEADER;
use foikit_core::standardize::{load_indices, INDICES_HEADER};
use foikit_core::{
    compute_foi, halfscale_table, load_panel, load_registry, CountrySet, Fixture, LoadMode, RankTable, RawPanel,
    Registry,
};

const YEARS: [i32; 3] = [2000, 2010, 2020];

fn synthetic() -> (Fixture, Registry, RawPanel) {
    let fixture = Fixture::published();
    let registry = Registry::default_registry();
    let panel = fixture.synthetic_panel(&registry, &YEARS).unwrap();
    (fixture, registry, panel)
}

fn header(text: &str) -> Vec<&str> {
    text.lines().next().unwrap().split(',').collect()
}

#[test]
fn files_round_trip_through_disk() {
    let (fixture, registry, panel) = synthetic();
    let dir = tempfile::tempdir().unwrap();

    let reg_path = dir.path().join("registry.csv");
    let mut buf = Vec::new();
    registry.write_csv(&mut buf).unwrap();
    fs::write(&reg_path, &buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), REGISTRY_HEADER);
    let registry2 = load_registry(&reg_path, LoadMode::Strict).unwrap();

    let panel_path = dir.path().join("panel.csv");
    let mut buf = Vec::new();
    panel.write_csv(&mut buf).unwrap();
    fs::write(&panel_path, &buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), PANEL_HEADER);
    let set = CountrySet::new(fixture.countries()).unwrap();
    let panel2 = load_panel(&panel_path, &registry2, Some(&set)).unwrap();
    assert_eq!(panel2.len(), panel.len());

    let foi = compute_foi(&panel2, &registry2, &YEARS, 0.5).unwrap();
    let idx_path = dir.path().join("indices.csv");
    let mut buf = Vec::new();
    foi.write_csv(&mut buf).unwrap();
    fs::write(&idx_path, &buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), INDICES_HEADER);
    assert_eq!(load_indices(&idx_path).unwrap().rows(), foi.rows());
}

#[test]
fn panel_row_order_does_not_matter() {
    let (_, registry, panel) = synthetic();
    let mut buf = Vec::new();
    panel.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let head = lines.remove(0);
    lines.reverse();
    let third = lines.len() / 3;
    lines.rotate_left(third);
    let shuffled = format!("{head}\n{}\n", lines.join("\n"));
    let panel2 = RawPanel::parse(shuffled.as_bytes(), &registry, None).unwrap();
    let a = compute_foi(&panel, &registry, &YEARS, 0.5).unwrap();
    let b = compute_foi(&panel2, &registry, &YEARS, 0.5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn downstream_outputs_have_documented_headers() {
    let foi = Fixture::published().foi_table();
    let mut buf = Vec::new();
    RankTable::from_foi(&foi).write_csv(&mut buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), RANKS_HEADER);

    let mut buf = Vec::new();
    halfscale_table(&foi, 2020).write_csv(&mut buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), HALFSCALE_HEADER);

    let tree = agglomerate(&distance_matrix(&foi, 2020).unwrap()).unwrap();
    let mut buf = Vec::new();
    tree.write_csv(&mut buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), ["step", "left", "right", "height", "size"]);
    let mut buf = Vec::new();
    cut(&tree, 3).unwrap().write_csv(&mut buf).unwrap();
    assert_eq!(header(&String::from_utf8(buf).unwrap()), ["country", "cluster_id"]);
}

#[test]
fn missing_variables_lower_coverage() {
    let (fixture, registry, panel) = synthetic();
    // Drop all but two of the five O variables for Hungary in 2020.
    let o_vars: Vec<String> = registry
        .variables_for_year(2020)
        .unwrap()
        .iter()
        .filter(|s| s.pillar == foikit_core::PillarId::O)
        .map(|s| s.id.clone())
        .collect();
    let mut buf = Vec::new();
    panel.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !o_vars[..3].iter().any(|v| l.starts_with(&format!("HUN,2020,{v},"))))
        .collect();
    let set = CountrySet::new(fixture.countries()).unwrap();
    let thin = RawPanel::parse(format!("{}\n", kept.join("\n")).as_bytes(), &registry, Some(&set)).unwrap();
    let foi = compute_foi(&thin, &registry, &[2020], 0.5).unwrap();
    let hun = foi.get("HUN", 2020).unwrap();
    assert_eq!(hun.get(foikit_core::PillarId::O), None);
    assert!((hun.coverage[1] - 0.4).abs() < 1e-12);
    assert!(hun.get(foikit_core::PillarId::F).is_some());
}
