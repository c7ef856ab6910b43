//! `foikit`: compute, rank, cluster and classify F/O/I development indices.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use foikit_core::config::{default_out_dir, RunConfig};
use foikit_core::panel::{load_country_set, load_panel, load_registry};
use foikit_core::report::{indices_from_json, ClusterSection};
use foikit_core::standardize::{load_indices, DEFAULT_MIN_COVERAGE};
use foikit_core::{
    compute_foi, emit_report, halfscale_table, verify_fixture, Fixture, FoiTable, Format, LoadMode, RankTable,
    Registry, Report, Warning,
};

#[derive(Parser)]
#[command(name = "foikit", version, about = "Composite F/O/I development indices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Standardize a raw panel and write pillar indices.
    Indices(IndicesArgs),
    /// Rank every pillar in every year.
    Rank(InputArgs),
    /// Average-linkage clustering of one year, cut into k groups.
    Cluster(ClusterArgs),
    /// Classify one year into the eight half-scale cells.
    Halfscale(HalfscaleArgs),
    /// Render indices, ranks, clusters and half-scale cells as one document.
    Report(ReportArgs),
    /// Run the fixture acceptance suite and print the ledger.
    Verify,
    /// Write the embedded fixture, default registry and a matching synthetic panel.
    ExportFixture(OutArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output directory [default: $FOIKIT_OUT_DIR or .]
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(default_out_dir)
    }
}

#[derive(Args)]
struct IndicesArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Variable registry CSV [default: embedded registry]
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Country list, one ISO3 code per line
    #[arg(long)]
    countries: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2020")]
    years: Vec<i32>,
    #[arg(long, default_value_t = DEFAULT_MIN_COVERAGE)]
    min_coverage: f64,
    /// Downgrade registry pillar-count mismatches to warnings
    #[arg(long)]
    permissive: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct InputArgs {
    /// Indices CSV or JSON report [default: embedded fixture]
    #[arg(long)]
    indices: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2020)]
    year: i32,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Print this country's cluster co-members by distance
    #[arg(long)]
    focal: Option<String>,
}

#[derive(Args)]
struct HalfscaleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2020)]
    year: i32,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Half-scale years [default: every year in the indices]
    #[arg(long, value_delimiter = ',')]
    years: Vec<i32>,
    /// Clustering year
    #[arg(long, default_value_t = 2020)]
    year: i32,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    focal: Option<String>,
    #[arg(long, default_value = "markdown")]
    format: Format,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Indices(a) => indices(a)?,
        Command::Rank(a) => {
            let foi = read_indices(a.indices.as_deref())?;
            let mut buf = Vec::new();
            RankTable::from_foi(&foi).write_csv(&mut buf)?;
            write_out(&a.out.dir(), "ranks.csv", &buf)?;
        }
        Command::Cluster(a) => cluster(a)?,
        Command::Halfscale(a) => {
            let foi = read_indices(a.input.indices.as_deref())?;
            if foi.year(a.year).next().is_none() {
                bail!("no indices for {}", a.year);
            }
            let table = halfscale_table(&foi, a.year);
            for c in &table.unclassified {
                eprintln!("warning: {c} {} has a missing index and was not classified", a.year);
            }
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            write_out(&a.input.out.dir(), "halfscale.csv", &buf)?;
        }
        Command::Report(a) => report(a)?,
        Command::Verify => {
            let ledger = verify_fixture();
            print!("{}", ledger.render());
            if !ledger.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::ExportFixture(a) => export_fixture(&a.dir())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn indices(a: IndicesArgs) -> Result<()> {
    let mode = if a.permissive { LoadMode::Permissive } else { LoadMode::Strict };
    let cfg = RunConfig {
        panel: Some(a.panel.clone()),
        registry: a.registry.clone(),
        countries: a.countries.clone(),
        years: a.years.clone(),
        min_coverage: a.min_coverage,
        mode,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let registry = match &cfg.registry {
        Some(p) => load_registry(p, mode)?,
        None => Registry::default_registry(),
    };
    warn_all(registry.warnings());
    let countries = cfg.countries.as_ref().map(load_country_set).transpose()?;
    let panel = load_panel(&a.panel, &registry, countries.as_ref())?;
    let foi = compute_foi(&panel, &registry, &cfg.years, cfg.min_coverage)?;
    warn_all(foi.warnings());
    let mut buf = Vec::new();
    foi.write_csv(&mut buf)?;
    write_out(&a.out.dir(), "indices.csv", &buf)
}

fn cluster(a: ClusterArgs) -> Result<()> {
    RunConfig { k: a.k, ..RunConfig::default() }.validate()?;
    let foi = read_indices(a.input.indices.as_deref())?;
    let (section, tree) = ClusterSection::compute(&foi, a.year, a.k, a.focal.as_deref())?;
    for c in &section.excluded {
        warn_all(&[Warning::ExcludedFromClustering { country: c.clone(), year: a.year }]);
    }
    let dir = a.input.out.dir();
    let mut buf = Vec::new();
    tree.write_csv(&mut buf)?;
    write_out(&dir, "dendrogram.csv", &buf)?;
    buf.clear();
    section.cut.write_csv(&mut buf)?;
    write_out(&dir, "cut.csv", &buf)?;
    if let Some(focal) = &section.focal {
        println!("nearest to {focal} within its cluster:");
        for p in &section.proximity {
            println!("  {} {:.2}", p.country, p.distance);
        }
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    RunConfig { k: a.k, ..RunConfig::default() }.validate()?;
    let foi = read_indices(a.input.indices.as_deref())?;
    let years = if a.years.is_empty() { foi.years() } else { a.years.clone() };
    let halfscale = years.iter().map(|&y| halfscale_table(&foi, y)).collect();
    let clustering = if foi.year(a.year).next().is_some() {
        Some(ClusterSection::compute(&foi, a.year, a.k, a.focal.as_deref())?.0)
    } else {
        eprintln!("warning: no indices for {}, clustering skipped", a.year);
        None
    };
    let report = Report::new(foi, clustering, halfscale, a.focal.as_deref());
    let text = emit_report(&report, a.format)?;
    write_out(&a.input.out.dir(), &format!("report.{}", a.format.extension()), text.as_bytes())
}

fn export_fixture(dir: &Path) -> Result<()> {
    let fixture = Fixture::published();
    let registry = Registry::default_registry();
    let mut years = fixture.foi_table().years();
    years.sort();
    let panel = fixture.synthetic_panel(&registry, &years)?;

    let mut buf = Vec::new();
    fixture.foi_table().write_csv(&mut buf)?;
    write_out(dir, "indices.csv", &buf)?;
    buf.clear();
    registry.write_csv(&mut buf)?;
    write_out(dir, "registry.csv", &buf)?;
    buf.clear();
    panel.write_csv(&mut buf)?;
    write_out(dir, "panel.csv", &buf)?;
    let codes: String = fixture.countries().iter().map(|c| format!("{c}\n")).collect();
    write_out(dir, "countries.txt", codes.as_bytes())
}

/// `.json` is read as a report, anything else as an indices CSV.
fn read_indices(path: Option<&Path>) -> Result<FoiTable> {
    let Some(path) = path else {
        return Ok(Fixture::published().foi_table());
    };
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(indices_from_json(&text).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        Ok(load_indices(path)?)
    }
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn warn_all(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}
