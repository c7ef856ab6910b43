//! Composite F/O/I development indices.
//!
//! Raw country-year observations of 24 registry variables are min-max
//! standardized onto a 1–7 scale and averaged into three pillar indices:
//! future (F), outside (O) and inside (I) potential. The indices are then
//! ranked, clustered with average linkage on squared Euclidean distances,
//! and classified into eight high/low half-scale cells.
//!
//! Modules follow the pipeline: [`panel`] → [`standardize`] → [`ranking`],
//! [`cluster`], [`halfscale`] → [`report`]. [`fixture`] embeds the published
//! index table and [`verify`] checks the pipeline against it.

pub mod cluster;
pub mod config;
pub mod diag;
pub mod error;
pub mod fixture;
pub mod halfscale;
pub mod panel;
pub mod ranking;
pub mod report;
pub mod standardize;
pub mod verify;

pub use cluster::{agglomerate, cluster_means, cut, distance_matrix, proximity_report, sq_euclidean};
pub use diag::Warning;
pub use error::{Error, Result};
pub use fixture::Fixture;
pub use halfscale::{classify, halfscale_table, transitions, Cell, HalfScaleLabel};
pub use panel::{coverage, load_panel, load_registry, CountrySet, LoadMode, Orientation, PillarId, RawPanel, Registry};
pub use ranking::{rank, trajectory, RankTable};
pub use report::{emit_report, Format, Report};
pub use standardize::{compute_foi, minmax_standardize, oriented_extrema, pillar_index, FoiRow, FoiTable};
pub use verify::{verify_fixture, Ledger};
