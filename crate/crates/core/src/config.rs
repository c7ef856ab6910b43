use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::panel::LoadMode;
use crate::report::Format;
use crate::standardize::DEFAULT_MIN_COVERAGE;

pub const OUT_DIR_ENV: &str = "FOIKIT_OUT_DIR";

/// Settings for one command-line run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub panel: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub countries: Option<PathBuf>,
    pub indices: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub years: Vec<i32>,
    pub min_coverage: f64,
    pub k: usize,
    pub focal: Option<String>,
    pub format: Format,
    pub mode: LoadMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            panel: None,
            registry: None,
            countries: None,
            indices: None,
            out_dir: default_out_dir(),
            years: vec![2020],
            min_coverage: DEFAULT_MIN_COVERAGE,
            k: 3,
            focal: None,
            format: Format::Markdown,
            mode: LoadMode::Strict,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.years.is_empty() {
            return Err(Error::Config("no years requested".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(Error::Config(format!("min coverage {} outside [0, 1]", self.min_coverage)));
        }
        Ok(())
    }
}

/// `$FOIKIT_OUT_DIR`, or the working directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = [
            RunConfig { years: vec![], ..Default::default() },
            RunConfig { k: 0, ..Default::default() },
            RunConfig { min_coverage: 1.5, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        }
    }
}
