//! Run configuration: a flat `key = value` file merged with command-line
//! overrides.
//!
//! Recognised keys:
//!
//! ```text
//! p, v, delta            instance primitives
//! cost_family, c0, k     cost density (reciprocal | logarithmic)
//! grid_size, tol, max_iters, inner_tol
//! runs, horizon, seed    simulation and path length
//! slots, budget          exhaustive oracle
//! format                 comma-separated subset of csv,json,svg
//! out                    output directory
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown or repeated
//! keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use innovation_search::{CostFamily, CostModel, ModelParams, SearchError, SolverConfig, DEFAULT_BUDGET};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "p",
    "v",
    "delta",
    "cost_family",
    "c0",
    "k",
    "grid_size",
    "tol",
    "max_iters",
    "inner_tol",
    "runs",
    "horizon",
    "seed",
    "slots",
    "budget",
    "format",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}' (expected csv, json or svg)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

/// Raw key/value settings before validation; later layers override earlier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value', got '{line}'", n + 1)))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key '{key}'", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: key '{key}' given twice", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| CliError::Config(format!("{key}: cannot parse '{raw}': {e}"))),
        }
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|e| CliError::Config(format!("{key}: cannot parse '{raw}': {e}")))
            })
            .transpose()
    }
}

/// Validated configuration shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub runs: u64,
    /// Path length or simulation horizon; `None` uses the subcommand default.
    pub horizon: Option<usize>,
    pub seed: u64,
    pub slots: usize,
    pub budget: u64,
    pub formats: Vec<Format>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let family: CostFamily = s.parsed("cost_family", CostFamily::Reciprocal)?;
        let cost = CostModel::new(family, s.parsed("c0", 0.0)?, s.parsed("k", 1.0)?).map_err(field_error)?;
        let params =
            ModelParams::new(s.parsed("p", 0.5)?, s.parsed("v", 2.0)?, s.parsed("delta", 0.9)?, cost).map_err(field_error)?;

        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            grid_size: s.parsed("grid_size", defaults.grid_size)?,
            tol: s.parsed("tol", defaults.tol)?,
            max_iters: s.parsed("max_iters", defaults.max_iters)?,
            inner_tol: s.parsed("inner_tol", defaults.inner_tol)?,
            ..defaults
        };
        solver.validate().map_err(field_error)?;

        let runs: u64 = s.parsed("runs", 100_000)?;
        if runs == 0 {
            return Err(CliError::Config("runs: must be at least 1".into()));
        }
        let horizon: Option<usize> = s.optional("horizon")?;
        if horizon == Some(0) {
            return Err(CliError::Config("horizon: must be at least 1".into()));
        }
        let slots: usize = s.parsed("slots", 6)?;
        if slots == 0 {
            return Err(CliError::Config("slots: must be at least 1".into()));
        }
        let formats = match s.get("format") {
            None => vec![Format::Csv, Format::Json, Format::Svg],
            Some(raw) => parse_formats(raw)?,
        };
        Ok(Self {
            params,
            solver,
            runs,
            horizon,
            seed: s.parsed("seed", 42)?,
            slots,
            budget: s.parsed("budget", DEFAULT_BUDGET)?,
            formats,
            out: s.parsed("out", PathBuf::from("out"))?,
        })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

pub fn parse_formats(raw: &str) -> Result<Vec<Format>, CliError> {
    let mut formats = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(|e| CliError::Config(format!("format: {e}"))))
        .collect::<Result<Vec<Format>, _>>()?;
    formats.sort();
    formats.dedup();
    if formats.is_empty() {
        return Err(CliError::Config("format: at least one of csv, json, svg".into()));
    }
    Ok(formats)
}

fn field_error(e: SearchError) -> CliError {
    let msg = match &e {
        SearchError::InvalidConfig { field, reason } => format!("{field}: {reason}"),
        SearchError::Domain { name, value, expected } => format!("{name}: {value} is not {expected}"),
        other => other.to_string(),
    };
    CliError::Config(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut s = Settings::parse("# instance\np = 0.4\n\nv=3\ncost_family = logarithmic\n").unwrap();
        s.set("v", 5.0);
        let c = RunConfig::from_settings(&s).unwrap();
        assert_eq!(c.params.p(), 0.4);
        assert_eq!(c.params.v(), 5.0);
        assert_eq!(c.params.cost().family(), CostFamily::Logarithmic);
        assert_eq!(c.solver.grid_size, 2048);
    }

    #[test]
    fn unknown_and_repeated_keys_rejected() {
        assert!(matches!(Settings::parse("gridsize = 10"), Err(CliError::Config(m)) if m.contains("gridsize")));
        assert!(Settings::parse("p = 0.1\np = 0.2").is_err());
        assert!(Settings::parse("just text").is_err());
    }

    #[test]
    fn field_level_messages() {
        let mut s = Settings::default();
        s.set("grid_size", 0);
        let err = RunConfig::from_settings(&s).unwrap_err();
        assert!(err.to_string().contains("grid_size"), "{err}");
        let mut s = Settings::default();
        s.set("p", 1.5);
        assert!(RunConfig::from_settings(&s).unwrap_err().to_string().contains('p'));
        let mut s = Settings::default();
        s.set("tol", "abc");
        assert!(RunConfig::from_settings(&s).unwrap_err().to_string().contains("tol"));
    }

    #[test]
    fn formats_deduplicated_and_validated() {
        assert_eq!(parse_formats("svg,csv,csv").unwrap(), vec![Format::Csv, Format::Svg]);
        assert!(parse_formats("png").is_err());
        assert!(parse_formats("").is_err());
    }
}
