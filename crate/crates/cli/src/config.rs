//! Flat key=value configuration with command-line override.
//!
//! Keys match the long option names of the active subcommand
//! (`depth=6`, `dipole=pi`). Resolution order: command-line flag,
//! then config file, then environment (output directory only), then
//! the built-in default.

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::str::FromStr;

/// Malformed invocation input (bad config syntax or values); the
/// process exits with the usage status for these.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Default)]
pub struct Overlay {
    values: HashMap<String, String>,
}

impl Overlay {
    /// Read the file named by `--config`, if any.
    pub fn load(matches: &ArgMatches) -> Result<Self> {
        let Some(path) = matches.get_one::<String>("config") else {
            return Ok(Self::default());
        };
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read config file {path}"))?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                anyhow::bail!(UsageError(format!(
                    "{path}:{}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn config_parsed<T: FromStr>(&self, id: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(id) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                UsageError(format!("config key {id}: cannot parse {raw:?}: {e}")).into()
            }),
        }
    }

    fn cli_wins(matches: &ArgMatches, id: &str) -> bool {
        matches.value_source(id) == Some(ValueSource::CommandLine)
    }

    /// Required numeric argument (has a built-in default).
    pub fn f64(&self, matches: &ArgMatches, id: &str) -> Result<f64> {
        Ok(self
            .opt_f64(matches, id)?
            .expect("argument has a default value"))
    }

    pub fn opt_f64(&self, matches: &ArgMatches, id: &str) -> Result<Option<f64>> {
        if Self::cli_wins(matches, id) {
            return Ok(matches.get_one::<f64>(id).copied());
        }
        if let Some(v) = self.config_parsed::<f64>(id)? {
            return Ok(Some(v));
        }
        Ok(matches.get_one::<f64>(id).copied())
    }

    pub fn usize(&self, matches: &ArgMatches, id: &str) -> Result<usize> {
        if Self::cli_wins(matches, id) {
            return Ok(*matches.get_one::<usize>(id).expect("typed by clap"));
        }
        if let Some(v) = self.config_parsed::<usize>(id)? {
            return Ok(v);
        }
        Ok(*matches
            .get_one::<usize>(id)
            .expect("argument has a default value"))
    }

    /// Required string argument (has a built-in default).
    pub fn string(&self, matches: &ArgMatches, id: &str) -> String {
        self.opt_string(matches, id)
            .expect("argument has a default value")
    }

    pub fn opt_string(&self, matches: &ArgMatches, id: &str) -> Option<String> {
        if Self::cli_wins(matches, id) {
            return matches.get_one::<String>(id).cloned();
        }
        if let Some(v) = self.values.get(id) {
            return Some(v.clone());
        }
        matches.get_one::<String>(id).cloned()
    }

    /// Output directory: flag, then FOURPI_OUTDIR, then config.
    pub fn outdir(&self, matches: &ArgMatches) -> Option<String> {
        if Self::cli_wins(matches, "outdir") {
            return matches.get_one::<String>("outdir").cloned();
        }
        if let Ok(dir) = std::env::var("FOURPI_OUTDIR") {
            if !dir.is_empty() {
                return Some(dir);
            }
        }
        self.values.get("outdir").cloned()
    }
}
