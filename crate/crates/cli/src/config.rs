//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! ```text
//! # comments start with '#'
//! model.family = exponential
//! model.theta = 0.5
//! experiment.n_grid = 50, 100, 200, 400
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const KNOWN_KEYS: &[&str] = &[
    "model.family",
    "model.sampler",
    "model.theta",
    "model.precision",
    "model.prior_mean",
    "model.prior_precision",
    "model.sampler_mean",
    "model.sampler_sd",
    "model.sampler_rate",
    "model.sampler_mu",
    "model.sampler_sigma",
    "model.i_theta",
    "class.kind",
    "class.k1",
    "class.k2",
    "class.bracket_lo",
    "class.bracket_hi",
    "class.eta",
    "experiment.n_grid",
    "experiment.replications",
    "experiment.seed",
    "experiment.measure",
    "experiment.band",
    "experiment.limit",
    "experiment.predicted",
    "experiment.test_function",
    "output.dir",
    "output.prefix",
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {line}: expected `key = value`, got `{content}`"
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::config(format!(
                    "line {line}: unknown key `{key}`"
                )));
            }
            if value.is_empty() {
                return Err(CliError::config(format!(
                    "line {line}: key `{key}` has no value"
                )));
            }
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            ) {
                return Err(CliError::config(format!(
                    "line {line}: key `{key}` already set on line {}",
                    prev.line
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fails listing every key in `keys` that is absent.
    pub fn require(&self, keys: &[&str]) -> CliResult<()> {
        let missing: Vec<&str> = keys
            .iter()
            .copied()
            .filter(|k| !self.entries.contains_key(*k))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(format!(
                "missing required key(s): {}",
                missing.join(", ")
            )))
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                CliError::config(format!(
                    "line {}: `{key}` must be {what}, got `{}`",
                    e.line, e.value
                ))
            }),
        }
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.parsed(key, "a number")
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.parsed(key, "a 64-bit unsigned integer")
    }

    /// Comma-separated list of nonnegative integers.
    pub fn usize_list(&self, key: &str) -> CliResult<Option<Vec<usize>>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| {
                CliError::config(format!(
                    "line {}: `{key}` must be a comma-separated list of integers",
                    e.line
                ))
            })
    }

    pub fn f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| {
                CliError::config(format!(
                    "line {}: `{key}` must be a comma-separated list of numbers",
                    e.line
                ))
            })
    }

    /// Line on which `key` was set, for error messages.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }
}
