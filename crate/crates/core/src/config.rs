//! Run configuration: line-based `key = value` files, `PPDIO_` environment
//! overrides, and the defaults every module falls back to.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const ENV_PREFIX: &str = "PPDIO_";

/// Adaptive working-precision schedule for certified evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Precision {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            start_bits: 128,
            max_bits: 16384,
        }
    }
}

impl Precision {
    /// Doubling schedule `start, 2*start, ...` capped at `max_bits`.
    pub fn schedule(&self, first: u32) -> impl Iterator<Item = u32> {
        let max = self.max_bits;
        let mut next = Some(first.max(self.start_bits).min(max));
        std::iter::from_fn(move || {
            let cur = next?;
            next = (cur < max).then(|| cur.saturating_mul(2).min(max));
            Some(cur)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SieveConfig {
    /// log2 of the number of candidates per segment.
    pub segment_bits: u32,
    /// Largest span `hi - lo` a single call may materialize.
    pub max_span: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_bits: 24,
            max_span: 1 << 32,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub epsilon: f64,
    pub precision: Precision,
    pub sieve: SieveConfig,
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            precision: Precision::default(),
            sieve: SieveConfig::default(),
            seed: 0,
            threads: None,
            format: OutputFormat::Csv,
            output: None,
        }
    }
}

const KEYS: &[&str] = &[
    "epsilon",
    "precision.start_bits",
    "precision.max_bits",
    "sieve.segment_bits",
    "sieve.max_span",
    "seed",
    "threads",
    "format",
    "output",
];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.1) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 0.1), got {}",
                self.epsilon
            )));
        }
        if self.precision.start_bits < 64 {
            return Err(Error::Config("precision.start_bits must be at least 64".into()));
        }
        if self.precision.max_bits < self.precision.start_bits {
            return Err(Error::Config(
                "precision.max_bits must not be below precision.start_bits".into(),
            ));
        }
        if !(8..=34).contains(&self.sieve.segment_bits) {
            return Err(Error::Config("sieve.segment_bits must lie in [8, 34]".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("invalid value `{value}` for `{key}`"));
        match key {
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad())?,
            "precision.start_bits" | "start_bits" => {
                self.precision.start_bits = value.parse().map_err(|_| bad())?
            }
            "precision.max_bits" | "max_bits" => {
                self.precision.max_bits = value.parse().map_err(|_| bad())?
            }
            "sieve.segment_bits" | "segment_bits" => {
                self.sieve.segment_bits = value.parse().map_err(|_| bad())?
            }
            "sieve.max_span" | "max_span" => self.sieve.max_span = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "threads" => self.threads = Some(value.parse().map_err(|_| bad())?),
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad()),
                }
            }
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    /// Applies `PPDIO_EPSILON`, `PPDIO_SIEVE_SEGMENT_BITS`, ... from `vars`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let wanted = rest.to_ascii_lowercase();
            if let Some(key) = KEYS.iter().find(|k| k.replace('.', "_") == wanted) {
                self.set(key, &value)?;
            }
        }
        Ok(())
    }

    /// The configuration in the same `key = value` form the loader accepts.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "precision.start_bits = {}", self.precision.start_bits);
        let _ = writeln!(s, "precision.max_bits = {}", self.precision.max_bits);
        let _ = writeln!(s, "sieve.segment_bits = {}", self.sieve.segment_bits);
        let _ = writeln!(s, "sieve.max_span = {}", self.sieve.max_span);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
