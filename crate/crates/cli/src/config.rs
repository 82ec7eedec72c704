//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! family = helicoid
//! params.m = 4
//! params.s = 2
//! params.lambdas = 0.5, 1, -2
//! samples.grid = 6,6,4,4
//! samples.random = 20
//! tol.austere = 1e-8
//! seed = 7
//! out = report.json
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use austere_core::classify::DEFAULT_CLASSIFY_THRESHOLD;
use austere_core::geometry::DEFAULT_MARGIN;
use austere_core::numerics::{DEFAULT_FD_STEP, DEFAULT_RANK_TOL};

use crate::CliError;

/// Family names accepted by `family = ...`.
pub const FAMILIES: [&str; 9] = [
    "helicoid",
    "classical_helicoid",
    "helicoid_cone",
    "helicoid_product",
    "helicoid_flat",
    "complex_cone",
    "complex_cylinder",
    "sphere",
    "flat",
];

/// Random points drawn when the config asks for neither grid nor random
/// samples.
pub const DEFAULT_RANDOM_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(CliError::config(
                "format",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub austere: f64,
    pub ruling: f64,
    pub rank: f64,
    pub classify: f64,
    pub minimal: f64,
    pub lagrangian: f64,
    pub phase: f64,
    pub holomorphy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            austere: 1e-8,
            ruling: 1e-10,
            rank: DEFAULT_RANK_TOL,
            classify: DEFAULT_CLASSIFY_THRESHOLD,
            minimal: 1e-8,
            lagrangian: 1e-6,
            phase: 1e-4,
            holomorphy: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    /// Per-axis grid counts; one entry is broadcast to all axes.
    pub grid: Vec<usize>,
    /// `None` means "100 if there is no grid, else 0".
    pub random: Option<usize>,
    pub margin: f64,
    /// Finite-difference step for slag and holomorphy.
    pub step: f64,
}

impl Default for Samples {
    fn default() -> Self {
        Self {
            grid: Vec::new(),
            random: None,
            margin: DEFAULT_MARGIN,
            step: DEFAULT_FD_STEP,
        }
    }
}

impl Samples {
    pub fn random_count(&self) -> usize {
        self.random.unwrap_or(if self.grid.is_empty() {
            DEFAULT_RANDOM_POINTS
        } else {
            0
        })
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunConfig {
    pub family: String,
    /// Raw `params.*` values keyed without the prefix.
    pub params: BTreeMap<String, String>,
    pub samples: Samples,
    pub tol: Tolerances,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub assert_austere: bool,
    /// Ruling dimension to verify, if any.
    pub check_ruling: Option<usize>,
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::config(key, format!("cannot parse `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = number(key, value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(key, "must be a positive number"));
    }
    Ok(v)
}

fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(
            key,
            format!("expected true or false, got `{value}`"),
        )),
    }
}

/// Comma-separated list, blanks ignored.
pub fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

impl RunConfig {
    /// Parses a config file body; call [`RunConfig::validate`] once all
    /// overrides are applied.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(
                    "config",
                    format!("line {}: expected `key = value`", lineno + 1),
                ));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if let Some(p) = key.strip_prefix("params.") {
            if p.is_empty() {
                return Err(CliError::config(key, "empty parameter name"));
            }
            self.params.insert(p.to_string(), value.to_string());
            return Ok(());
        }
        match key {
            "family" => self.family = value.to_string(),
            "seed" => self.seed = number(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "samples.grid" => {
                let grid: Vec<usize> = parse_list(key, value)?;
                if grid.is_empty() || grid.contains(&0) {
                    return Err(CliError::config(key, "grid counts must be at least 1"));
                }
                self.samples.grid = grid;
            }
            "samples.random" => self.samples.random = Some(number(key, value)?),
            "samples.margin" => {
                let m: f64 = number(key, value)?;
                if !(0.0..0.5).contains(&m) {
                    return Err(CliError::config(key, "margin must lie in [0, 0.5)"));
                }
                self.samples.margin = m;
            }
            "samples.step" => self.samples.step = positive(key, value)?,
            "tol.austere" => self.tol.austere = positive(key, value)?,
            "tol.ruling" => self.tol.ruling = positive(key, value)?,
            "tol.rank" => self.tol.rank = positive(key, value)?,
            "tol.classify" => self.tol.classify = positive(key, value)?,
            "tol.minimal" => self.tol.minimal = positive(key, value)?,
            "tol.lagrangian" => self.tol.lagrangian = positive(key, value)?,
            "tol.phase" => self.tol.phase = positive(key, value)?,
            "tol.holomorphy" => self.tol.holomorphy = positive(key, value)?,
            "assert.austere" => self.assert_austere = boolean(key, value)?,
            "check.ruling" => {
                let k: usize = number(key, value)?;
                if k == 0 {
                    return Err(CliError::config(key, "ruling dimension must be at least 1"));
                }
                self.check_ruling = Some(k);
            }
            _ => return Err(CliError::config(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.family.is_empty() {
            return Err(CliError::config("family", "no family given"));
        }
        if !FAMILIES.contains(&self.family.as_str()) {
            return Err(CliError::config(
                "family",
                format!(
                    "unknown family `{}` (known: {})",
                    self.family,
                    FAMILIES.join(", ")
                ),
            ));
        }
        if self.samples.grid.is_empty() && self.samples.random_count() == 0 {
            return Err(CliError::config(
                "samples",
                "need at least one sample point",
            ));
        }
        Ok(())
    }

    /// `params.<name>` parsed, or `default` when absent.
    pub fn param<T: FromStr>(&self, name: &str, default: T) -> Result<T, CliError> {
        match self.params.get(name) {
            Some(v) => number(&format!("params.{name}"), v),
            None => Ok(default),
        }
    }

    pub fn param_list(&self, name: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.params
            .get(name)
            .map(|v| parse_list(&format!("params.{name}"), v))
            .transpose()
    }

    pub fn param_bool(&self, name: &str) -> Result<bool, CliError> {
        self.params
            .get(name)
            .map_or(Ok(false), |v| boolean(&format!("params.{name}"), v))
    }

    /// `params.domain = lo:hi, lo:hi, ...`
    pub fn param_domain(&self) -> Result<Option<Vec<(f64, f64)>>, CliError> {
        let Some(raw) = self.params.get("domain") else {
            return Ok(None);
        };
        raw.split(',')
            .map(|iv| {
                let (lo, hi) = iv.split_once(':').ok_or_else(|| {
                    CliError::config("params.domain", format!("expected lo:hi, got `{iv}`"))
                })?;
                Ok((number("params.domain", lo)?, number("params.domain", hi)?))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let cfg = RunConfig::parse(
            "family = helicoid  # generalized\nparams.m=4\nparams.lambdas = 1, 2,3\n\nsamples.grid = 3,4\nseed = 9\ntol.austere = 1e-7\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.family, "helicoid");
        assert_eq!(cfg.param("m", 2usize).unwrap(), 4);
        assert_eq!(
            cfg.param_list("lambdas").unwrap(),
            Some(vec![1.0, 2.0, 3.0])
        );
        assert_eq!(cfg.samples.grid, vec![3, 4]);
        assert_eq!(cfg.samples.random_count(), 0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.tol.austere, 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("no equals sign").is_err());
        assert!(RunConfig::parse("tol.austere = -1").is_err());
        assert!(RunConfig::parse("samples.grid = 0,3").is_err());
        let cfg = RunConfig::parse("family = foo").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config { .. })));
        let cfg = RunConfig::parse("family = sphere\nsamples.random = 0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn domain_lists() {
        let mut cfg = RunConfig::default();
        cfg.set("params.domain", "0:1, -2:2.5").unwrap();
        assert_eq!(
            cfg.param_domain().unwrap(),
            Some(vec![(0.0, 1.0), (-2.0, 2.5)])
        );
        cfg.set("params.domain", "0-1").unwrap();
        assert!(cfg.param_domain().is_err());
    }
}
