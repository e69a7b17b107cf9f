//! Run configuration files.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Parameters shared by all subcommands. Every field may also be given on
/// the command line, which takes precedence.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub expr: Option<String>,
    pub points: Option<Vec<Vec<f64>>>,
    pub radius: Option<f64>,
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_samples", deserialize_with = "count")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub perturb: Option<f64>,
    pub k: Option<usize>,
    pub method: Option<String>,
    pub trials: Option<usize>,
    pub step: Option<f64>,
    pub attempts: Option<usize>,
}

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Accepts integral JSON numbers written either as integers or as floats
/// such as `1e6`.
fn count<'de, D: Deserializer<'de>>(deserializer: D) -> Result<u64, D::Error> {
    let x = f64::deserialize(deserializer)?;
    parse_count_value(x).map_err(serde::de::Error::custom)
}

fn parse_count_value(x: f64) -> Result<u64, String> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("expected a non-negative integer, got {x}"))
    }
}

/// Parses sample counts such as `100000` or `1e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(v) => Ok(v),
        Err(_) => {
            let x: f64 = s.parse().map_err(|_| format!("invalid count {s:?}"))?;
            parse_count_value(x)
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: None,
            d: None,
            expr: None,
            points: None,
            radius: None,
            radii: None,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            perturb: None,
            k: None,
            method: None,
            trials: None,
            step: None,
            attempts: None,
        }
    }
}

/// A configuration problem located by a JSON pointer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|segment| match segment {
            Segment::Seq { index } => Some(index.to_string()),
            Segment::Map { key } => Some(key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => Some(variant.clone()),
            Segment::Unknown => None,
        })
        .fold(String::new(), |acc, s| acc + "/" + &s)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| ConfigError::new(pointer(e.path()), e.inner().to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(n) = self.n {
            if !(1..=16).contains(&n) {
                return Err(ConfigError::new("/n", format!("n = {n} is outside 1..=16")));
            }
        }
        if let Some(d) = self.d {
            if !(1..=8).contains(&d) {
                return Err(ConfigError::new("/d", format!("d = {d} is outside 1..=8")));
            }
        }
        if let Some(points) = &self.points {
            if points.is_empty() || points.len() > 16 {
                return Err(ConfigError::new(
                    "/points",
                    format!("expected 1 to 16 points, got {}", points.len()),
                ));
            }
            let d = self.d.unwrap_or(points[0].len());
            for (i, row) in points.iter().enumerate() {
                if row.len() != d {
                    return Err(ConfigError::new(
                        format!("/points/{i}"),
                        format!("point row {i} has {} coordinates, expected {d}", row.len()),
                    ));
                }
            }
            if let Some(n) = self.n {
                if n != points.len() {
                    return Err(ConfigError::new(
                        "/points",
                        format!("n = {n} but {} points are given", points.len()),
                    ));
                }
            }
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::new("/radius", "radius must be positive"));
            }
        }
        if let Some(radii) = &self.radii {
            if radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ConfigError::new(
                    "/radii",
                    "radii must be strictly increasing",
                ));
            }
            if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                return Err(ConfigError::new("/radii", "radii must be positive"));
            }
        }
        if self.samples == 0 {
            return Err(ConfigError::new("/samples", "samples must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(ConfigError::new(
                "/tolerance",
                "tolerance must be non-negative",
            ));
        }
        if let Some(eta) = self.perturb {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(ConfigError::new(
                    "/perturb",
                    "perturbation must be positive",
                ));
            }
        }
        if let Some(step) = self.step {
            if !(step.is_finite() && step > 0.0) {
                return Err(ConfigError::new("/step", "step must be positive"));
            }
        }
        Ok(())
    }
}
