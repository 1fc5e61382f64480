//! The report document and its on-disk form.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Tool {
        Tool {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    /// `value < tolerance`
    Below,
    /// `value ≤ tolerance`
    AtMost,
    /// `value > tolerance`
    Above,
    /// `|value - target| ≤ tolerance`
    Near { target: f64 },
    /// `value == tolerance`
    Equal,
}

/// One number with its acceptance rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub compare: Compare,
    pub tolerance: f64,
    pub samples: usize,
}

/// Non-finite numbers are clamped so that the JSON stays lossless.
fn finite(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, compare: Compare, tolerance: f64, samples: usize) -> Check {
        let pass = match compare {
            Compare::Below => value < tolerance,
            Compare::AtMost => value <= tolerance,
            Compare::Above => value > tolerance,
            Compare::Near { target } => (value - target).abs() <= tolerance,
            Compare::Equal => value == tolerance,
        };
        Check {
            name: name.into(),
            pass,
            value: finite(value),
            compare,
            tolerance: finite(tolerance),
            samples,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, samples: usize) -> Check {
        Check::new(name, ok as u8 as f64, Compare::Equal, 1.0, samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Set when the suite could not run to completion.
    pub error: Option<String>,
    /// Free-form numbers worth keeping (fitted values, seeds used).
    pub notes: BTreeMap<String, f64>,
}

impl Verdict {
    pub fn new(suite: &str) -> Verdict {
        Verdict {
            suite: suite.to_string(),
            pass: true,
            checks: Vec::new(),
            error: None,
            notes: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.notes.insert(key.to_string(), finite(value));
    }

    pub fn failed(suite: &str, error: String) -> Verdict {
        Verdict {
            pass: false,
            error: Some(error),
            ..Verdict::new(suite)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub type_tag: u8,
    pub epsilon: f64,
    pub n: usize,
    pub dim: usize,
    pub coordinates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomySummary {
    pub hol_dim: usize,
    pub expected_dim: usize,
    pub span_dim: usize,
    pub type_tag: Option<u8>,
    pub dim_h: Option<usize>,
    pub phi: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
    pub seed_used: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub label: String,
    pub x: [f64; 2],
    pub y: [f64; 2],
}

/// Data for one figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_scale: bool,
    pub series: Vec<Series>,
    pub boxes: Vec<Rect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub seed: u64,
    pub scenario: Option<ScenarioSummary>,
    pub suites: Vec<Verdict>,
    pub holonomy: Option<HolonomySummary>,
    pub curves: Vec<CurveSet>,
    pub pass: bool,
    /// Wall-clock seconds per suite; the only field that varies between
    /// identical runs.
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Report::from_json(&text)
    }

    /// The report with timing removed, for comparisons between runs.
    pub fn without_timing(&self) -> Report {
        Report {
            timing: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn suite(&self, name: &str) -> Option<&Verdict> {
        self.suites.iter().find(|v| v.suite == name)
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
