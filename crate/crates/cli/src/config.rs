//! Scenario configuration files (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lorentz_holonomy::causality::TimeFunction;
use lorentz_holonomy::lorentz::LorentzScenario;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemma1,
    Holonomy,
    Cones,
    Timefn,
    Diamond,
    Rays,
    Calabi,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma1,
        Suite::Holonomy,
        Suite::Cones,
        Suite::Timefn,
        Suite::Diamond,
        Suite::Rays,
        Suite::Calabi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Holonomy => "holonomy",
            Suite::Cones => "cones",
            Suite::Timefn => "timefn",
            Suite::Diamond => "diamond",
            Suite::Rays => "rays",
            Suite::Calabi => "calabi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Samples {
    pub lemma1_points: usize,
    pub holonomy_points: usize,
    pub cone_samples: usize,
    pub epsilon_probes: usize,
    pub time_curves: usize,
    pub diamond_curves: usize,
    pub scan_curves: usize,
    pub calabi_points: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            lemma1_points: 100,
            holonomy_points: 20,
            cone_samples: 10_000,
            epsilon_probes: 10_000,
            time_curves: 100,
            diamond_curves: 500,
            scan_curves: 1000,
            calabi_points: 20,
        }
    }
}

impl Samples {
    /// Multiply every count by `factor`, keeping at least one of each.
    pub fn scaled(&self, factor: f64) -> Samples {
        let s = |n: usize| ((n as f64 * factor).round() as usize).max(1);
        Samples {
            lemma1_points: s(self.lemma1_points),
            holonomy_points: s(self.holonomy_points),
            cone_samples: s(self.cone_samples),
            epsilon_probes: s(self.epsilon_probes),
            time_curves: s(self.time_curves),
            diamond_curves: s(self.diamond_curves),
            scan_curves: s(self.scan_curves),
            calabi_points: s(self.calabi_points),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Closed-form vs solved connection and curvature forms.
    pub lemma1: f64,
    /// Relative error of the recovered φ / ψ.
    pub fit: f64,
    /// Ricci norm, `dB - Φ̂` and `∇Φ̂` on the Calabi factor.
    pub calabi: f64,
    /// Non-strict cone containment, relative to `‖g_hi‖ |X|²`.
    pub cone: f64,
    /// Light-ray exponent around `3`.
    pub ray_exponent: f64,
    /// Relative gap of the integrated ray to `η³/3`.
    pub ray_exact: f64,
    /// Slope of `‖g̃_ε - g₀‖` against `ε` around `1`.
    pub slope: f64,
    /// Growth exponent of `F` around `2`.
    pub growth: f64,
    /// Inflation of the diamond boxes.
    pub inflate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lemma1: 1e-6,
            fit: 1e-3,
            calabi: 1e-5,
            cone: 1e-10,
            ray_exponent: 0.05,
            ray_exact: 1e-6,
            slope: 0.05,
            growth: 0.2,
            inflate: 0.05,
        }
    }
}

impl Tolerances {
    /// `--tol` replaces the residual tolerances (structure equations and Calabi).
    pub fn with_residual(mut self, tol: f64) -> Self {
        self.lemma1 = tol;
        self.calabi = tol;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// Master seed; also replaces `scenario.seed`.
    pub seed: u64,
    pub scenario: LorentzScenario,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub time_function: TimeFunction,
    #[serde(default)]
    pub output: Output,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        cfg.scenario.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.suites {
            if !seen.insert(*s) {
                bail!("suite `{}` listed twice", s.name());
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.scenario.seed = seed;
        self
    }
}
