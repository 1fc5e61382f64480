use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coordinate of a chart: a name, a closed box interval and an optional
/// period (the interval then covers one period).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub period: Option<f64>,
}

impl Coordinate {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Coordinate {
            name: name.into(),
            lower,
            upper,
            period: None,
        }
    }

    pub fn periodic(name: impl Into<String>, lower: f64, period: f64) -> Self {
        Coordinate {
            name: name.into(),
            lower,
            upper: lower + period,
            period: Some(period),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A coordinate box. `margin` is the fraction of every width kept free at
/// both ends when sampling; charts whose lower bound sits on a coordinate
/// singularity (ρ = 1, say) encode the exclusion in `lower` directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    coords: Vec<Coordinate>,
    margin: f64,
}

impl Chart {
    pub fn new(coords: Vec<Coordinate>) -> Self {
        assert!(!coords.is_empty(), "a chart needs at least one coordinate");
        for c in &coords {
            assert!(c.lower < c.upper, "empty interval for `{}`", c.name);
        }
        Chart {
            coords,
            margin: 1e-2,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Coordinate {
        &self.coords[i]
    }

    pub fn names(&self) -> Vec<&str> {
        self.coords.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Product chart, coordinates of `self` first.
    pub fn product(&self, other: &Chart) -> Chart {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        Chart {
            coords,
            margin: self.margin.max(other.margin),
        }
    }

    /// Periodic coordinates accept any value.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.check(p).is_ok()
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::OutsideDomain {
                point: p.to_vec(),
                coordinate: format!("<dimension {} != {}>", p.len(), self.dim()),
            });
        }
        for (x, c) in p.iter().zip(&self.coords) {
            let inside = x.is_finite() && (c.period.is_some() || (*x >= c.lower && *x <= c.upper));
            if !inside {
                return Err(Error::OutsideDomain {
                    point: p.to_vec(),
                    coordinate: c.name.clone(),
                });
            }
        }
        Ok(())
    }

    /// Uniform sample from the box shrunk by the margin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| {
                let pad = if c.period.is_some() { 0.0 } else { self.margin * c.width() };
                rng.random_range(c.lower + pad..=c.upper - pad)
            })
            .collect()
    }

    /// Largest central-difference step that keeps `p ± h e_k` inside the box.
    pub fn fd_step(&self, p: &[f64], k: usize) -> f64 {
        let c = &self.coords[k];
        let h = c.width() * 1e-4;
        if c.period.is_some() {
            return h;
        }
        h.min(p[k] - c.lower).min(c.upper - p[k])
    }
}
