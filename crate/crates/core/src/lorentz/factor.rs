//! Riemannian factors and their product `M`.

use std::f64::consts::TAU;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::functions::{Profile, TrigPoly};
use crate::calabi::{CalabiChart, CalabiSpace, FS_SCALE};
use crate::error::Result;
use crate::geometry::chart::{Chart, Coordinate};
use crate::geometry::frame::FrameField;
use crate::geometry::metric::{Signature, SmoothMetric};
use crate::scalar::{cst, Mat, Real};

/// Configuration of one factor of `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSpec {
    /// Euclidean `ℝ^dim` with coordinates `t1…` in `[-half_width, half_width]`.
    Flat {
        dim: usize,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    /// 2-torus `e^{2u}(dx² + dy²)`; `u` is a seeded trigonometric polynomial
    /// of the given amplitude, `0` for the flat torus.
    Torus {
        #[serde(default)]
        conformal_amplitude: f64,
    },
    /// Calabi space `C_m` with radial profile `g(ρ)` entering `A`.
    Calabi {
        m: usize,
        #[serde(default)]
        profile: Profile,
        #[serde(default = "default_rho")]
        rho: (f64, f64),
        #[serde(default = "default_base")]
        base: f64,
    },
}

fn default_half_width() -> f64 {
    1.5
}
fn default_rho() -> (f64, f64) {
    CalabiChart::default().rho
}
fn default_base() -> f64 {
    CalabiChart::default().base
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Flat { dim: usize, half_width: f64 },
    Torus { u: TrigPoly },
    Calabi { space: CalabiSpace, profile: Profile },
}

/// Role of a block of frame indices of `M`, used to split `so(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockKind {
    Flat,
    Generic,
    /// Kähler block with the frame matrix of its Φ̂.
    Kahler { hat: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub range: Range<usize>,
    pub kind: BlockKind,
}

impl Block {
    pub fn hat_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.kind {
            BlockKind::Kahler { hat } => {
                let k = self.range.len();
                Some(DMatrix::from_row_slice(k, k, hat))
            }
            _ => None,
        }
    }
}

/// Orthogonal splitting `ℝⁿ = ℝ^{n-m} ⊕ ℝ^{n₀} ⊕ ⊕ℝ^{n_i}` of the frame of `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSplit {
    pub n: usize,
    pub blocks: Vec<Block>,
}

impl BlockSplit {
    pub fn kahler(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| matches!(b.kind, BlockKind::Kahler { .. }))
    }

    pub fn flat_indices(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Flat)
            .flat_map(|b| b.range.clone())
            .collect()
    }

    /// A single generic block spanning everything.
    pub fn trivial(n: usize) -> Self {
        BlockSplit {
            n,
            blocks: vec![Block {
                range: 0..n,
                kind: BlockKind::Generic,
            }],
        }
    }
}

impl Factor {
    pub fn from_spec<R: rand::Rng + ?Sized>(spec: &FactorSpec, rng: &mut R) -> Result<Self> {
        Ok(match spec {
            FactorSpec::Flat { dim, half_width } => Factor::Flat {
                dim: *dim,
                half_width: *half_width,
            },
            FactorSpec::Torus { conformal_amplitude } => Factor::Torus {
                u: if *conformal_amplitude == 0.0 {
                    TrigPoly::zero()
                } else {
                    TrigPoly::random(rng, vec![(0, 1.0), (1, 1.0)], 2, 4, *conformal_amplitude)
                },
            },
            FactorSpec::Calabi { m, profile, rho, base } => Factor::Calabi {
                space: CalabiSpace::new(
                    *m,
                    FS_SCALE,
                    CalabiChart {
                        rho: *rho,
                        base: *base,
                        margin: CalabiChart::default().margin,
                    },
                )?,
                profile: profile.clone(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Flat { dim, .. } => *dim,
            Factor::Torus { .. } => 2,
            Factor::Calabi { space, .. } => space.dim(),
        }
    }

    pub fn coords(&self, tag: usize) -> Vec<Coordinate> {
        match self {
            Factor::Flat { dim, half_width } => (0..*dim)
                .map(|k| Coordinate::new(format!("t{}", k + 1), -half_width, *half_width))
                .collect(),
            Factor::Torus { .. } => vec![Coordinate::periodic(format!("x{tag}"), 0.0, TAU), Coordinate::periodic(format!("y{tag}"), 0.0, TAU)],
            Factor::Calabi { space, .. } => space
                .chart()
                .coords()
                .iter()
                .map(|c| Coordinate {
                    name: format!("{}_{tag}", c.name),
                    ..c.clone()
                })
                .collect(),
        }
    }

    pub fn metric<D: Real>(&self, q: &[D]) -> Mat<D> {
        match self {
            Factor::Flat { dim, .. } => Mat::identity(*dim),
            Factor::Torus { u } => {
                let c = (u.eval(q) * 2.0).exp();
                Mat::identity(2).scale(c)
            }
            Factor::Calabi { space, .. } => space.components(q),
        }
    }

    pub fn coframe<D: Real>(&self, q: &[D]) -> Mat<D> {
        match self {
            Factor::Flat { dim, .. } => Mat::identity(*dim),
            Factor::Torus { u } => Mat::identity(2).scale(u.eval(q).exp()),
            Factor::Calabi { space, .. } => FrameField::coframe(space, q),
        }
    }

    /// Contribution `g(ρ) B` of a Calabi factor to `A`.
    pub fn potential<D: Real>(&self, q: &[D]) -> Vec<D> {
        match self {
            Factor::Calabi { space, profile } => {
                let g = profile.g(q[0]);
                space.b_form(q).into_iter().map(|b| b * g).collect()
            }
            _ => vec![cst(0.0); self.dim()],
        }
    }

    pub fn block(&self, offset: usize) -> Block {
        let range = offset..offset + self.dim();
        let kind = match self {
            Factor::Flat { .. } => BlockKind::Flat,
            Factor::Torus { .. } => BlockKind::Generic,
            Factor::Calabi { space, .. } => BlockKind::Kahler {
                hat: space.hat_kahler_frame().transpose().as_slice().to_vec(),
            },
        };
        Block { range, kind }
    }
}

/// The Riemannian product `M`, coordinates of the factors concatenated.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductManifold {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
    chart: Chart,
}

impl ProductManifold {
    pub fn new(factors: Vec<Factor>) -> Self {
        let mut offsets = Vec::with_capacity(factors.len());
        let mut coords = Vec::new();
        let mut off = 0;
        for (i, f) in factors.iter().enumerate() {
            offsets.push(off);
            off += f.dim();
            coords.extend(f.coords(i + 1));
        }
        let margin = factors
            .iter()
            .map(|f| match f {
                Factor::Calabi { space, .. } => space.chart().margin(),
                _ => 1e-2,
            })
            .fold(1e-2, f64::max);
        ProductManifold {
            factors,
            offsets,
            chart: Chart::new(coords).with_margin(margin),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    fn slice<'a, D>(&self, i: usize, q: &'a [D]) -> &'a [D] {
        &q[self.offsets[i]..self.offsets[i] + self.factors[i].dim()]
    }

    fn block_diag<D: Real>(&self, q: &[D], mut f: impl FnMut(&Factor, &[D]) -> Mat<D>) -> Mat<D> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for (i, fac) in self.factors.iter().enumerate() {
            let b = f(fac, self.slice(i, q));
            let o = self.offsets[i];
            for r in 0..fac.dim() {
                for c in 0..fac.dim() {
                    out[(o + r, o + c)] = b[(r, c)];
                }
            }
        }
        out
    }

    /// The 1-form `A = Σ g_i B_i`.
    pub fn potential<D: Real>(&self, q: &[D]) -> Vec<D> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, f) in self.factors.iter().enumerate() {
            out.extend(f.potential(self.slice(i, q)));
        }
        out
    }

    pub fn split(&self) -> BlockSplit {
        BlockSplit {
            n: self.dim(),
            blocks: self.factors.iter().zip(&self.offsets).map(|(f, &o)| f.block(o)).collect(),
        }
    }

    /// `(coordinate index of ρ_i, m_i, profile)` per Calabi factor.
    pub fn calabi_factors(&self) -> Vec<(usize, usize, &Profile)> {
        self.factors
            .iter()
            .zip(&self.offsets)
            .filter_map(|(f, &o)| match f {
                Factor::Calabi { space, profile } => Some((o, space.m(), profile)),
                _ => None,
            })
            .collect()
    }

    /// Coordinate indices of the flat factor(s).
    pub fn flat_coords(&self) -> Vec<usize> {
        self.factors
            .iter()
            .zip(&self.offsets)
            .filter(|(f, _)| matches!(f, Factor::Flat { .. }))
            .flat_map(|(f, &o)| o..o + f.dim())
            .collect()
    }

    /// Coordinates that a "sufficiently general" `h` may depend on, with the
    /// base frequency matching their period.
    pub fn h_vars(&self, skip_flat: bool) -> Vec<(usize, f64)> {
        let mut vars = Vec::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            if skip_flat && self.flat_coords().contains(&i) {
                continue;
            }
            let w = c.period.map(|p| TAU / p).unwrap_or(1.0);
            vars.push((i, w));
        }
        vars
    }
}

impl SmoothMetric for ProductManifold {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::riemannian(self.dim())
    }

    fn components<D: Real>(&self, q: &[D]) -> Mat<D> {
        self.block_diag(q, |f, x| f.metric(x))
    }
}

impl FrameField for ProductManifold {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn gram_target(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    fn coframe<D: Real>(&self, q: &[D]) -> Mat<D> {
        self.block_diag(q, |f, x| f.coframe(x))
    }
}
