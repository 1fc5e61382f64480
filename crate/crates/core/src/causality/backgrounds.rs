//! Comparison metrics for the causal analysis. `|·|` is the exact piecewise
//! absolute value: none of these feed a curvature computation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::chart::{Chart, Coordinate};
use crate::geometry::metric::{Signature, SmoothMetric};
use crate::lorentz::scenario::LorentzSpace;
use crate::scalar::{cst, Mat, Real};

/// `|x|` with the derivative of `x · sgn(x)`; exact away from `0`.
pub fn pabs<D: Real>(x: D) -> D {
    if x.re() < 0.0 {
        -x
    } else {
        x
    }
}

/// `s(x) = sgn(x) ln(1 + |x|)`.
pub fn sgn_log(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

/// Inverse of [`sgn_log`].
pub fn sgn_log_inv(y: f64) -> f64 {
    y.signum() * y.abs().exp_m1()
}

/// `F = |Σ t_k|` for the coordinates `t` of a point.
pub fn flat_f(t: &[f64]) -> f64 {
    t.iter().sum::<f64>().abs()
}

fn plane_chart(half: f64, k: usize, t_half: f64) -> Chart {
    let mut c = vec![Coordinate::new("xi", -half, half), Coordinate::new("eta", -half, half)];
    c.extend((0..k).map(|i| Coordinate::new(format!("t{}", i + 1), -t_half, t_half)));
    Chart::new(c)
}

/// `g₁ = 2dη(dξ - (1+F)dη) + Σ dt_k²` on `ℝ^{2+k}`, `F = |Σt|`; for `k = 0`
/// read `F = |ξ|`, the plane metric of the time-function argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeBackground {
    pub k: usize,
    chart: Chart,
}

impl WedgeBackground {
    pub fn plane(half: f64) -> Self {
        WedgeBackground {
            k: 0,
            chart: plane_chart(half, 0, 1.0),
        }
    }

    pub fn flat(k: usize, half: f64) -> Self {
        assert!(k > 0);
        WedgeBackground {
            k,
            chart: plane_chart(half, k, half),
        }
    }

    pub fn f<D: Real>(&self, p: &[D]) -> D {
        if self.k == 0 {
            pabs(p[0])
        } else {
            let mut s = cst::<D>(0.0);
            for &t in &p[2..] {
                s += t;
            }
            pabs(s)
        }
    }

    pub fn norm(&self, p: &[f64], v: &[f64]) -> f64 {
        let f = self.f(p);
        2.0 * v[1] * (v[0] - (1.0 + f) * v[1]) + v[2..].iter().map(|t| t * t).sum::<f64>()
    }
}

impl SmoothMetric for WedgeBackground {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::lorentzian(self.k + 2)
    }

    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        let d = self.k + 2;
        let mut g = Mat::identity(d);
        g[(0, 0)] = cst(0.0);
        g[(0, 1)] = D::one();
        g[(1, 0)] = D::one();
        g[(1, 1)] = (self.f(p) + 1.0) * -2.0;
        g
    }
}

/// `δ = 1/(4(1+F))`: then `0 < δ < 1` and `2(1+F)δ = ½`.
pub fn tilt_delta(f: f64) -> f64 {
    0.25 / (1.0 + f)
}

/// `g₂ = 2(dη - δdξ)(dξ - (1+F+(1+F)²δ)dη) + (1-δ)Σdt²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedBackground {
    pub k: usize,
    chart: Chart,
}

impl TiltedBackground {
    pub fn new(k: usize, half: f64) -> Self {
        TiltedBackground {
            k,
            chart: plane_chart(half, k, half),
        }
    }

    pub fn f<D: Real>(&self, p: &[D]) -> D {
        let mut s = cst::<D>(0.0);
        for &t in &p[2..] {
            s += t;
        }
        pabs(s)
    }

    fn delta<D: Real>(&self, f: D) -> D {
        (f + 1.0).recip() * 0.25
    }
}

impl SmoothMetric for TiltedBackground {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::lorentzian(self.k + 2)
    }

    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        let d = self.k + 2;
        let f = self.f(p);
        let delta = self.delta(f);
        let big = f + 1.0 + (f + 1.0) * (f + 1.0) * delta;
        let mut g = Mat::identity(d).scale(D::one() - delta);
        g[(0, 0)] = delta * -2.0;
        g[(1, 1)] = big * -2.0;
        g[(0, 1)] = D::one() + delta * big;
        g[(1, 0)] = g[(0, 1)];
        g
    }
}

/// `g₀` on `N`: `2dη(dξ - (1+|ξ|)dη) + ½g` for Type 3, and
/// `2dη(dξ - (1+|Σt|)dη) + Σdt² + ½g'` for Type 4.
#[derive(Clone, Debug)]
pub struct ConeBackground<'a> {
    space: &'a LorentzSpace,
    flat: Vec<usize>,
}

impl<'a> ConeBackground<'a> {
    pub fn new(space: &'a LorentzSpace) -> Self {
        let flat = if space.type_tag() == 4 {
            space.base().flat_coords().iter().map(|k| k + 2).collect()
        } else {
            Vec::new()
        };
        ConeBackground { space, flat }
    }

    pub fn wedge<D: Real>(&self, p: &[D]) -> D {
        if self.flat.is_empty() {
            pabs(p[0])
        } else {
            let mut s = cst::<D>(0.0);
            for &k in &self.flat {
                s += p[k];
            }
            pabs(s)
        }
    }
}

impl SmoothMetric for ConeBackground<'_> {
    fn chart(&self) -> &Chart {
        self.space.chart()
    }

    fn signature(&self) -> Signature {
        Signature::lorentzian(self.space.dim())
    }

    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        let d = self.space.dim();
        let gm = self.space.base().components(&p[2..]);
        let mut g = Mat::zeros(d, d);
        g[(0, 1)] = D::one();
        g[(1, 0)] = D::one();
        g[(1, 1)] = (self.wedge(p) + 1.0) * -2.0;
        for a in 0..d - 2 {
            for b in 0..d - 2 {
                let w = if self.flat.contains(&(a + 2)) && self.flat.contains(&(b + 2)) {
                    1.0
                } else {
                    0.5
                };
                g[(a + 2, b + 2)] = gm[(a, b)] * w;
            }
        }
        g
    }
}

/// A constant bilinear form on a box.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantMetric {
    g: DMatrix<f64>,
    chart: Chart,
}

impl ConstantMetric {
    pub fn new(g: DMatrix<f64>, half: f64) -> Self {
        let chart = Chart::new((0..g.nrows()).map(|i| Coordinate::new(format!("x{i}"), -half, half)).collect());
        ConstantMetric { g, chart }
    }
}

impl SmoothMetric for ConstantMetric {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::of(&self.g, 1e-12).unwrap_or(Signature::lorentzian(self.g.nrows()))
    }

    fn components<D: Real>(&self, _: &[D]) -> Mat<D> {
        Mat::from_f64(&self.g)
    }
}

/// Plain evaluation of any [`SmoothMetric`] at an `f64` point.
pub fn eval<M: SmoothMetric>(m: &M, p: &[f64]) -> DMatrix<f64> {
    m.components(p).re()
}

pub fn quad(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * v[i] * v[j];
        }
    }
    s
}
