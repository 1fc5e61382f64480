//! Admissible `ε` for the cone comparison `g̃ ⪯ g₀`, and the `ε → 0` rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backgrounds::{flat_f, ConeBackground};
use super::cones::{cone_contained, ConeOptions, ConeVerdict};
use crate::error::{Error, Result};
use crate::geometry::metric::SmoothMetric;
use crate::lorentz::scenario::LorentzSpace;

/// Number of points of the grid `ε = 2^{-k}`, `k = 0..GRID`.
pub const GRID: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBound {
    /// Estimate of `C` in `|A(V)|² ≤ C g(V,V)`: the largest `|A|²_g` seen.
    pub c: f64,
    /// `1/(4C)`, from `1 - 2Cε ≥ ½`.
    pub from_c: f64,
    /// Largest `ε` with `|ε(f - 1)| ≤ |w| + 1` on the sample, `w` the wedge
    /// coordinate (`ξ` or `Σt`).
    pub from_f: f64,
    /// Largest grid value meeting both.
    pub epsilon: Option<f64>,
    pub k: Option<u32>,
    pub samples: usize,
}

/// The wedge coordinate of `g₀`: `|ξ|` for Type 3, `|Σt|` for Type 4.
pub fn wedge(space: &LorentzSpace, p: &[f64]) -> f64 {
    if space.type_tag() == 4 {
        let t: Vec<f64> = space.base().flat_coords().iter().map(|&k| p[k + 2]).collect();
        flat_f(&t)
    } else {
        p[0].abs()
    }
}

/// `|A|²_g = Aᵀ g⁻¹ A` at a point of `N`.
pub fn potential_norm(space: &LorentzSpace, p: &[f64]) -> Result<f64> {
    let g = space.base().components(&p[2..]).re();
    let a = nalgebra::DVector::from_vec(space.a(p));
    let chol = g.cholesky().ok_or_else(|| Error::DegenerateMetric { point: p.to_vec() })?;
    Ok(a.dot(&chol.solve(&a)))
}

/// Estimate `C` and the largest admissible `ε = 2^{-k}` from `samples`
/// points of the chart. A `C` dominated by points close to the edge of the
/// chart is reported as [`Error::Divergent`].
pub fn epsilon_bound(space: &LorentzSpace, samples: usize, seed: u64) -> Result<EpsilonBound> {
    if space.type_tag() < 3 {
        return Err(Error::Spec {
            clause: "epsilon bound applies to Types 3 and 4".into(),
        });
    }
    let chart = space.chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c_all, mut c_inner) = (0.0f64, 0.0f64);
    let mut from_f = f64::INFINITY;
    for _ in 0..samples {
        let p = chart.sample(&mut rng);
        let c = potential_norm(space, &p)?;
        c_all = c_all.max(c);
        let inner = chart.coords().iter().zip(&p).all(|(co, x)| {
            co.period.is_some() || (x - co.lower).min(co.upper - x) >= 0.1 * co.width()
        });
        if inner {
            c_inner = c_inner.max(c);
        }
        from_f = from_f.min(epsilon_from_f([(space.f(&p), wedge(space, &p))]));
    }
    if c_inner > 0.0 && c_all > 10.0 * c_inner {
        return Err(Error::Divergent { margin: chart.margin() });
    }
    let from_c = if c_all > 0.0 { 0.25 / c_all } else { f64::INFINITY };
    let k = grid_epsilon(from_c.min(from_f));
    Ok(EpsilonBound {
        c: c_all,
        from_c,
        from_f,
        epsilon: k.map(|k| 0.5f64.powi(k as i32)),
        k,
        samples,
    })
}

/// Smallest `k < GRID` with `2^{-k} ≤ cap`.
pub fn grid_epsilon(cap: f64) -> Option<u32> {
    (0..GRID).find(|&k| 0.5f64.powi(k as i32) <= cap)
}

/// Largest `ε` with `|ε(f - 1)| ≤ |w| + 1` at the given `(f, w)` pairs.
pub fn epsilon_from_f(values: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    values
        .into_iter()
        .filter(|(f, _)| *f != 1.0)
        .map(|(f, w)| (w.abs() + 1.0) / (f - 1.0).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `ẽ_{n+1} - ẽ_0 = ∂η - (1 + εf)∂ξ`, of `g̃`-norm `-2`. It is also future
/// time-like for `g₀` as long as `εf > -(3 + 2|w|)`.
pub fn time_direction(space: &LorentzSpace, p: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; space.dim()];
    v[0] = -(1.0 + space.epsilon() * space.f(p));
    v[1] = 1.0;
    v
}

/// Sampled check of `g̃ ⪯ g₀` at the scenario's `ε`.
pub fn compare_with_background(space: &LorentzSpace, opts: &ConeOptions, seed: u64) -> Result<ConeVerdict> {
    let bg = ConeBackground::new(space);
    let chart = space.chart().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cone_contained(space, &bg, |r| chart.sample(r), |p| time_direction(space, p), opts, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub epsilons: Vec<f64>,
    /// `max |g̃_ε - g_ε=0|` over the probe points, per `ε`.
    pub deviation: Vec<f64>,
    /// Least-squares slope of `log deviation` against `log ε`.
    pub slope: f64,
}

/// Rate at which `g̃_ε` approaches `2dηdξ + g`.
pub fn epsilon_convergence(space: &LorentzSpace, epsilons: &[f64], probes: usize, seed: u64) -> Convergence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..probes).map(|_| space.chart().sample(&mut rng)).collect();
    let deviation: Vec<f64> = epsilons
        .iter()
        .map(|&e| {
            points
                .iter()
                .map(|p| (space.metric_at_epsilon(p, e).re() - space.background(p).re()).amax())
                .fold(0.0, f64::max)
        })
        .collect();
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = deviation.iter().map(|d| d.ln()).collect();
    Convergence {
        epsilons: epsilons.to_vec(),
        deviation,
        slope: fit_slope(&xs, &ys),
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
