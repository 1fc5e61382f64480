//! Causal diamonds `J⁺(p₁) ∩ J⁻(p₂)` of the wedge backgrounds, as explicit
//! coordinate boxes, with a curve-ensemble check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backgrounds::{flat_f, sgn_log, sgn_log_inv, WedgeBackground};
use super::epsilon::fit_slope;
use super::time_fn::{CurveOptions, Steering, CAUSAL_TOL};
use crate::error::{Error, Result};
use crate::geometry::ode::{integrate, OdeOptions};
use crate::geometry::transport::integrate_causal_curve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DiamondBox {
    pub fn contains(&self, p: &[f64], inflate: f64) -> bool {
        self.excess(p, inflate) <= 0.0
    }

    /// How far `p` lies outside the box widened by `inflate` times its
    /// width on each side (`≤ 0` inside).
    pub fn excess(&self, p: &[f64], inflate: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for ((x, lo), hi) in p.iter().zip(&self.lower).zip(&self.upper) {
            let pad = inflate * (hi - lo) + 1e-9 * (1.0 + lo.abs().max(hi.abs()));
            worst = worst.max((lo - pad) - x).max(x - (hi + pad));
        }
        worst
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, h)| h - l).collect()
    }
}

/// `c = η - s(ξ)`, constant along the tilted null rays of the plane metric
/// and non-decreasing along future causal curves.
pub fn ray_label(p: &[f64]) -> f64 {
    p[1] - sgn_log(p[0])
}

/// Is `x` in the causal past of `p₂` for the plane metric?
pub fn in_plane_past(p2: &[f64], x: &[f64]) -> bool {
    x[1] <= p2[1] && ray_label(x) <= ray_label(p2)
}

/// Diamond of `2dη(dξ - (1+|ξ|)dη)`: `η₁ ≤ η ≤ η₂`, `c₁ ≤ η - s(ξ) ≤ c₂`,
/// hence `ξ ∈ [s⁻¹(η₁ - c₂), s⁻¹(η₂ - c₁)]`. `None` when empty.
pub fn plane_diamond(p1: &[f64], p2: &[f64]) -> Option<DiamondBox> {
    let (c1, c2) = (ray_label(p1), ray_label(p2));
    if p2[1] < p1[1] || c2 < c1 {
        return None;
    }
    Some(DiamondBox {
        lower: vec![sgn_log_inv(p1[1] - c2), p1[1]],
        upper: vec![sgn_log_inv(p2[1] - c1), p2[1]],
    })
}

/// Box around the diamond of `2dη(dξ - (1+F)dη) + Σdt²` on `ℝ^{2+k}`.
///
/// With `Δη, Δξ` the coordinate gaps and `S = ∫|dt/dη|² dη`, causality
/// gives `S ≤ 2Δη(1 + F₁ + D) - 2Δξ` and Cauchy–Schwarz gives
/// `D² ≤ kΔη S` for `D = sup |F - F₁|`. `None` when no causal curve can
/// join the points.
pub fn flat_diamond(p1: &[f64], p2: &[f64]) -> Option<DiamondBox> {
    let k = (p1.len() - 2) as f64;
    let de = p2[1] - p1[1];
    let dx = p2[0] - p1[0];
    if de < 0.0 {
        return None;
    }
    let f1 = flat_f(&p1[2..]);
    let rad = k * k * de.powi(4) + 2.0 * k * de * (de * (1.0 + f1) - dx);
    if rad < 0.0 {
        return None;
    }
    let d = k * de * de + rad.sqrt();
    let big_k = 1.0 + f1 + d;
    let s = 2.0 * de * big_k - 2.0 * dx;
    if s < 0.0 {
        return None;
    }
    let reach = (de * s).sqrt();
    let mut lower = vec![p2[0] - de * big_k, p1[1]];
    let mut upper = vec![p1[0] + de * big_k, p2[1]];
    for t in &p1[2..] {
        lower.push(t - reach);
        upper.push(t + reach);
    }
    let bx = DiamondBox { lower, upper };
    bx.contains(p2, 0.0).then_some(bx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub curves: usize,
    pub checked_points: usize,
    /// Largest [`DiamondBox::excess`]; `≤ 0` means no escape.
    pub max_excess: f64,
    pub inflate: f64,
    pub pass: bool,
    /// `(ξ, η)` of the first few curves, up to where they were checked.
    pub sample_paths: Vec<Vec<[f64; 2]>>,
}

/// Curves kept in [`EscapeReport::sample_paths`].
pub const KEPT_PATHS: usize = 12;

fn finish(mut r: EscapeReport) -> EscapeReport {
    r.pass = r.max_excess <= 0.0;
    r
}

/// Random future causal curves of the plane metric from `p₁`, followed
/// while they stay in `J⁻(p₂)`, must remain in the inflated box.
pub fn plane_escape_test(p1: &[f64], p2: &[f64], inflate: f64, opts: &CurveOptions) -> Result<EscapeReport> {
    let bx = plane_diamond(p1, p2).ok_or_else(|| Error::Spec {
        clause: "p2 lies in the causal future of p1".into(),
    })?;
    let half = 4.0 * (bx.lower[0].abs().max(bx.upper[0].abs()) + bx.upper[1].abs().max(bx.lower[1].abs()) + 1.0);
    let g = WedgeBackground::plane(half);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = EscapeReport {
        curves: 0,
        checked_points: 0,
        max_excess: f64::NEG_INFINITY,
        inflate,
        pass: true,
        sample_paths: Vec::new(),
    };
    for c in 0..opts.curves {
        let spread = if c % 2 == 0 { 0.0 } else { rng.random_range(0.0..1.0) };
        let steer = Steering::random(&mut rng, &[0.0, 1.0], spread);
        let curve = integrate_causal_curve(&g, p1, |x| steer.direction(&g, &[0.0, 1.0], x), opts.length, CAUSAL_TOL, &opts.ode)?;
        let mut path = Vec::new();
        for y in curve.curve.points() {
            if !in_plane_past(p2, y) {
                break;
            }
            report.checked_points += 1;
            report.max_excess = report.max_excess.max(bx.excess(y, inflate));
            path.push([y[0], y[1]]);
        }
        if report.sample_paths.len() < KEPT_PATHS {
            report.sample_paths.push(path);
        }
        report.curves += 1;
    }
    Ok(finish(report))
}

/// Random future causal curves of the flat-factor background from `p₁`;
/// every point `q` they reach bounds the diamond of `(p₁, q)`, which must
/// contain the arc from `p₁` to `q`.
pub fn flat_escape_test(k: usize, p1: &[f64], inflate: f64, opts: &CurveOptions) -> Result<EscapeReport> {
    let g = WedgeBackground::flat(k, 1e3);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = EscapeReport {
        curves: 0,
        checked_points: 0,
        max_excess: f64::NEG_INFINITY,
        inflate,
        pass: true,
        sample_paths: Vec::new(),
    };
    let mut tau = vec![0.0; k + 2];
    tau[1] = 1.0;
    for c in 0..opts.curves {
        let spread = if c % 2 == 0 { 0.0 } else { rng.random_range(0.0..1.0) };
        let steer = Steering::random(&mut rng, &tau, spread);
        let curve = integrate_causal_curve(&g, p1, |x| steer.direction(&g, &tau, x), opts.length, CAUSAL_TOL, &opts.ode)?;
        let pts = curve.curve.points();
        let stride = (pts.len() / 6).max(1);
        for end in (stride..pts.len()).step_by(stride) {
            let bx = flat_diamond(p1, &pts[end]).ok_or_else(|| Error::Spec {
                clause: format!("flat diamond empty along a causal curve at {:?}", pts[end]),
            })?;
            for y in &pts[..=end] {
                report.checked_points += 1;
                report.max_excess = report.max_excess.max(bx.excess(y, inflate));
            }
        }
        if report.sample_paths.len() < KEPT_PATHS {
            report.sample_paths.push(pts.iter().map(|y| [y[0], y[1]]).collect());
        }
        report.curves += 1;
    }
    Ok(finish(report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub eta: Vec<f64>,
    pub max_f: Vec<f64>,
    /// Log-log slope of `max F` against `η` over the last decade.
    pub exponent: f64,
    /// Largest `F / ((1 + √k η)² - 1)` seen; at most `1`.
    pub bound_ratio: f64,
}

/// Growth of `F = |Σt|` along causal curves of the flat-factor background
/// that keep `(1+F)η̇ + ξ̇ ≥ 0`, started at `F = 0`. There
/// `|dF/dη| ≤ 2√(k(1+F))`, so `F` grows at most quadratically in `η`.
pub fn flat_growth(k: usize, curves: usize, eta_max: f64, seed: u64) -> Result<GrowthReport> {
    if eta_max < 10.0 {
        return Err(Error::Window(format!("need eta_max >= 10 for a decade fit, got {eta_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..=40).map(|i| eta_max * 10f64.powf(-1.0 + i as f64 / 40.0)).collect();
    let mut max_f = vec![0.0f64; grid.len()];
    let mut bound_ratio = 0.0f64;
    let opts = OdeOptions::default().with_rtol(1e-9);
    for c in 0..curves {
        // The first curve is the extremal one.
        let (alpha, lam, dir) = if c == 0 {
            (1.0, 1.0, vec![1.0 / (k as f64).sqrt(); k])
        } else {
            let d = super::cones::random_unit(&mut rng, k);
            (rng.random_range(0.0..=1.0), rng.random_range(0.5..=1.0f64), d)
        };
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
            let f = flat_f(&y[1..]);
            let u = -alpha * (1.0 + f);
            dy[0] = u;
            let speed = lam * (2.0 * (1.0 + f - u)).sqrt();
            for j in 0..k {
                dy[j + 1] = speed * dir[j];
            }
            Ok(())
        };
        let sol = integrate(rhs, 0.0, eta_max, &vec![0.0; k + 1], &opts)?;
        for (i, &e) in grid.iter().enumerate() {
            let f = flat_f(&sol.at(e)[1..]);
            max_f[i] = max_f[i].max(f);
            let cap = (1.0 + (k as f64).sqrt() * e).powi(2) - 1.0;
            bound_ratio = bound_ratio.max(f / cap);
        }
    }
    let xs: Vec<f64> = grid.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = max_f.iter().map(|f| f.ln()).collect();
    Ok(GrowthReport {
        exponent: fit_slope(&xs, &ys),
        eta: grid,
        max_f,
        bound_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_diamond_examples() {
        let b = plane_diamond(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
        let e2 = 2f64.exp() - 1.0;
        assert!((b.lower[0] + e2).abs() < 1e-12 && (b.upper[0] - e2).abs() < 1e-12);
        assert_eq!((b.lower[1], b.upper[1]), (0.0, 2.0));
        let p = plane_diamond(&[0.4, 1.0], &[0.4, 1.0]).unwrap();
        assert!(p.widths().iter().all(|w| w.abs() < 1e-12));
        assert!(plane_diamond(&[0.0, 0.0], &[0.0, -1.0]).is_none());
    }

    #[test]
    fn flat_diamond_of_a_point() {
        let p = [0.2, 0.1, -0.3];
        let b = flat_diamond(&p, &p).unwrap();
        assert!(b.widths().iter().all(|w| w.abs() < 1e-12));
        // a purely spatial separation is not causal
        assert!(flat_diamond(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).is_none());
    }
}
