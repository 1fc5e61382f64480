//! Sampled comparison of light cones, `g_lo ⪯ g_hi`: every `g_lo`-causal
//! vector is `g_hi`-causal.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::backgrounds::quad;
use crate::error::{Error, Result};
use crate::geometry::metric::MetricField;

fn pair(g: &DMatrix<f64>, v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * v[i] * w[j];
        }
    }
    s
}

/// The future causal vector `(1 + spread) τ̂ + ŵ⊥`, where `τ̂` is `τ` at unit
/// `g`-length and `ŵ⊥` is the `g`-orthogonal part of `w`, also at unit
/// length. `spread = 0` gives a null vector. Needs `g(τ,τ) < 0`.
pub fn causal_vector(g: &DMatrix<f64>, tau: &[f64], w: &[f64], spread: f64) -> Vec<f64> {
    let tt = pair(g, tau, tau);
    let mut perp = w.to_vec();
    // twice, so that a `w` nearly parallel to `τ` still leaves an orthogonal rest
    for _ in 0..2 {
        let c = pair(g, &perp, tau) / tt;
        perp.iter_mut().zip(tau).for_each(|(a, t)| *a -= c * t);
    }
    let pp = pair(g, &perp, &perp);
    let ts = (1.0 + spread) / (-tt).sqrt();
    if !(pp > 1e-24 * w.iter().map(|x| x * x).sum::<f64>()) {
        return tau.iter().map(|t| t * ts).collect();
    }
    let ps = 1.0 / pp.sqrt();
    tau.iter().zip(&perp).map(|(t, q)| t * ts + q * ps).collect()
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s > 1e-3 && s <= 1.0 {
            return v.into_iter().map(|x| x / s).collect();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeOptions {
    pub samples: usize,
    pub strict: bool,
    /// Allowed `g_hi(X,X) / (|X|² ‖g_hi‖)` for non-strict containment.
    pub tol: f64,
    pub max_violations: usize,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            samples: 10_000,
            strict: false,
            tol: 1e-10,
            max_violations: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeViolation {
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub pass: bool,
    pub samples: usize,
    pub null_samples: usize,
    pub violations: Vec<ConeViolation>,
    pub violation_count: usize,
    /// Largest `g_hi(X,X) / (|X|² ‖g_hi‖)` over the samples; negative means
    /// strict containment on the sample.
    pub margin: f64,
    /// Largest `g(τ,τ)/|τ|²` over both metrics; must be negative.
    pub orientation: f64,
}

/// Check `lo ⪯ hi` (or `lo ≺ hi` when `strict`) at points drawn by `points`,
/// with `tau` a future time-like field for both metrics. Half the vectors
/// are `lo`-null, the rest `lo`-time-like.
pub fn cone_contained<L, H, P, T, R>(lo: &L, hi: &H, mut points: P, tau: T, opts: &ConeOptions, rng: &mut R) -> Result<ConeVerdict>
where
    L: MetricField + ?Sized,
    H: MetricField + ?Sized,
    P: FnMut(&mut R) -> Vec<f64>,
    T: Fn(&[f64]) -> Vec<f64>,
    R: Rng + ?Sized,
{
    let mut verdict = ConeVerdict {
        pass: true,
        samples: 0,
        null_samples: 0,
        violations: Vec::new(),
        violation_count: 0,
        margin: f64::NEG_INFINITY,
        orientation: f64::NEG_INFINITY,
    };
    for s in 0..opts.samples {
        let p = points(rng);
        let gl = lo.eval(&p);
        let gh = hi.eval(&p);
        let t = tau(&p);
        let tn: f64 = t.iter().map(|x| x * x).sum();
        let (ol, oh) = (quad(&gl, &t) / tn, quad(&gh, &t) / tn);
        verdict.orientation = verdict.orientation.max(ol).max(oh);
        if ol >= 0.0 {
            return Err(Error::Signature {
                point: p,
                reason: format!("direction field is not time-like for the smaller cone (g(τ,τ)/|τ|² = {ol:.3e})"),
            });
        }
        if oh >= 0.0 {
            // τ itself leaves the larger cone
            verdict.pass = false;
            verdict.violation_count += 1;
            if verdict.violations.len() < opts.max_violations {
                verdict.violations.push(ConeViolation {
                    lo: quad(&gl, &t),
                    hi: quad(&gh, &t),
                    point: p.clone(),
                    vector: t.clone(),
                });
            }
        }
        let null = s % 2 == 0;
        // time-like draws crowd towards the cone as well
        let spread = if null { 0.0 } else { 2.0 * rng.random_range(0.0f64..1.0).powi(3) };
        let w = random_unit(rng, p.len());
        let x = causal_vector(&gl, &t, &w, spread);
        let xn: f64 = x.iter().map(|a| a * a).sum();
        let scale = gh.iter().map(|a| a.abs()).fold(0.0, f64::max) * xn;
        let hv = quad(&gh, &x) / scale;
        verdict.samples += 1;
        verdict.null_samples += null as usize;
        verdict.margin = verdict.margin.max(hv);
        let bad = if opts.strict { hv >= 0.0 } else { hv > opts.tol };
        if bad {
            verdict.pass = false;
            verdict.violation_count += 1;
            if verdict.violations.len() < opts.max_violations {
                verdict.violations.push(ConeViolation {
                    lo: quad(&gl, &x),
                    hi: quad(&gh, &x),
                    point: p,
                    vector: x,
                });
            }
        }
    }
    Ok(verdict)
}
