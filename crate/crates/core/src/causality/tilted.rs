//! The tilted comparison metric `g₂` with `g₁ ≺ g₂`, and the monotone
//! quantity `η̇ - δξ̇` along its causal curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backgrounds::{tilt_delta, TiltedBackground, WedgeBackground};
use super::cones::{cone_contained, ConeOptions, ConeVerdict};
use super::time_fn::{CurveOptions, Steering, CAUSAL_TOL};
use crate::error::Result;
use crate::geometry::transport::integrate_causal_curve;

fn eta_field(k: usize) -> impl Fn(&[f64]) -> Vec<f64> {
    move |_| {
        let mut v = vec![0.0; k + 2];
        v[1] = 1.0;
        v
    }
}

/// Sampled strict check `g₁ ≺ g₂` on `[-half, half]^{2+k}`.
pub fn tilted_comparison(k: usize, half: f64, samples: usize, seed: u64) -> Result<ConeVerdict> {
    let g1 = WedgeBackground::flat(k, half);
    let g2 = TiltedBackground::new(k, half);
    let opts = ConeOptions {
        samples,
        strict: true,
        ..ConeOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = crate::geometry::metric::MetricField::chart(&g1).clone();
    cone_contained(&g1, &g2, |r| chart.sample(r), eta_field(k), &opts, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneScan {
    pub curves: usize,
    /// Smallest `(η̇ - δξ̇)/|γ̇|` seen.
    pub min_rate: f64,
    /// Smallest distance back to the start after the first quarter of
    /// each curve.
    pub min_return: f64,
    pub pass: bool,
}

/// Random future causal curves of `g₂` never decrease `η - δξ`-wise and
/// do not come back to their start.
pub fn monotone_scan(k: usize, opts: &CurveOptions) -> Result<MonotoneScan> {
    let g2 = TiltedBackground::new(k, 1e3);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tau = eta_field(k);
    let mut scan = MonotoneScan {
        curves: 0,
        min_rate: f64::INFINITY,
        min_return: f64::INFINITY,
        pass: true,
    };
    for c in 0..opts.curves {
        let spread = if c % 2 == 0 { 0.0 } else { rng.random_range(0.0..1.0) };
        let p0: Vec<f64> = (0..k + 2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let steer = Steering::random(&mut rng, &tau(&p0), spread);
        let curve = integrate_causal_curve(&g2, &p0, |x| steer.direction(&g2, &tau(x), x), opts.length, CAUSAL_TOL, &opts.ode)?;
        let sol = curve.curve.solution();
        for (i, (y, dy)) in sol.y.iter().zip(&sol.dy).enumerate() {
            let delta = tilt_delta(g2.f(y));
            scan.min_rate = scan.min_rate.min(dy[1] - delta * dy[0]);
            if sol.t[i] >= 0.25 * opts.length {
                let d = y.iter().zip(&p0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                scan.min_return = scan.min_return.min(d);
            }
        }
        scan.curves += 1;
    }
    scan.pass = scan.min_rate >= -1e-9 && scan.min_return > 0.0;
    Ok(scan)
}
