//! Time functions on `(ξ, η, …)`: strictly increasing along future causal
//! curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backgrounds::sgn_log;
use super::cones::causal_vector;
use crate::error::Result;
use crate::geometry::metric::MetricField;
use crate::geometry::ode::OdeOptions;
use crate::geometry::transport::integrate_causal_curve;

/// Allowed `g(V,V)/|V|²` for a steered null direction; the null root loses
/// digits when the steering field is nearly anti-parallel to `τ`.
pub const CAUSAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFunction {
    /// `T = η - ½ sgn(ξ) ln(1 + |ξ|)`.
    #[default]
    SignedLog,
    /// `T = η - ln(|ξ| + 2)`; only increasing on `ξ ≥ 0`.
    ShiftedLog,
}

impl TimeFunction {
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            TimeFunction::SignedLog => p[1] - 0.5 * sgn_log(p[0]),
            TimeFunction::ShiftedLog => p[1] - (p[0].abs() + 2.0).ln(),
        }
    }

    /// `(∂_ξ T, ∂_η T)`.
    pub fn gradient(&self, p: &[f64]) -> [f64; 2] {
        match self {
            TimeFunction::SignedLog => [-0.5 / (1.0 + p[0].abs()), 1.0],
            TimeFunction::ShiftedLog => [-p[0].signum() / (p[0].abs() + 2.0), 1.0],
        }
    }
}

/// Smooth random vector field used to steer causal curves: `±e_k` plus a
/// small trigonometric wobble, with `k` an axis on which `τ` vanishes, so
/// the field never lines up with `τ` and the chosen null branch is stable.
#[derive(Clone, Debug)]
pub struct Steering {
    axis: usize,
    sign: f64,
    freq: Vec<Vec<f64>>,
    phase: Vec<f64>,
    /// `0` keeps the curve on the light cone.
    pub spread: f64,
}

impl Steering {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, tau0: &[f64], spread: f64) -> Self {
        let dim = tau0.len();
        let axes: Vec<usize> = (0..dim).filter(|&k| tau0[k] == 0.0).collect();
        let axis = if axes.is_empty() { rng.random_range(0..dim) } else { axes[rng.random_range(0..axes.len())] };
        Steering {
            axis,
            sign: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            freq: (0..dim).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
            phase: (0..dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
            spread,
        }
    }

    pub fn field(&self, p: &[f64]) -> Vec<f64> {
        let amp = 0.5 / (p.len() as f64).sqrt();
        let mut w: Vec<f64> = self
            .freq
            .iter()
            .zip(&self.phase)
            .map(|(k, ph)| amp * (k.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + ph).sin())
            .collect();
        w[self.axis] += self.sign;
        w
    }

    /// The future causal vector steered by this field at `p`, unit length.
    pub fn direction<M: MetricField + ?Sized>(&self, metric: &M, tau: &[f64], p: &[f64]) -> Vec<f64> {
        let v = causal_vector(&metric.eval(p), tau, &self.field(p), self.spread);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub curves: usize,
    pub length: f64,
    pub seed: u64,
    pub ode: OdeOptions,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            curves: 100,
            length: 4.0,
            seed: 7,
            ode: OdeOptions::default().with_rtol(1e-8),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeFunctionReport {
    pub function: TimeFunction,
    pub curves: usize,
    pub evaluations: usize,
    /// Smallest `dT/ds` for unit-speed curves.
    pub min_rate: f64,
    pub worst_point: Vec<f64>,
    pub worst_velocity: Vec<f64>,
    /// Points of the first curve on which `dT/ds ≤ 0` was seen.
    pub counterexample: Option<Vec<Vec<f64>>>,
    pub pass: bool,
}

/// Integrate random future causal curves from points drawn by `start` and
/// track `dT/ds` along them. Half the curves are null.
pub fn verify_time_function<M, T, P>(metric: &M, tf: TimeFunction, tau: T, mut start: P, opts: &CurveOptions) -> Result<TimeFunctionReport>
where
    M: MetricField + ?Sized,
    T: Fn(&[f64]) -> Vec<f64>,
    P: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = TimeFunctionReport {
        function: tf,
        curves: 0,
        evaluations: 0,
        min_rate: f64::INFINITY,
        worst_point: Vec::new(),
        worst_velocity: Vec::new(),
        counterexample: None,
        pass: true,
    };
    for c in 0..opts.curves {
        let spread = if c % 2 == 0 { 0.0 } else { rng.random_range(0.0..1.0) };
        let p0 = start(&mut rng);
        let steer = Steering::random(&mut rng, &tau(&p0), spread);
        let curve = integrate_causal_curve(metric, &p0, |x| steer.direction(metric, &tau(x), x), opts.length, CAUSAL_TOL, &opts.ode)?;
        let sol = curve.curve.solution();
        for (y, dy) in sol.y.iter().zip(&sol.dy) {
            let g = tf.gradient(y);
            let rate = g[0] * dy[0] + g[1] * dy[1];
            report.evaluations += 1;
            if rate < report.min_rate {
                report.min_rate = rate;
                report.worst_point = y.clone();
                report.worst_velocity = dy.clone();
            }
            if rate <= 0.0 && report.counterexample.is_none() {
                report.counterexample = Some(sol.y.clone());
            }
        }
        report.curves += 1;
    }
    report.pass = report.min_rate > 0.0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_finite_differences() {
        for tf in [TimeFunction::SignedLog, TimeFunction::ShiftedLog] {
            for p in [[-2.0, 0.3], [0.7, -1.0]] {
                let h = 1e-6;
                let d = (tf.eval(&[p[0] + h, p[1]]) - tf.eval(&[p[0] - h, p[1]])) / (2.0 * h);
                assert!((d - tf.gradient(&p)[0]).abs() < 1e-8);
            }
        }
    }
}
