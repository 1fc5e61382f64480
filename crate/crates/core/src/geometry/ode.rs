//! Dormand–Prince 5(4) with step control and cubic Hermite dense output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h0: None,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self.atol = rtol * 1e-3;
        self
    }
}

/// Accepted steps of an integration.
#[derive(Clone, Debug, Default)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dy: Vec<Vec<f64>>,
    /// Set when a stop predicate ended the run before `t1`.
    pub stopped: bool,
}

impl Solution {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("empty solution")
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("empty solution")
    }

    /// Dense output by cubic Hermite interpolation between accepted steps.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let n = self.t.len();
        let forward = self.t[n - 1] >= self.t[0];
        let key = |x: f64| if forward { x } else { -x };
        let i = match self
            .t
            .binary_search_by(|s| key(*s).partial_cmp(&key(t)).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => return self.y[i].clone(),
            Err(0) => return self.y[0].clone(),
            Err(i) if i >= n => return self.y[n - 1].clone(),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        (0..self.y[i].len())
            .map(|k| {
                h00 * self.y[i][k] + h10 * h * self.dy[i][k] + h01 * self.y[i + 1][k] + h11 * h * self.dy[i + 1][k]
            })
            .collect()
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y0: &[f64], opts: &OdeOptions) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    integrate_until(f, t0, t1, y0, opts, |_, _| false)
}

/// As [`integrate`], but stop after the first accepted step where
/// `stop(t, y)` holds.
pub fn integrate_until<F, S>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = Solution::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; 7];
    f(t, &y, &mut k[0])?;
    sol.t.push(t);
    sol.y.push(y.clone());
    sol.dy.push(k[0].clone());
    if span == 0.0 {
        return Ok(sol);
    }

    let mut h = opts.h0.unwrap_or_else(|| {
        let scale: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let slope: f64 = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if slope > 0.0 {
            (0.01 * scale / slope).min(span / 10.0)
        } else {
            span / 10.0
        }
    });
    h = h.max(opts.h_min).min(span);

    let mut ytmp = vec![0.0; n];
    let mut steps = 0;
    while dir * (t1 - t) > 1e-14 * span.max(1.0) {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration {
                t,
                point: y,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if h > (t1 - t).abs() {
            h = (t1 - t).abs();
        }
        let hs = dir * h;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            f(t + C[s] * hs, &ytmp, &mut k[s])?;
        }
        // ytmp now holds the 5th-order solution (FSAL row)
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            e *= hs;
            let sc = opts.atol + opts.rtol * y[i].abs().max(ytmp[i].abs());
            let r = (e / sc).abs();
            // f64::max would swallow a NaN
            err = if r.is_nan() || !ytmp[i].is_finite() { f64::INFINITY } else { err.max(r) };
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < opts.h_min {
                return Err(Error::Integration {
                    t,
                    point: y,
                    reason: "non-finite derivative".into(),
                });
            }
            continue;
        }
        if err <= 1.0 {
            t += hs;
            y.copy_from_slice(&ytmp);
            let last = k[6].clone();
            k[0] = last;
            sol.t.push(t);
            sol.y.push(y.clone());
            sol.dy.push(k[0].clone());
            if stop(t, &y) {
                sol.stopped = true;
                return Ok(sol);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.h_min {
                return Err(Error::Integration {
                    t,
                    point: y,
                    reason: format!("step size underflow ({h:.2e})"),
                });
            }
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            5.0,
            &[1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(sol.last()[0], (-5.0f64).exp(), max_relative = 1e-8);
        assert_relative_eq!(sol.at(2.5)[0], (-2.5f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            -2.0 * std::f64::consts::PI,
            &[1.0, 0.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((sol.last()[0] - 1.0).abs() < 1e-8);
        assert!(sol.last()[1].abs() < 1e-8);
    }

    #[test]
    fn stop_predicate_ends_run() {
        let sol = integrate_until(
            |_, _, dy| {
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            10.0,
            &[0.0],
            &OdeOptions::default(),
            |_, y| y[0] > 3.0,
        )
        .unwrap();
        assert!(sol.stopped);
        assert!(sol.t_end() < 10.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let err = integrate(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            2.0,
            &[1.0],
            &OdeOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }
}
