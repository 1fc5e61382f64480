//! Light rays of `g₃ = 2dη(dξ - g dη)` on the plane: `η = const` and the
//! solutions of `dξ/dη = g`.

use serde::{Deserialize, Serialize};

use super::epsilon::fit_slope;
use crate::error::{Error, Result};
use crate::geometry::ode::{integrate, OdeOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RayProfile {
    /// `g(η) = Σ c_k η^k`.
    Eta { coeffs: Vec<f64> },
    /// `g(ξ) = c |ξ|^p`.
    Xi { coef: f64, power: f64 },
}

impl RayProfile {
    pub fn slope(&self, xi: f64, eta: f64) -> f64 {
        match self {
            RayProfile::Eta { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * eta + c),
            RayProfile::Xi { coef, power } => coef * xi.abs().powf(*power),
        }
    }

    /// `ξ(η)` in closed form for polynomial `g(η)`.
    pub fn exact(&self, xi0: f64, eta0: f64, eta: f64) -> Option<f64> {
        match self {
            RayProfile::Eta { coeffs } => Some(
                xi0 + coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * (eta.powi(k as i32 + 1) - eta0.powi(k as i32 + 1)) / (k as f64 + 1.0))
                    .sum::<f64>(),
            ),
            RayProfile::Xi { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayFit {
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    /// Log-log slope of `ξ` against `η` over `[η_end/10, η_end]`.
    pub exponent: f64,
    /// Largest relative gap to the closed form, when there is one.
    pub exact_residual: Option<f64>,
    /// `(η, ξ)` on a uniform grid over the window, plus the fit points.
    pub path: Vec<[f64; 2]>,
}

const PATH_POINTS: usize = 200;

/// Integrate the tilted ray from `(ξ₀, η₀)` to `η_end` and fit its growth
/// exponent over the last decade.
pub fn lightray_exponent(profile: &RayProfile, xi0: f64, eta0: f64, eta_end: f64) -> Result<RayFit> {
    if !(eta0 >= 0.0 && eta_end >= 10.0 * eta0.max(1.0)) {
        return Err(Error::Window(format!(
            "need 0 <= eta0 and eta_end >= 10 max(eta0, 1), got [{eta0}, {eta_end}]"
        )));
    }
    let opts = OdeOptions::default().with_rtol(1e-12);
    let eta: Vec<f64> = (0..=50).map(|i| eta_end * 10f64.powf(-1.0 + i as f64 / 50.0)).collect();
    // Checkpoints: the fit abscissae plus a uniform grid for the path.
    let mut grid: Vec<f64> = (0..=PATH_POINTS)
        .map(|i| eta0 + (eta_end - eta0) * i as f64 / PATH_POINTS as f64)
        .chain(eta.iter().copied())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let mut y = xi0;
    let mut path = vec![[grid[0], y]];
    for w in grid.windows(2) {
        let sol = integrate(
            |t, y, dy| {
                dy[0] = profile.slope(y[0], t);
                Ok(())
            },
            w[0],
            w[1],
            &[y],
            &opts,
        )?;
        y = sol.last()[0];
        path.push([w[1], y]);
    }
    let at = |e: f64| {
        let i = path.partition_point(|p| p[0] < e - 1e-12 * e.abs().max(1.0));
        path[i.min(path.len() - 1)][1]
    };
    let xi: Vec<f64> = eta.iter().map(|&e| at(e)).collect();
    if xi.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Window("xi does not grow positive over the fit window".into()));
    }
    let lx: Vec<f64> = eta.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
    let exact_residual = profile.exact(xi0, eta0, eta_end).map(|_| {
        path.iter()
            .map(|&[t, y]| {
                let e = profile.exact(xi0, eta0, t).unwrap();
                (y - e).abs() / e.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    });
    Ok(RayFit {
        path,
        exponent: fit_slope(&lx, &ly),
        eta,
        xi,
        exact_residual,
    })
}
