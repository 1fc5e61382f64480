//! Holonomy from parallel transport around small lassos.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::closure::{lie_closure, Subalgebra};
use crate::error::{Error, Result};
use crate::geometry::chart::Chart;
use crate::geometry::frame::FrameField;
use crate::geometry::metric::MetricField;
use crate::geometry::ode::OdeOptions;
use crate::geometry::transport::{transport_matrix, Polyline};

/// A coordinate square in the `(i, j)` plane at `corner`, joined to the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lasso {
    pub corner: Vec<f64>,
    pub i: usize,
    pub j: usize,
    pub side: f64,
}

impl Lasso {
    pub fn path(&self, base: &[f64]) -> Polyline {
        Polyline::lasso(base, &self.corner, self.i, self.j, self.side)
    }
}

/// One lasso per coordinate plane at `base` itself, plus `extra` planes at
/// random corners within `reach` (in chart-width units) of the base.
pub fn lasso_family<R: Rng + ?Sized>(
    chart: &Chart,
    base: &[f64],
    side: f64,
    extra: usize,
    reach: f64,
    rng: &mut R,
) -> Vec<Lasso> {
    let d = base.len();
    let fits = |c: &[f64], i: usize, j: usize| {
        let mut q = c.to_vec();
        q[i] += side;
        q[j] += side;
        chart.contains(c) && chart.contains(&q)
    };
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut c = base.to_vec();
            for &k in &[i, j] {
                if !fits(&c, i, j) {
                    c[k] -= side;
                }
            }
            if fits(&c, i, j) {
                out.push(Lasso {
                    corner: c,
                    i,
                    j,
                    side,
                });
            }
        }
    }
    let mut tries = 0;
    while out.len() < d * (d - 1) / 2 + extra && tries < 100 * (extra + 1) {
        tries += 1;
        let corner: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(k, &x)| x + reach * chart.coord(k).width().min(10.0) * rng.random_range(-1.0..1.0))
            .collect();
        let i = rng.random_range(0..d);
        let j = (i + rng.random_range(1..d)) % d;
        if fits(&corner, i.min(j), i.max(j)) {
            out.push(Lasso {
                corner,
                i: i.min(j),
                j: i.max(j),
                side,
            });
        }
    }
    out
}

/// Principal logarithm by the series of `log(I + B)`, `|B| < 1/2`.
pub fn matrix_log(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    let b = w - DMatrix::identity(n, n);
    let dist = b.norm();
    if !(dist < 0.5) {
        return Err(Error::LoopTooLarge { distance: dist });
    }
    let mut out = DMatrix::zeros(n, n);
    let mut pow = b.clone();
    for k in 1..200 {
        let term = &pow / k as f64;
        if k % 2 == 1 {
            out += &term;
        } else {
            out -= &term;
        }
        if term.norm() < 1e-17 {
            break;
        }
        pow = &pow * &b;
    }
    Ok(out)
}

/// Transport around `curve` acting on frame components of vectors at its
/// base point: `W = θ(x₀) P E(x₀)`.
pub fn frame_transport<M, F>(metric: &M, frame: &F, curve: &Polyline, opts: &OdeOptions) -> Result<DMatrix<f64>>
where
    M: MetricField + ?Sized,
    F: FrameField + ?Sized,
{
    let base = &curve.vertices()[0];
    let p = transport_matrix(metric, curve, opts)?;
    let theta = frame.coframe(base).re();
    let e = frame.frame(base)?;
    Ok(theta * p * e)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopHolonomy {
    pub base: Vec<f64>,
    pub logs: Vec<DMatrix<f64>>,
    /// `|W - I|` per loop, after shrinking.
    pub distances: Vec<f64>,
    pub shrinks: usize,
    pub algebra: Subalgebra,
}

/// Logarithms of lasso transports (each loop halved until `|W - I| < 1/2`,
/// at most six times) and the Lie algebra they generate.
pub fn loop_holonomy<M, F>(
    metric: &M,
    frame: &F,
    base: &[f64],
    loops: &[Lasso],
    opts: &OdeOptions,
    rel_tol: f64,
) -> Result<LoopHolonomy>
where
    M: MetricField + ?Sized,
    F: FrameField + ?Sized,
{
    let mut logs = Vec::with_capacity(loops.len());
    let mut distances = Vec::with_capacity(loops.len());
    let mut shrinks = 0;
    for l in loops {
        let mut lasso = l.clone();
        let mut attempt = 0;
        loop {
            let w = frame_transport(metric, frame, &lasso.path(base), opts)?;
            let dist = (&w - DMatrix::identity(w.nrows(), w.ncols())).norm();
            if dist < 0.5 {
                logs.push(matrix_log(&w)?);
                distances.push(dist);
                break;
            }
            attempt += 1;
            if attempt > 6 {
                return Err(Error::LoopTooLarge { distance: dist });
            }
            shrinks += 1;
            lasso.side *= 0.5;
        }
    }
    let algebra = lie_closure(&logs, rel_tol)?;
    Ok(LoopHolonomy {
        base: base.to_vec(),
        logs,
        distances,
        shrinks,
        algebra,
    })
}
