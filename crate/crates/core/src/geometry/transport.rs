use nalgebra::DMatrix;

use super::metric::{christoffel, MetricField};
use super::ode::{integrate, integrate_until, OdeOptions, Solution};
use crate::error::{Error, Result};

/// A piecewise-smooth curve on `s ∈ [0, 1]`.
pub trait CurvePath {
    fn point(&self, s: f64) -> Vec<f64>;
    fn velocity(&self, s: f64) -> Vec<f64>;

    /// Parameter values bounding the smooth pieces, `0` and `1` included.
    fn breaks(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

/// Straight segments through the given vertices, equal parameter length each.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Vec<f64>>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        assert!(vertices.len() >= 2, "a polyline needs two vertices");
        Polyline { vertices }
    }

    /// Closed coordinate rectangle based at `base`: out to `corner`, around
    /// the square spanned by `side·e_i`, `side·e_j`, and back.
    pub fn lasso(base: &[f64], corner: &[f64], i: usize, j: usize, side: f64) -> Self {
        let mut a = corner.to_vec();
        a[i] += side;
        let mut b = a.clone();
        b[j] += side;
        let mut c = corner.to_vec();
        c[j] += side;
        let mut v = vec![base.to_vec()];
        if base != corner {
            v.push(corner.to_vec());
        }
        v.extend([a, b, c, corner.to_vec()]);
        if base != corner {
            v.push(base.to_vec());
        }
        Polyline::new(v)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let m = self.vertices.len() - 1;
        let x = s.clamp(0.0, 1.0) * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        (k, x - k as f64)
    }
}

impl CurvePath for Polyline {
    fn point(&self, s: f64) -> Vec<f64> {
        let (k, u) = self.locate(s);
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        a.iter().zip(b).map(|(x, y)| x + u * (y - x)).collect()
    }

    fn velocity(&self, s: f64) -> Vec<f64> {
        let (k, _) = self.locate(s);
        let m = (self.vertices.len() - 1) as f64;
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        a.iter().zip(b).map(|(x, y)| m * (y - x)).collect()
    }

    fn breaks(&self) -> Vec<f64> {
        let m = self.vertices.len() - 1;
        (0..=m).map(|k| k as f64 / m as f64).collect()
    }
}

/// A curve in the coordinate plane of `i`, `j`: circle of radius `r` about
/// `center`, starting at `center + r e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateCircle {
    pub center: Vec<f64>,
    pub i: usize,
    pub j: usize,
    pub radius: f64,
}

impl CurvePath for CoordinateCircle {
    fn point(&self, s: f64) -> Vec<f64> {
        let a = 2.0 * std::f64::consts::PI * s;
        let mut p = self.center.clone();
        p[self.i] += self.radius * a.cos();
        p[self.j] += self.radius * a.sin();
        p
    }

    fn velocity(&self, s: f64) -> Vec<f64> {
        let a = 2.0 * std::f64::consts::PI * s;
        let w = 2.0 * std::f64::consts::PI * self.radius;
        let mut v = vec![0.0; self.center.len()];
        v[self.i] = -w * a.sin();
        v[self.j] = w * a.cos();
        v
    }
}

/// A curve known through accepted ODE steps, reparametrized to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    sol: Solution,
}

impl SampledCurve {
    pub fn new(sol: Solution) -> Self {
        assert!(sol.t.len() >= 2, "a sampled curve needs two steps");
        SampledCurve { sol }
    }

    pub fn solution(&self) -> &Solution {
        &self.sol
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.sol.y
    }

    fn time(&self, s: f64) -> f64 {
        let (t0, t1) = (self.sol.t[0], self.sol.t_end());
        t0 + s * (t1 - t0)
    }
}

impl CurvePath for SampledCurve {
    fn point(&self, s: f64) -> Vec<f64> {
        self.sol.at(self.time(s))
    }

    fn velocity(&self, s: f64) -> Vec<f64> {
        // central difference of the Hermite interpolant
        let h = 1e-6;
        let (lo, hi) = ((s - h).max(0.0), (s + h).min(1.0));
        let a = self.sol.at(self.time(lo));
        let b = self.sol.at(self.time(hi));
        a.iter().zip(&b).map(|(x, y)| (y - x) / (hi - lo)).collect()
    }
}

/// Transport every coordinate basis vector along `curve`; column k of the
/// result is the image of `∂_k`.
pub fn transport_matrix<M, C>(metric: &M, curve: &C, opts: &OdeOptions) -> Result<DMatrix<f64>>
where
    M: MetricField + ?Sized,
    C: CurvePath + ?Sized,
{
    let n = metric.dim();
    let mut state: Vec<f64> = DMatrix::<f64>::identity(n, n).as_slice().to_vec();
    let breaks = curve.breaks();
    for w in breaks.windows(2) {
        let sol = integrate(
            |s, y, dy| {
                let x = curve.point(s);
                let v = curve.velocity(s);
                let g = christoffel(metric, &x)?;
                // column-major: y[col * n + k] = V^k of column col
                for col in 0..n {
                    for k in 0..n {
                        let mut acc = 0.0;
                        for i in 0..n {
                            if v[i] == 0.0 {
                                continue;
                            }
                            for j in 0..n {
                                acc -= g.get(k, i, j) * v[i] * y[col * n + j];
                            }
                        }
                        dy[col * n + k] = acc;
                    }
                }
                Ok(())
            },
            w[0],
            w[1],
            &state,
            opts,
        )?;
        state = sol.last().to_vec();
    }
    Ok(DMatrix::from_column_slice(n, n, &state))
}

/// Parallel transport of `v0` along `curve`.
pub fn parallel_transport<M, C>(metric: &M, curve: &C, v0: &[f64], opts: &OdeOptions) -> Result<Vec<f64>>
where
    M: MetricField + ?Sized,
    C: CurvePath + ?Sized,
{
    let p = transport_matrix(metric, curve, opts)?;
    Ok((p * nalgebra::DVector::from_column_slice(v0)).as_slice().to_vec())
}

/// A causal curve with the largest normalized `g(γ̇, γ̇)` seen on it.
#[derive(Clone, Debug)]
pub struct CausalCurve {
    pub curve: SampledCurve,
    pub max_norm: f64,
    /// The flow left the chart before `t_end`.
    pub left_chart: bool,
}

/// Flow of `direction` from `start` for parameter time `t_end`, checking that
/// the field stays causal: `g(V, V) ≤ tol·|V|²` at every evaluation.
pub fn integrate_causal_curve<M, F>(
    metric: &M,
    start: &[f64],
    direction: F,
    t_end: f64,
    tol: f64,
    opts: &OdeOptions,
) -> Result<CausalCurve>
where
    M: MetricField + ?Sized,
    F: Fn(&[f64]) -> Vec<f64>,
{
    metric.chart().check(start)?;
    let mut max_norm = f64::NEG_INFINITY;
    let sol = integrate_until(
        |_, x, dx| {
            let v = direction(x);
            let norm = metric.pair(x, &v, &v);
            let size: f64 = v.iter().map(|a| a * a).sum();
            if norm > tol * size.max(1e-300) {
                return Err(Error::CausalityViolation {
                    point: x.to_vec(),
                    norm,
                });
            }
            if size > 0.0 {
                max_norm = max_norm.max(norm / size);
            }
            dx.copy_from_slice(&v);
            Ok(())
        },
        0.0,
        t_end,
        start,
        opts,
        |_, x| !metric.chart().contains(x),
    )?;
    let left_chart = sol.stopped;
    Ok(CausalCurve {
        curve: SampledCurve::new(sol),
        max_norm,
        left_chart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::{Chart, Coordinate};
    use crate::geometry::metric::{Signature, SmoothMetric};
    use crate::scalar::{cst, Mat, Real};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    struct Sphere(Chart);
    impl SmoothMetric for Sphere {
        fn chart(&self) -> &Chart {
            &self.0
        }
        fn signature(&self) -> Signature {
            Signature::riemannian(2)
        }
        fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
            let s = p[0].sin();
            Mat::from_vec(2, 2, vec![cst(1.0), cst(0.0), cst(0.0), s * s])
        }
    }

    struct Minkowski2(Chart);
    impl SmoothMetric for Minkowski2 {
        fn chart(&self) -> &Chart {
            &self.0
        }
        fn signature(&self) -> Signature {
            Signature::lorentzian(2)
        }
        fn components<D: Real>(&self, _: &[D]) -> Mat<D> {
            Mat::from_vec(2, 2, vec![cst(0.0), cst(1.0), cst(1.0), cst(0.0)])
        }
    }

    fn sphere() -> Sphere {
        Sphere(Chart::new(vec![Coordinate::new("theta", 0.05, PI - 0.05), Coordinate::periodic("phi", 0.0, 2.0 * PI)]))
    }

    #[test]
    fn latitude_loop_rotates_by_enclosed_area() {
        let s = sphere();
        let th = PI / 3.0;
        let loop_ = Polyline::new(vec![vec![th, 0.0], vec![th, 2.0 * PI]]);
        let p = transport_matrix(&s, &loop_, &OdeOptions::default()).unwrap();
        // orthonormal components: e1 = ∂θ, e2 = ∂φ / sinθ
        let st = th.sin();
        let (a, b) = (p[(0, 0)], p[(1, 0)] * st);
        let angle = b.atan2(a).rem_euclid(2.0 * PI);
        let expected = (2.0 * PI * (1.0 - th.cos())).rem_euclid(2.0 * PI);
        assert_relative_eq!(angle, expected, epsilon = 1e-7);
        assert_relative_eq!(angle, PI, epsilon = 1e-7);
    }

    #[test]
    fn transport_is_isometric_on_sphere() {
        let s = sphere();
        let c = CoordinateCircle {
            center: vec![1.0, 0.5],
            i: 0,
            j: 1,
            radius: 0.3,
        };
        let v = [0.3, -1.2];
        let w = [1.0, 0.4];
        let opts = OdeOptions::default();
        let pv = parallel_transport(&s, &c, &v, &opts).unwrap();
        let pw = parallel_transport(&s, &c, &w, &opts).unwrap();
        let start = c.point(0.0);
        assert_relative_eq!(s.pair(&start, &pv, &pw), s.pair(&start, &v, &w), epsilon = 1e-8);
    }

    #[test]
    fn lasso_closes() {
        let l = Polyline::lasso(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1, 2, 0.1);
        assert_eq!(l.point(0.0), l.point(1.0));
        assert_eq!(l.breaks().len(), l.vertices().len());
    }

    #[test]
    fn causal_flow_along_null_generator() {
        let m = Minkowski2(Chart::new(vec![Coordinate::new("xi", -5.0, 5.0), Coordinate::new("eta", -5.0, 5.0)]));
        let c = integrate_causal_curve(&m, &[0.0, 0.0], |_| vec![0.0, 1.0], 2.0, 1e-12, &OdeOptions::default()).unwrap();
        let end = c.curve.point(1.0);
        assert_relative_eq!(end[1], 2.0, epsilon = 1e-12);
        assert_eq!(end[0], 0.0);
        let bad = integrate_causal_curve(&m, &[0.0, 0.0], |_| vec![1.0, 1.0], 2.0, 1e-12, &OdeOptions::default());
        assert!(matches!(bad, Err(Error::CausalityViolation { .. })));
    }
}
