use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use crate::error::{Error, Result};
use crate::scalar::{hessian, jacobian, Dual, Dual64, Mat, Real};

/// Counts of positive and negative eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
}

impl Signature {
    pub const fn riemannian(n: usize) -> Self {
        Signature { plus: n, minus: 0 }
    }

    pub const fn lorentzian(n: usize) -> Self {
        Signature {
            plus: n - 1,
            minus: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.plus + self.minus
    }

    /// Signature of a symmetric matrix; `None` if an eigenvalue is below `tol`
    /// in absolute value relative to the largest.
    pub fn of(g: &DMatrix<f64>, tol: f64) -> Option<Self> {
        let eig = g.clone().symmetric_eigen();
        let scale = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut s = Signature { plus: 0, minus: 0 };
        for &l in eig.eigenvalues.iter() {
            if l.abs() <= tol * scale {
                return None;
            }
            if l > 0.0 {
                s.plus += 1;
            } else {
                s.minus += 1;
            }
        }
        Some(s)
    }
}

/// Metric components with their first and (optionally) second partials.
/// `first[k] = ∂_k g`, `second[k][l] = ∂_k ∂_l g`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub first: Vec<DMatrix<f64>>,
    pub second: Option<Vec<Vec<DMatrix<f64>>>>,
}

/// A symmetric nondegenerate bilinear form on a chart, with derivative access.
pub trait MetricField {
    fn chart(&self) -> &Chart;
    fn signature(&self) -> Signature;
    fn eval(&self, p: &[f64]) -> DMatrix<f64>;
    fn first_jet(&self, p: &[f64]) -> Result<MetricJet>;
    fn second_jet(&self, p: &[f64]) -> Result<MetricJet>;

    fn dim(&self) -> usize {
        self.chart().dim()
    }

    /// `g(v, w)` at `p`.
    fn pair(&self, p: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let g = self.eval(p);
        let mut acc = 0.0;
        for i in 0..v.len() {
            for j in 0..w.len() {
                acc += g[(i, j)] * v[i] * w[j];
            }
        }
        acc
    }
}

/// A metric given by formulas that accept any [`Real`]; derivatives come
/// from forward-mode differentiation and are exact to rounding.
pub trait SmoothMetric {
    fn chart(&self) -> &Chart;
    fn signature(&self) -> Signature;
    fn components<D: Real>(&self, p: &[D]) -> Mat<D>;
}

impl<T: SmoothMetric> MetricField for T {
    fn chart(&self) -> &Chart {
        SmoothMetric::chart(self)
    }

    fn signature(&self) -> Signature {
        SmoothMetric::signature(self)
    }

    fn eval(&self, p: &[f64]) -> DMatrix<f64> {
        self.components(p).re()
    }

    fn first_jet(&self, p: &[f64]) -> Result<MetricJet> {
        let n = p.len();
        let (v, d) = jacobian(p, |x: &[Dual64]| self.components(x).into_vec());
        Ok(MetricJet {
            g: DMatrix::from_row_slice(n, n, &v),
            first: d.iter().map(|dk| DMatrix::from_row_slice(n, n, dk)).collect(),
            second: None,
        })
    }

    fn second_jet(&self, p: &[f64]) -> Result<MetricJet> {
        let n = p.len();
        let (v, d1, d2) = hessian(p, |x: &[Dual<Dual64>]| self.components(x).into_vec());
        Ok(MetricJet {
            g: DMatrix::from_row_slice(n, n, &v),
            first: d1.iter().map(|dk| DMatrix::from_row_slice(n, n, dk)).collect(),
            second: Some(
                d2.iter()
                    .map(|row| row.iter().map(|dkl| DMatrix::from_row_slice(n, n, dkl)).collect())
                    .collect(),
            ),
        })
    }
}

/// A metric known only through point evaluations; partials by central
/// differences with one Richardson extrapolation step.
pub struct SampledMetric<F> {
    chart: Chart,
    signature: Signature,
    f: F,
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> SampledMetric<F> {
    pub fn new(chart: Chart, signature: Signature, f: F) -> Self {
        SampledMetric { chart, signature, f }
    }

    fn step(&self, p: &[f64], k: usize) -> Result<f64> {
        let nominal = self.chart.coord(k).width() * 1e-4;
        let h = self.chart.fd_step(p, k);
        if h < 0.5 * nominal {
            return Err(Error::Boundary {
                point: p.to_vec(),
                step: h,
            });
        }
        Ok(h)
    }

    fn shifted(&self, p: &[f64], k: usize, hk: f64, l: usize, hl: f64) -> DMatrix<f64> {
        let mut q = p.to_vec();
        q[k] += hk;
        q[l] += hl;
        (self.f)(&q)
    }

    fn central(&self, p: &[f64], k: usize, h: f64) -> DMatrix<f64> {
        (self.shifted(p, k, h, k, 0.0) - self.shifted(p, k, -h, k, 0.0)) / (2.0 * h)
    }

    fn second_central(&self, p: &[f64], k: usize, l: usize, hk: f64, hl: f64) -> DMatrix<f64> {
        if k == l {
            let g0 = (self.f)(p);
            (self.shifted(p, k, hk, k, 0.0) - g0 * 2.0 + self.shifted(p, k, -hk, k, 0.0)) / (hk * hk)
        } else {
            (self.shifted(p, k, hk, l, hl) - self.shifted(p, k, hk, l, -hl) - self.shifted(p, k, -hk, l, hl)
                + self.shifted(p, k, -hk, l, -hl))
                / (4.0 * hk * hl)
        }
    }
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> MetricField for SampledMetric<F> {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        self.signature
    }

    fn eval(&self, p: &[f64]) -> DMatrix<f64> {
        (self.f)(p)
    }

    fn first_jet(&self, p: &[f64]) -> Result<MetricJet> {
        let mut first = Vec::with_capacity(p.len());
        for k in 0..p.len() {
            let h = self.step(p, k)?;
            let coarse = self.central(p, k, h);
            let fine = self.central(p, k, h / 2.0);
            first.push((fine * 4.0 - coarse) / 3.0);
        }
        Ok(MetricJet {
            g: (self.f)(p),
            first,
            second: None,
        })
    }

    fn second_jet(&self, p: &[f64]) -> Result<MetricJet> {
        let mut jet = self.first_jet(p)?;
        let n = p.len();
        let mut second = vec![vec![DMatrix::zeros(n, n); n]; n];
        for k in 0..n {
            for l in k..n {
                // second differences lose two digits more than first ones
                let hk = self.step(p, k)? * 10.0;
                let hl = self.step(p, l)? * 10.0;
                let coarse = self.second_central(p, k, l, hk, hl);
                let fine = self.second_central(p, k, l, hk / 2.0, hl / 2.0);
                let est = (fine * 4.0 - coarse) / 3.0;
                second[l][k] = est.clone();
                second[k][l] = est;
            }
        }
        jet.second = Some(second);
        Ok(jet)
    }
}

fn inverse_checked(g: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let lu = g.clone().lu();
    let det = lu.determinant();
    if scale == 0.0 || det.abs() < 1e-13 * scale.powi(g.nrows() as i32) {
        return Err(Error::DegenerateMetric { point: p.to_vec() });
    }
    lu.try_inverse().ok_or_else(|| Error::DegenerateMetric { point: p.to_vec() })
}

/// Christoffel symbols of the second kind, `Γ^k_{ij}`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max |Γ^k_{ij} - Γ^k_{ji}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r = r.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        r
    }

    /// `max |∇_k g_{ij}|` given the metric jet the symbols came from.
    pub fn metricity_residual(&self, jet: &MetricJet) -> f64 {
        let n = self.dim;
        let g = &jet.g;
        let mut r: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = jet.first[k][(i, j)];
                    for l in 0..n {
                        v -= self.get(l, k, i) * g[(l, j)] + self.get(l, k, j) * g[(i, l)];
                    }
                    r = r.max(v.abs());
                }
            }
        }
        r
    }
}

fn lowered_christoffel(jet: &MetricJet, n: usize) -> Vec<f64> {
    // Γ_{l,ij} = ½(∂_i g_{lj} + ∂_j g_{li} - ∂_l g_{ij})
    let mut low = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                low[(l * n + i) * n + j] =
                    0.5 * (jet.first[i][(l, j)] + jet.first[j][(l, i)] - jet.first[l][(i, j)]);
            }
        }
    }
    low
}

fn christoffel_from_jet(jet: &MetricJet, ginv: &DMatrix<f64>) -> Christoffel {
    let n = jet.g.nrows();
    let low = lowered_christoffel(jet, n);
    let mut data = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * low[(l * n + i) * n + j];
                }
                data[(k * n + i) * n + j] = acc;
            }
        }
    }
    Christoffel { dim: n, data }
}

/// Levi-Civita connection coefficients at `p`.
pub fn christoffel<M: MetricField + ?Sized>(metric: &M, p: &[f64]) -> Result<Christoffel> {
    metric.chart().check(p)?;
    let jet = metric.first_jet(p)?;
    let ginv = inverse_checked(&jet.g, p)?;
    Ok(christoffel_from_jet(&jet, &ginv))
}

/// Riemann tensor `R^a_{bcd}` with `R(∂_c, ∂_d) ∂_b = R^a_{bcd} ∂_a`.
#[derive(Clone, Debug)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
    g: DMatrix<f64>,
}

impl Riemann {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn lowered(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        (0..self.dim).map(|e| self.g[(a, e)] * self.get(e, b, c, d)).sum()
    }

    /// `Ric_{bd} = R^a_{bad}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum())
    }

    /// Sectional curvature of the plane spanned by `x`, `y`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut num = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        num += self.lowered(a, b, c, d) * x[a] * y[b] * x[c] * y[d];
                    }
                }
            }
        }
        let gxx = quad(&self.g, x, x);
        let gyy = quad(&self.g, y, y);
        let gxy = quad(&self.g, x, y);
        num / (gxx * gyy - gxy * gxy)
    }

    /// Max violation of `R_{abcd} = -R_{bacd} = -R_{abdc}`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = self.lowered(a, b, c, d);
                        r = r.max((x + self.lowered(b, a, c, d)).abs());
                        r = r.max((x + self.lowered(a, b, d, c)).abs());
                    }
                }
            }
        }
        r
    }

    /// Max of `|R^a_{bcd} + R^a_{cdb} + R^a_{dbc}|`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.get(a, b, c, d) + self.get(a, c, d, b) + self.get(a, d, b, c);
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

fn quad(g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..y.len() {
            acc += g[(i, j)] * x[i] * y[j];
        }
    }
    acc
}

/// Riemann tensor at `p` from second derivatives of the metric.
pub fn riemann<M: MetricField + ?Sized>(metric: &M, p: &[f64]) -> Result<Riemann> {
    metric.chart().check(p)?;
    let jet = metric.second_jet(p)?;
    let second = jet
        .second
        .as_ref()
        .ok_or_else(|| crate::error::Error::DerivativeUnavailable("second partials of the metric".into()))?;
    let n = jet.g.nrows();
    let ginv = inverse_checked(&jet.g, p)?;
    let gamma = christoffel_from_jet(&jet, &ginv);
    let low = lowered_christoffel(&jet, n);

    // ∂_c Γ^a_{db} = ∂_c g^{al} Γ_{l,db} + g^{al} ∂_c Γ_{l,db}
    let mut dgamma = vec![0.0; n * n * n * n]; // [c][a][d][b]
    let dginv: Vec<DMatrix<f64>> = (0..n).map(|c| -(&ginv * &jet.first[c] * &ginv)).collect();
    for c in 0..n {
        for a in 0..n {
            for d in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        let dlow = 0.5 * (second[c][d][(l, b)] + second[c][b][(l, d)] - second[c][l][(d, b)]);
                        acc += dginv[c][(a, l)] * low[(l * n + d) * n + b] + ginv[(a, l)] * dlow;
                    }
                    dgamma[((c * n + a) * n + d) * n + b] = acc;
                }
            }
        }
    }
    let dg = |c: usize, a: usize, d: usize, b: usize| dgamma[((c * n + a) * n + d) * n + b];

    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dg(c, a, d, b) - dg(d, a, c, b);
                    for e in 0..n {
                        v += gamma.get(a, c, e) * gamma.get(e, d, b) - gamma.get(a, d, e) * gamma.get(e, c, b);
                    }
                    data[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(Riemann { dim: n, data, g: jet.g })
}

/// Check the metric at `p` against its declared signature.
pub fn check_signature<M: MetricField + ?Sized>(metric: &M, p: &[f64]) -> Result<()> {
    let g = metric.eval(p);
    let sym = (&g - g.transpose()).amax();
    if sym > 1e-12 * g.amax().max(1.0) {
        return Err(Error::Signature {
            point: p.to_vec(),
            reason: format!("asymmetric by {sym:.3e}"),
        });
    }
    match Signature::of(&g, 1e-12) {
        None => Err(Error::DegenerateMetric { point: p.to_vec() }),
        Some(s) if s != metric.signature() => Err(Error::Signature {
            point: p.to_vec(),
            reason: format!("found ({}, {}) eigenvalue signs", s.plus, s.minus),
        }),
        Some(_) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Coordinate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    pub(crate) struct Sphere {
        chart: Chart,
    }

    impl Sphere {
        pub(crate) fn new() -> Self {
            Sphere {
                chart: Chart::new(vec![Coordinate::new("theta", 0.05, PI - 0.05), Coordinate::periodic("phi", 0.0, 2.0 * PI)]),
            }
        }
    }

    impl SmoothMetric for Sphere {
        fn chart(&self) -> &Chart {
            &self.chart
        }
        fn signature(&self) -> Signature {
            Signature::riemannian(2)
        }
        fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
            let s = p[0].sin();
            Mat::from_vec(2, 2, vec![D::from(1.0), D::from(0.0), D::from(0.0), s * s])
        }
    }

    struct Euclid(Chart);

    impl SmoothMetric for Euclid {
        fn chart(&self) -> &Chart {
            &self.0
        }
        fn signature(&self) -> Signature {
            Signature::riemannian(self.0.dim())
        }
        fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
            Mat::identity(p.len())
        }
    }

    #[test]
    fn flat_metric_has_zero_connection_and_curvature() {
        let m = Euclid(Chart::new(vec![Coordinate::new("x", -1.0, 1.0), Coordinate::new("y", -1.0, 1.0), Coordinate::new("z", -1.0, 1.0)]));
        let p = [0.1, 0.2, -0.3];
        let g = christoffel(&m, &p).unwrap();
        assert_eq!(g.data.iter().map(|x| x.abs()).fold(0.0, f64::max), 0.0);
        assert_eq!(riemann(&m, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sphere_christoffel_at_equator() {
        let s = Sphere::new();
        let g = christoffel(&s, &[PI / 2.0, 0.0]).unwrap();
        assert!(g.get(0, 1, 1).abs() < 1e-15);
        let g = christoffel(&s, &[PI / 3.0, 0.0]).unwrap();
        assert_relative_eq!(g.get(0, 1, 1), -(PI / 3.0).sin() * (PI / 3.0).cos(), epsilon = 1e-14);
        assert_relative_eq!(g.get(1, 0, 1), (PI / 3.0).cos() / (PI / 3.0).sin(), epsilon = 1e-14);
        assert!(g.symmetry_residual() < 1e-15);
        let jet = s.first_jet(&[PI / 3.0, 0.0]).unwrap();
        assert!(g.metricity_residual(&jet) < 1e-14);
    }

    #[test]
    fn sphere_has_unit_sectional_curvature() {
        let s = Sphere::new();
        for &th in &[0.3, 1.0, 2.0, 2.9] {
            let r = riemann(&s, &[th, 0.4]).unwrap();
            assert_relative_eq!(r.sectional(&[1.0, 0.0], &[0.0, 1.0]), 1.0, epsilon = 1e-12);
            assert_relative_eq!(r.sectional(&[1.0, 0.5], &[-0.2, 1.0]), 1.0, epsilon = 1e-12);
            assert!(r.antisymmetry_residual() < 1e-13);
            assert!(r.bianchi_residual() < 1e-13);
            let ric = r.ricci();
            let g = s.eval(&[th, 0.4]);
            assert!((ric - g).amax() < 1e-12);
        }
    }

    #[test]
    fn sampled_metric_matches_analytic_route() {
        let s = Sphere::new();
        let fd = SampledMetric::new(s.chart.clone(), Signature::riemannian(2), |p: &[f64]| s.eval(p));
        let p = [1.1, 0.7];
        let exact = riemann(&s, &p).unwrap();
        let approx = riemann(&fd, &p).unwrap();
        assert!((exact.get(0, 1, 0, 1) - approx.get(0, 1, 0, 1)).abs() < 1e-5);
        assert!(approx.bianchi_residual() < 1e-4);
        let g1 = christoffel(&fd, &p).unwrap();
        let g2 = christoffel(&s, &p).unwrap();
        assert!((g1.get(0, 1, 1) - g2.get(0, 1, 1)).abs() < 1e-9);
    }

    #[test]
    fn sampled_metric_reports_boundary() {
        let s = Sphere::new();
        let fd = SampledMetric::new(s.chart.clone(), Signature::riemannian(2), |p: &[f64]| s.eval(p));
        let err = christoffel(&fd, &[0.05, 0.1]).unwrap_err();
        assert!(matches!(err, Error::Boundary { .. }));
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let fd = SampledMetric::new(
            Chart::new(vec![Coordinate::new("x", -1.0, 1.0), Coordinate::new("y", -1.0, 1.0)]),
            Signature::riemannian(2),
            |_: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        );
        assert!(matches!(christoffel(&fd, &[0.0, 0.0]), Err(Error::DegenerateMetric { .. })));
        assert!(check_signature(&fd, &[0.0, 0.0]).is_err());
    }
}
