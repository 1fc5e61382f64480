//! Calabi spaces: Ricci-flat Kähler metrics on the line bundle over ℂP^{m-1},
//! the Eguchi–Hanson space at `m = 2`.
//!
//! Coordinates are `(ρ, τ, x₁, y₁, …, x_{m-1}, y_{m-1})` with `z_k = x_k + i y_k`
//! an affine chart of the projective base.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::chart::{Chart, Coordinate};
use crate::geometry::forms::FormField;
use crate::geometry::frame::FrameField;
use crate::geometry::metric::{riemann, Signature, SmoothMetric};
use crate::scalar::{cst, Mat, Real};

/// Fubini–Study normalization making the Calabi metric Ricci-flat. Calibrated
/// by [`calibrate_fs_scale`]; the value is pinned in `golden/constants.json`.
pub const FS_SCALE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalabiSpace {
    m: usize,
    fs_scale: f64,
    chart: Chart,
}

/// Working-chart bounds: `ρ ∈ [rho.0, rho.1]`, base coordinates in
/// `[-base, base]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalabiChart {
    pub rho: (f64, f64),
    pub base: f64,
    pub margin: f64,
}

impl Default for CalabiChart {
    fn default() -> Self {
        CalabiChart {
            rho: (1.2, 3.0),
            base: 1.5,
            margin: 1e-2,
        }
    }
}

impl CalabiSpace {
    pub fn new(m: usize, fs_scale: f64, bounds: CalabiChart) -> Result<Self> {
        if m < 2 {
            return Err(Error::Spec {
                clause: format!("Calabi space needs complex dimension m >= 2 (got {m})"),
            });
        }
        if !(fs_scale > 0.0) {
            return Err(Error::Spec {
                clause: "fs_scale > 0".into(),
            });
        }
        if bounds.rho.0 < 1.0 + bounds.margin {
            return Err(Error::SingularLocus {
                point: vec![bounds.rho.0],
                locus: "rho = 1".into(),
                distance: bounds.rho.0 - 1.0,
            });
        }
        let mut coords = vec![
            Coordinate::new("rho", bounds.rho.0, bounds.rho.1),
            Coordinate::periodic("tau", 0.0, 2.0 * PI / m as f64),
        ];
        for k in 1..m {
            coords.push(Coordinate::new(format!("x{k}"), -bounds.base, bounds.base));
            coords.push(Coordinate::new(format!("y{k}"), -bounds.base, bounds.base));
        }
        Ok(CalabiSpace {
            m,
            fs_scale,
            chart: Chart::new(coords).with_margin(bounds.margin),
        })
    }

    /// `C₂` with the default chart.
    pub fn eguchi_hanson() -> Self {
        Self::new(2, FS_SCALE, CalabiChart::default()).expect("default chart is valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn fs_scale(&self) -> f64 {
        self.fs_scale
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Period of τ.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn with_fs_scale(&self, fs_scale: f64) -> Self {
        CalabiSpace {
            fs_scale,
            ..self.clone()
        }
    }

    /// `V(ρ) = 1 - ρ^{-2m}`.
    pub fn v<D: Real>(&self, rho: D) -> D {
        D::one() - rho.powi(-2 * self.m as i32)
    }

    /// Fubini–Study metric on the base in real coordinates `(x₁, y₁, …)`.
    pub fn fs_metric<D: Real>(&self, z: &[D]) -> Mat<D> {
        let (p, q) = self.fs_hermitian(z);
        let k = z.len() / 2;
        // ds² = Re(dz̄ᵀ h dz), h = P + iQ
        Mat::from_fn(2 * k, 2 * k, |a, b| {
            let (ka, ya) = (a / 2, a % 2 == 1);
            let (kb, yb) = (b / 2, b % 2 == 1);
            match (ya, yb) {
                (false, false) | (true, true) => p[(ka, kb)],
                (false, true) => -q[(ka, kb)],
                (true, false) => q[(ka, kb)],
            }
        })
    }

    /// Real and imaginary parts of `h_{kl} = s(δ_{kl}/(1+r²) - z_k z̄_l/(1+r²)²)`.
    fn fs_hermitian<D: Real>(&self, z: &[D]) -> (Mat<D>, Mat<D>) {
        let k = z.len() / 2;
        let r2 = (0..2 * k).fold(cst::<D>(0.0), |acc, i| acc + z[i] * z[i]);
        let w = D::one() + r2;
        let s = cst::<D>(self.fs_scale);
        let (x, y) = (|i: usize| z[2 * i], |i: usize| z[2 * i + 1]);
        let p = Mat::from_fn(k, k, |a, b| {
            let d = if a == b { w.recip() } else { cst(0.0) };
            // Re(z_a z̄_b)
            s * (d - (x(a) * x(b) + y(a) * y(b)) / (w * w))
        });
        let q = Mat::from_fn(k, k, |a, b| {
            // Im(z_a z̄_b)
            -s * (y(a) * x(b) - x(a) * y(b)) / (w * w)
        });
        (p, q)
    }

    /// Potential `A = (s/2) Σ (x_k dy_k - y_k dx_k)/(1+r²)` on the base.
    pub fn fs_potential<D: Real>(&self, z: &[D]) -> Vec<D> {
        let k = z.len() / 2;
        let r2 = z.iter().fold(cst::<D>(0.0), |acc, &v| acc + v * v);
        let c = cst::<D>(0.5 * self.fs_scale) / (D::one() + r2);
        let mut a = vec![cst(0.0); 2 * k];
        for i in 0..k {
            a[2 * i] = -c * z[2 * i + 1];
            a[2 * i + 1] = c * z[2 * i];
        }
        a
    }

    /// Kähler form `Φ(X, Y) = ds²(JX, Y)`, `J∂_x = ∂_y`.
    pub fn fs_kahler<D: Real>(&self, z: &[D]) -> Vec<D> {
        let g = self.fs_metric(z);
        let n = z.len();
        let mut out = vec![cst(0.0); n * n];
        for a in 0..n {
            // J e_a: ∂x_k ↦ ∂y_k, ∂y_k ↦ -∂x_k
            let (ja, sign) = if a % 2 == 0 { (a + 1, 1.0) } else { (a - 1, -1.0) };
            for b in 0..n {
                out[a * n + b] = g[(ja, b)] * sign;
            }
        }
        out
    }

    /// Unitary coframe of the base: `θ = L* dz` with `h = L L*`, split into
    /// real and imaginary parts. In it `Φ = Σ Re θ_k ∧ Im θ_k`.
    pub fn fs_coframe<D: Real>(&self, z: &[D]) -> Mat<D> {
        let k = z.len() / 2;
        let (p, q) = self.fs_hermitian(z);
        // complex Cholesky with entries as (re, im)
        let mut lr = Mat::<D>::zeros(k, k);
        let mut li = Mat::<D>::zeros(k, k);
        for j in 0..k {
            let mut d = p[(j, j)];
            for c in 0..j {
                d -= lr[(j, c)] * lr[(j, c)] + li[(j, c)] * li[(j, c)];
            }
            let ljj = d.sqrt();
            lr[(j, j)] = ljj;
            for i in j + 1..k {
                // (H_ij - Σ L_ic conj(L_jc)) / L_jj
                let mut re = p[(i, j)];
                let mut im = q[(i, j)];
                for c in 0..j {
                    re -= lr[(i, c)] * lr[(j, c)] + li[(i, c)] * li[(j, c)];
                    im -= li[(i, c)] * lr[(j, c)] - lr[(i, c)] * li[(j, c)];
                }
                lr[(i, j)] = re / ljj;
                li[(i, j)] = im / ljj;
            }
        }
        // θ_a = Σ_l conj(L_la) dz_l, conj(L_la) = α + iβ
        Mat::from_fn(2 * k, 2 * k, |row, col| {
            let (a, im_row) = (row / 2, row % 2 == 1);
            let (l, dy) = (col / 2, col % 2 == 1);
            let alpha = lr[(l, a)];
            let beta = -li[(l, a)];
            match (im_row, dy) {
                (false, false) => alpha,
                (false, true) => -beta,
                (true, false) => beta,
                (true, true) => alpha,
            }
        })
    }

    /// `dτ - 2A` on the total space.
    pub fn fiber_form<D: Real>(&self, p: &[D]) -> Vec<D> {
        let a = self.fs_potential(&p[2..]);
        let mut out = vec![cst(0.0); p.len()];
        out[1] = D::one();
        for (i, ai) in a.into_iter().enumerate() {
            out[2 + i] = ai * -2.0;
        }
        out
    }

    /// `B = ½ρ²(dτ - 2A)`.
    pub fn b_form<D: Real>(&self, p: &[D]) -> Vec<D> {
        let c = p[0] * p[0] * 0.5;
        self.fiber_form(p).into_iter().map(|v| v * c).collect()
    }

    /// `Φ̂ = -ρ²Φ + ρ dρ ∧ (dτ - 2A)`, full components.
    pub fn hat_kahler<D: Real>(&self, p: &[D]) -> Vec<D> {
        let n = p.len();
        let phi = self.fs_kahler(&p[2..]);
        let fib = self.fiber_form(p);
        let r2 = p[0] * p[0];
        let mut out = vec![cst(0.0); n * n];
        for a in 2..n {
            for b in 2..n {
                out[a * n + b] = -r2 * phi[(a - 2) * (n - 2) + (b - 2)];
            }
        }
        // (dρ∧σ)_{0b} = σ_b, (dρ∧σ)_{b0} = -σ_b
        for b in 1..n {
            let v = p[0] * fib[b];
            out[b] += v;
            out[b * n] -= v;
        }
        out
    }

    /// Matrix of `Φ̂` in the orthonormal frame of [`FrameField::coframe`]:
    /// `e¹∧e² - Σ e^{2k+1}∧e^{2k+2}`, constant.
    pub fn hat_kahler_frame(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        for k in 0..self.m {
            let s = if k == 0 { 1.0 } else { -1.0 };
            j[(2 * k, 2 * k + 1)] = s;
            j[(2 * k + 1, 2 * k)] = -s;
        }
        j
    }

    /// Distance of `p` from the bolt, or an error inside the margin.
    pub fn check_bolt(&self, p: &[f64]) -> Result<()> {
        let margin = self.chart.margin();
        if p[0] < 1.0 + margin {
            return Err(Error::SingularLocus {
                point: p.to_vec(),
                locus: "rho = 1".into(),
                distance: p[0] - 1.0,
            });
        }
        Ok(())
    }
}

impl SmoothMetric for CalabiSpace {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::riemannian(self.dim())
    }

    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        let n = p.len();
        let rho = p[0];
        let v = self.v(rho);
        let fib = self.fiber_form(p);
        let ds = self.fs_metric(&p[2..]);
        let r2 = rho * rho;
        Mat::from_fn(n, n, |a, b| {
            let mut g = r2 * v * fib[a] * fib[b];
            if a == 0 && b == 0 {
                g += v.recip();
            }
            if a >= 2 && b >= 2 {
                g += r2 * ds[(a - 2, b - 2)];
            }
            g
        })
    }
}

impl FrameField for CalabiSpace {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn gram_target(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    /// `e¹ = dρ/√V`, `e² = ρ√V(dτ - 2A)`, `e^{2+j} = ρ θ_j` with θ the
    /// unitary base coframe.
    fn coframe<D: Real>(&self, p: &[D]) -> Mat<D> {
        let n = p.len();
        let rho = p[0];
        let sv = self.v(rho).sqrt();
        let fib = self.fiber_form(p);
        let base = self.fs_coframe(&p[2..]);
        Mat::from_fn(n, n, |a, b| match a {
            0 => {
                if b == 0 {
                    sv.recip()
                } else {
                    cst(0.0)
                }
            }
            1 => rho * sv * fib[b],
            _ => {
                if b >= 2 {
                    rho * base[(a - 2, b - 2)]
                } else {
                    cst(0.0)
                }
            }
        })
    }
}

/// Metric value with the bolt check.
pub fn calabi_metric(space: &CalabiSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    space.check_bolt(p)?;
    space.chart.check(p)?;
    Ok(space.components(p).re())
}

/// Fubini–Study data at one base point.
#[derive(Clone, Debug)]
pub struct FubiniStudy {
    pub metric: DMatrix<f64>,
    pub potential: Vec<f64>,
    pub kahler: Vec<f64>,
}

pub fn fubini_study(m: usize, fs_scale: f64, z: &[f64]) -> Result<FubiniStudy> {
    let space = CalabiSpace::new(m, fs_scale, CalabiChart::default())?;
    if z.len() != 2 * (m - 1) || z.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutsideDomain {
            point: z.to_vec(),
            coordinate: "affine chart of the projective base".into(),
        });
    }
    Ok(FubiniStudy {
        metric: space.fs_metric(z).re(),
        potential: space.fs_potential(z),
        kahler: space.fs_kahler(z),
    })
}

/// The potential `A`, pulled back to the total space, as a form field.
pub struct Potential<'a>(pub &'a CalabiSpace);
/// The base Kähler form Φ pulled back to the total space.
pub struct Kahler<'a>(pub &'a CalabiSpace);
/// `B = ½ρ²(dτ - 2A)`.
pub struct BForm<'a>(pub &'a CalabiSpace);
/// `Φ̂`.
pub struct HatKahler<'a>(pub &'a CalabiSpace);

impl FormField for Potential<'_> {
    fn chart(&self) -> &Chart {
        &self.0.chart
    }
    fn degree(&self) -> usize {
        1
    }
    fn components<D: Real>(&self, p: &[D]) -> Vec<D> {
        let mut out = vec![cst(0.0); 2];
        out.extend(self.0.fs_potential(&p[2..]));
        out
    }
}

impl FormField for Kahler<'_> {
    fn chart(&self) -> &Chart {
        &self.0.chart
    }
    fn degree(&self) -> usize {
        2
    }
    fn components<D: Real>(&self, p: &[D]) -> Vec<D> {
        let n = p.len();
        let phi = self.0.fs_kahler(&p[2..]);
        let mut out = vec![cst(0.0); n * n];
        for a in 2..n {
            for b in 2..n {
                out[a * n + b] = phi[(a - 2) * (n - 2) + (b - 2)];
            }
        }
        out
    }
}

impl FormField for BForm<'_> {
    fn chart(&self) -> &Chart {
        &self.0.chart
    }
    fn degree(&self) -> usize {
        1
    }
    fn components<D: Real>(&self, p: &[D]) -> Vec<D> {
        self.0.b_form(p)
    }
}

impl FormField for HatKahler<'_> {
    fn chart(&self) -> &Chart {
        &self.0.chart
    }
    fn degree(&self) -> usize {
        2
    }
    fn components<D: Real>(&self, p: &[D]) -> Vec<D> {
        self.0.hat_kahler(p)
    }
}

/// Largest Frobenius norm of the Ricci tensor over the probe points.
pub fn max_ricci_norm(space: &CalabiSpace, probes: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in probes {
        space.check_bolt(p)?;
        let r = riemann(space, p)?;
        worst = worst.max(r.ricci().norm());
    }
    Ok(worst)
}

/// Result of the Fubini–Study scale calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub m: usize,
    pub fs_scale: f64,
    pub ricci_norm: f64,
    pub evaluations: usize,
}

/// Find the Fubini–Study scale minimizing the worst Ricci norm over `probes`
/// by golden-section search on `log s ∈ [ln ¼, ln 4]`.
pub fn calibrate_fs_scale(m: usize, probes: &[Vec<f64>], tol: f64) -> Result<Calibration> {
    let base = CalabiSpace::new(m, 1.0, CalabiChart::default())?;
    let mut evaluations = 0;
    let mut objective = |ls: f64| -> Result<f64> {
        evaluations += 1;
        max_ricci_norm(&base.with_fs_scale(ls.exp()), probes)
    };
    // coarse bracket first: the objective is V-shaped around its root
    let grid: Vec<f64> = (0..=16).map(|i| (0.25f64).ln() + i as f64 * (16.0f64).ln() / 16.0).collect();
    let mut values = Vec::with_capacity(grid.len());
    for &g in &grid {
        values.push(objective(g)?);
    }
    let best = (0..grid.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = objective(d)?;
        }
    }
    let ls = 0.5 * (lo + hi);
    let ricci_norm = objective(ls)?;
    Ok(Calibration {
        m,
        fs_scale: ls.exp(),
        ricci_norm,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::forms::exterior_derivative;
    use crate::geometry::frame::gram_residual;
    use crate::geometry::metric::MetricField;
    use approx::assert_relative_eq;

    #[test]
    fn metric_entries_at_rho_two() {
        let c = CalabiSpace::eguchi_hanson();
        let g = calabi_metric(&c, &[2.0, 0.3, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g[(0, 0)], 16.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(g[(1, 1)], 15.0 / 4.0, epsilon = 1e-15);
        assert_relative_eq!(c.b_form(&[2.0, 0.3, 0.0, 0.0])[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn bolt_is_rejected() {
        let c = CalabiSpace::eguchi_hanson();
        assert!(matches!(calabi_metric(&c, &[1.001, 0.0, 0.0, 0.0]), Err(Error::SingularLocus { .. })));
    }

    #[test]
    fn coframe_is_orthonormal() {
        for m in [2, 3] {
            let c = CalabiSpace::new(m, FS_SCALE, CalabiChart::default()).unwrap();
            let mut p = vec![1.7, 0.2];
            p.extend((0..2 * (m - 1)).map(|i| 0.3 * i as f64 - 0.4));
            assert!(gram_residual(&c, &c, &p) < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn base_kahler_form_is_diagonal_in_unitary_frame() {
        let c = CalabiSpace::new(3, FS_SCALE, CalabiChart::default()).unwrap();
        let z = [0.4, -0.2, 0.7, 0.1];
        let th = c.fs_coframe(&z[..]).re();
        let e = th.clone().try_inverse().unwrap();
        let phi = DMatrix::from_row_slice(4, 4, &c.fs_kahler(&z[..]));
        let framed = e.transpose() * phi * e;
        let mut expect = DMatrix::zeros(4, 4);
        for k in 0..2 {
            expect[(2 * k, 2 * k + 1)] = 1.0;
            expect[(2 * k + 1, 2 * k)] = -1.0;
        }
        assert!((framed - expect).amax() < 1e-13);
    }

    #[test]
    fn potential_differentiates_to_kahler_form() {
        let c = CalabiSpace::new(3, FS_SCALE, CalabiChart::default()).unwrap();
        let p = [1.5, 0.3, 0.2, -0.5, 0.9, 0.4];
        let da = exterior_derivative(&Potential(&c), &p).unwrap();
        let phi = Kahler(&c).components(&p[..]);
        for (a, b) in da.iter().zip(&phi) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cp1_is_a_round_sphere() {
        let c = CalabiSpace::eguchi_hanson();
        let fs = fubini_study(2, FS_SCALE, &[0.0, 0.0]).unwrap();
        assert_eq!(fs.metric, DMatrix::identity(2, 2));
        let _ = c;
    }

    #[test]
    fn tau_period_leaves_metric_unchanged() {
        let c = CalabiSpace::eguchi_hanson();
        let p = [2.1, 0.4, 0.3, -0.6];
        let q = [2.1, 0.4 + c.period(), 0.3, -0.6];
        assert_eq!(c.eval(&p), c.eval(&q));
    }
}
