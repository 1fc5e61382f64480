use super::chart::Chart;
use super::metric::{christoffel, MetricField};
use crate::error::Result;
use crate::scalar::{jacobian, Dual64, Real};

/// A differential k-form stored as its full antisymmetric component array in
/// the coordinate basis, `ω = (1/k!) ω_{i₁…i_k} dx^{i₁}∧…∧dx^{i_k}`.
///
/// Index order is row-major: `ω_{i₁…i_k}` sits at `Σ i_j n^{k-1-j}`.
pub trait FormField {
    fn chart(&self) -> &Chart;
    fn degree(&self) -> usize;
    fn components<D: Real>(&self, p: &[D]) -> Vec<D>;
}

/// Flat index of a multi-index.
pub fn flat_index(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Iterate every multi-index of length `k` over `0..n`.
pub fn multi_indices(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total).map(move |mut f| {
        let mut idx = vec![0; k];
        for slot in idx.iter_mut().rev() {
            *slot = f % n;
            f /= n;
        }
        idx
    })
}

/// `(dω)_{i₀…i_k} = Σ_j (-1)^j ∂_{i_j} ω_{i₀…î_j…i_k}` from the partials
/// `d[a][·] = ∂_a ω_·`.
pub fn d_from_partials(n: usize, k: usize, d: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; n.pow(k as u32 + 1)];
    for idx in multi_indices(n, k + 1) {
        let mut acc = 0.0;
        for j in 0..=k {
            let mut rest = idx.clone();
            let a = rest.remove(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * d[a][flat_index(n, &rest)];
        }
        out[flat_index(n, &idx)] = acc;
    }
    out
}

/// Exterior derivative at `p`, as full antisymmetric components of degree k+1.
pub fn exterior_derivative<F: FormField + ?Sized>(form: &F, p: &[f64]) -> Result<Vec<f64>> {
    form.chart().check(p)?;
    let n = p.len();
    let (_, d) = jacobian(p, |x: &[crate::scalar::Dual<f64>]| form.components(x));
    Ok(d_from_partials(n, form.degree(), &d))
}

/// `d(dω)` at `p` via nested differentiation; should vanish identically.
pub fn dd<F: FormField + ?Sized>(form: &F, p: &[f64]) -> Result<Vec<f64>> {
    form.chart().check(p)?;
    let n = p.len();
    let k = form.degree();
    let (_, d2) = jacobian(p, |x: &[Dual64]| {
        let (_, d) = jacobian(x, |y| form.components(y));
        let mut out = vec![Dual64::from(0.0); n.pow(k as u32 + 1)];
        for idx in multi_indices(n, k + 1) {
            let mut acc = Dual64::from(0.0);
            for j in 0..=k {
                let mut rest = idx.clone();
                let a = rest.remove(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += d[a][flat_index(n, &rest)] * sign;
            }
            out[flat_index(n, &idx)] = acc;
        }
        out
    });
    Ok(d_from_partials(n, k + 1, &d2))
}

/// `(∇_k ω)_{ij} = ∂_k ω_{ij} - Γ^l_{ki} ω_{lj} - Γ^l_{kj} ω_{il}` for a
/// 2-form, flattened as `[k][i][j]`.
pub fn covariant_derivative_2form<M, F>(metric: &M, form: &F, p: &[f64]) -> Result<Vec<f64>>
where
    M: MetricField + ?Sized,
    F: FormField + ?Sized,
{
    assert_eq!(form.degree(), 2, "covariant derivative implemented for 2-forms");
    let n = p.len();
    let gamma = christoffel(metric, p)?;
    let (w, d) = jacobian(p, |x: &[crate::scalar::Dual<f64>]| form.components(x));
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = d[k][i * n + j];
                for l in 0..n {
                    v -= gamma.get(l, k, i) * w[l * n + j] + gamma.get(l, k, j) * w[i * n + l];
                }
                out[(k * n + i) * n + j] = v;
            }
        }
    }
    Ok(out)
}

/// Largest violation of antisymmetry under adjacent transpositions.
pub fn antisymmetry_residual(n: usize, k: usize, w: &[f64]) -> f64 {
    let mut r: f64 = 0.0;
    for idx in multi_indices(n, k) {
        for j in 0..k.saturating_sub(1) {
            let mut sw = idx.clone();
            sw.swap(j, j + 1);
            r = r.max((w[flat_index(n, &idx)] + w[flat_index(n, &sw)]).abs());
        }
    }
    r
}

/// `(u∧v)_{ij} = u_i v_j - u_j v_i` for 1-forms.
pub fn wedge1<D: Real>(u: &[D], v: &[D]) -> Vec<D> {
    let n = u.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(u[i] * v[j] - u[j] * v[i]);
        }
    }
    out
}

/// `ω(X, Y)` for a 2-form with full components.
pub fn eval2(w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += w[i * n + j] * x[i] * y[j];
        }
    }
    acc
}
