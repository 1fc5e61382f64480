//! Scalar abstraction used by every smooth field in the crate.
//!
//! Fields are written once, generically over [`Real`], and evaluated either
//! with plain `f64` or with forward-mode dual numbers. Nesting `Dual<Dual<_>>`
//! yields exact second derivatives, which the curvature code relies on.

use nalgebra::DMatrix;
pub use num_dual::{Dual, Dual64, DualNum, DualStruct};

/// A scalar that can flow through the metric and frame formulas.
pub trait Real: DualNum<Primitive = f64> + Copy {}

impl<T: DualNum<Primitive = f64> + Copy> Real for T {}

/// Lift a constant into any [`Real`].
#[inline]
pub fn cst<D: Real>(x: f64) -> D {
    D::from(x)
}

/// Real part of a (possibly nested) dual number.
#[inline]
pub fn re<D: Real>(x: D) -> f64 {
    x.re()
}

/// `sqrt(x^2 + w^2)`: an absolute value with a smooth kink of width `w`.
///
/// Only used where a derivative of `|x|` is requested; inequality checks use
/// the exact piecewise formula.
#[inline]
pub fn smooth_abs<D: Real>(x: D, width: f64) -> D {
    (x * x + width * width).sqrt()
}

/// Seed direction `k` of the point `p` for one level of forward differentiation.
pub fn seed<D: Real>(p: &[D], k: usize) -> Vec<Dual<D>> {
    p.iter()
        .enumerate()
        .map(|(i, &v)| Dual::new(v, if i == k { cst(1.0) } else { cst(0.0) }))
        .collect()
}

/// Value and all first partials of a vector-valued function.
///
/// Returns `(f(p), d)` with `d[k][j] = ∂f_j/∂p_k`.
pub fn jacobian<D, F>(p: &[D], f: F) -> (Vec<D>, Vec<Vec<D>>)
where
    D: Real,
    F: Fn(&[Dual<D>]) -> Vec<Dual<D>>,
{
    let mut value = Vec::new();
    let mut d = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let out = f(&seed(p, k));
        if k == 0 {
            value = out.iter().map(|x| x.re).collect();
        }
        d.push(out.iter().map(|x| x.eps).collect());
    }
    if p.is_empty() {
        value = f(&[]).iter().map(|x| x.re).collect();
    }
    (value, d)
}

/// Value, first and second partials of a vector-valued function at an `f64`
/// point. `second[k][l][j] = ∂²f_j/∂p_k∂p_l`.
#[allow(clippy::type_complexity)]
pub fn hessian<F>(p: &[f64], f: F) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>)
where
    F: Fn(&[Dual<Dual64>]) -> Vec<Dual<Dual64>>,
{
    let n = p.len();
    let mut value = Vec::new();
    let mut first = vec![Vec::new(); n];
    let mut second = vec![vec![Vec::new(); n]; n];
    for k in 0..n {
        for l in k..n {
            let x: Vec<Dual<Dual64>> = p
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let inner = Dual::new(v, if i == k { 1.0 } else { 0.0 });
                    let outer = Dual::new(if i == l { 1.0 } else { 0.0 }, 0.0);
                    Dual::new(inner, outer)
                })
                .collect();
            let out = f(&x);
            if value.is_empty() {
                value = out.iter().map(|y| y.re.re).collect();
            }
            if l == k {
                first[k] = out.iter().map(|y| y.re.eps).collect();
            }
            let s: Vec<f64> = out.iter().map(|y| y.eps.eps).collect();
            second[l][k] = s.clone();
            second[k][l] = s;
        }
    }
    (value, first, second)
}

/// Dense row-major matrix over a generic scalar.
///
/// nalgebra handles the `f64` linear algebra (SVD, eigen); this type only
/// carries the small products and inverses that must stay differentiable.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<D> {
    rows: usize,
    cols: usize,
    data: Vec<D>,
}

impl<D: Real> Mat<D> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![cst(0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cst(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> D) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_f64(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| cst(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc: D = cst(0.0);
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, j)];
            }
            acc
        })
    }

    pub fn scale(&self, s: D) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// Gauss–Jordan inverse with partial pivoting on the real part.
    /// Returns `None` when a pivot falls below `1e-14` times the largest entry.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let scale = self.data.iter().map(|x| x.re().abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return None;
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)]
                        .re()
                        .abs()
                        .partial_cmp(&a[(j, col)].re().abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[(pivot, col)].re().abs() < 1e-14 * scale {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].recip();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = a[(i, col)];
                if factor == cst::<D>(0.0) {
                    continue;
                }
                for j in 0..n {
                    let (aj, ij) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= factor * aj;
                    inv[(i, j)] -= factor * ij;
                }
            }
        }
        Some(inv)
    }

    /// Drop all derivative parts.
    pub fn re(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].re())
    }

    pub fn map<E: Real>(&self, f: impl Fn(D) -> E) -> Mat<E> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn as_slice(&self) -> &[D] {
        &self.data
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<D>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn into_vec(self) -> Vec<D> {
        self.data
    }
}

impl<D> std::ops::Index<(usize, usize)> for Mat<D> {
    type Output = D;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &D {
        &self.data[i * self.cols + j]
    }
}

impl<D> std::ops::IndexMut<(usize, usize)> for Mat<D> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut D {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly<D: Real>(x: &[D]) -> Vec<D> {
        vec![x[0] * x[0] * x[1] + x[1].sin(), (x[0] * x[1]).exp()]
    }

    #[test]
    fn jacobian_matches_hand_derivatives() {
        let p = [0.4, -1.3];
        let (v, d) = jacobian(&p, |x| poly(x));
        assert_relative_eq!(v[0], 0.16 * -1.3 + (-1.3f64).sin(), epsilon = 1e-15);
        assert_relative_eq!(d[0][0], 2.0 * 0.4 * -1.3, epsilon = 1e-15);
        assert_relative_eq!(d[1][0], 0.16 + (-1.3f64).cos(), epsilon = 1e-15);
        assert_relative_eq!(d[1][1], 0.4 * (-0.52f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn hessian_is_symmetric_and_exact() {
        let p = [0.4, -1.3];
        let (_, first, second) = hessian(&p, |x| poly(x));
        assert_relative_eq!(first[0][0], 2.0 * 0.4 * -1.3, epsilon = 1e-15);
        assert_relative_eq!(second[0][1][0], 0.8, epsilon = 1e-15);
        assert_relative_eq!(second[1][1][0], -(-1.3f64).sin(), epsilon = 1e-15);
        let e = (-0.52f64).exp();
        assert_relative_eq!(second[0][1][1], e + 0.4 * -1.3 * e, epsilon = 1e-14);
        assert_eq!(second[0][1], second[1][0]);
    }

    #[test]
    fn inverse_round_trips() {
        let m = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.3 * (i + 2 * j) as f64 });
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(id[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        assert!(Mat::<f64>::zeros(2, 2).inverse().is_none());
    }
}
