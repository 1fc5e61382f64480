//! Spans and Lie closure of sets of matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::algebra::bracket;
use crate::error::{Error, Result};

/// An orthonormal (trace pairing) basis of a linear span of matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subalgebra {
    pub size: usize,
    pub basis: Vec<DMatrix<f64>>,
    /// Singular values of the last span computation, largest first.
    pub spectrum: Vec<f64>,
    pub closed: bool,
    /// Dimensions met while closing.
    pub history: Vec<usize>,
}

impl Subalgebra {
    pub fn zero(size: usize) -> Self {
        Subalgebra {
            size,
            basis: Vec::new(),
            spectrum: Vec::new(),
            closed: true,
            history: vec![0],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for b in &self.basis {
            out += b * b.component_mul(m).sum();
        }
        out
    }

    /// `|m - P m| / |m|`, zero for `m = 0`.
    pub fn containment_residual(&self, m: &DMatrix<f64>) -> f64 {
        let nm = m.norm();
        if nm == 0.0 {
            return 0.0;
        }
        (m - self.project(m)).norm() / nm
    }

    /// `max |Bᵀ B - I|` over the basis Gram matrix.
    pub fn gram_residual(&self) -> f64 {
        let k = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let g = self.basis[i].component_mul(&self.basis[j]).sum();
                r = r.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        r
    }

    /// Largest `|[b_i, b_j] - P[b_i, b_j]|`; absolute, as the basis is
    /// orthonormal.
    pub fn bracket_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let b = bracket(&self.basis[i], &self.basis[j]);
                r = r.max((&b - self.project(&b)).norm());
            }
        }
        r
    }

    /// Does `other` lie inside `self`, up to `tol` relative per basis element?
    pub fn contains(&self, other: &Subalgebra, tol: f64) -> bool {
        other.basis.iter().all(|b| self.containment_residual(b) < tol)
    }
}

/// Orthonormal basis of the span, rank decided by singular values above
/// `rel_tol · σ_max`.
pub fn span(elements: &[DMatrix<f64>], rel_tol: f64) -> Subalgebra {
    span_with_floor(elements, rel_tol, 0.0)
}

/// As [`span`], also dropping singular values at or below `floor`.
pub fn span_with_floor(elements: &[DMatrix<f64>], rel_tol: f64, floor: f64) -> Subalgebra {
    let Some(first) = elements.first() else {
        return Subalgebra::zero(0);
    };
    let d = first.nrows();
    let len = d * d;
    // Stack as rows; for many generators reduce chunk by chunk so the SVD
    // stays small.
    let mut acc: Option<DMatrix<f64>> = None;
    for chunk in elements.chunks(4 * len.max(1)) {
        let mut rows = DMatrix::zeros(chunk.len() + acc.as_ref().map_or(0, |a| a.nrows()), len);
        let mut r = 0;
        if let Some(a) = &acc {
            rows.view_mut((0, 0), (a.nrows(), len)).copy_from(a);
            r = a.nrows();
        }
        for m in chunk {
            for (c, v) in m.iter().enumerate() {
                rows[(r, c)] = *v;
            }
            r += 1;
        }
        acc = Some(compress(rows));
    }
    let reduced = acc.unwrap();
    let svd = reduced.clone().svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let spectrum: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = spectrum.first().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    for (&k, &s) in order.iter().zip(&spectrum) {
        if s > floor && s > rel_tol * smax {
            let row: DVector<f64> = vt.row(k).transpose();
            basis.push(DMatrix::from_column_slice(d, d, row.as_slice()));
        }
    }
    Subalgebra {
        size: d,
        basis,
        spectrum,
        closed: false,
        history: Vec::new(),
    }
}

/// Replace the rows by `Σ Vᵀ` (same row space and singular values), at
/// most as many rows as columns.
fn compress(rows: DMatrix<f64>) -> DMatrix<f64> {
    if rows.nrows() <= rows.ncols() {
        return rows;
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut out = vt.clone();
    for (k, s) in svd.singular_values.iter().enumerate() {
        out.row_mut(k).scale_mut(*s);
    }
    out
}

/// Smallest Lie algebra containing `generators`.
///
/// Adds all brackets of the current basis until the dimension stops
/// growing. A shrinking dimension means the rank decision is unstable and
/// surfaces as [`Error::Tolerance`].
pub fn lie_closure(generators: &[DMatrix<f64>], rel_tol: f64) -> Result<Subalgebra> {
    if generators.is_empty() {
        return Ok(Subalgebra::zero(0));
    }
    let mut current = span(generators, rel_tol);
    let mut history = vec![current.dim()];
    let max_dim = current.size * current.size;
    for _ in 0..max_dim + 1 {
        let mut next = current.basis.clone();
        let scale = current.spectrum.first().copied().unwrap_or(1.0);
        for i in 0..current.dim() {
            for j in i + 1..current.dim() {
                next.push(bracket(&current.basis[i], &current.basis[j]));
            }
        }
        // keep the original generators so the spectrum stays comparable
        let mut all = generators.to_vec();
        all.extend(next.iter().map(|m| m * scale));
        let grown = span(&all, rel_tol);
        history.push(grown.dim());
        if grown.dim() < current.dim() {
            return Err(Error::Tolerance { history, tol: rel_tol });
        }
        if grown.dim() == current.dim() {
            let mut out = grown;
            out.closed = true;
            out.history = history;
            return Ok(out);
        }
        current = grown;
    }
    Err(Error::Tolerance { history, tol: rel_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::algebra::{rotation, translation};

    #[test]
    fn two_rotations_generate_so3() {
        let a = rotation(3, 0, 1);
        let b = rotation(3, 0, 2);
        let h = lie_closure(&[a, b], 1e-8).unwrap();
        assert_eq!(h.dim(), 3);
        assert!(h.closed);
        assert!(h.gram_residual() < 1e-12);
        assert!(h.bracket_residual() < 1e-12);
    }

    #[test]
    fn single_element_is_closed() {
        let h = lie_closure(&[rotation(2, 0, 1) * 3.0], 1e-8).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.history, vec![1, 1]);
    }

    #[test]
    fn empty_input_gives_zero_algebra() {
        assert_eq!(lie_closure(&[], 1e-8).unwrap().dim(), 0);
    }

    #[test]
    fn rank_ignores_tiny_components() {
        let a = translation(3, 0);
        let b = &a + translation(3, 1) * 1e-12;
        assert_eq!(span(&[a.clone(), b], 1e-8).dim(), 1);
        assert_eq!(span(&[a.clone(), &a + translation(3, 1) * 1e-3], 1e-8).dim(), 2);
    }

    #[test]
    fn chunked_span_matches_direct() {
        let mut many = Vec::new();
        for k in 0..200 {
            let t = k as f64 * 0.37;
            many.push(rotation(3, 0, 1) * t.sin() + translation(3, 2) * t.cos());
        }
        let s = span(&many, 1e-8);
        assert_eq!(s.dim(), 2);
        assert!(s.containment_residual(&rotation(3, 0, 1)) < 1e-12);
    }
}
