//! `so(n+1,1)` in the isotropic frame and the splitting
//! `so(n+1,1)_L = A ⊕ K ⊕ N` of the stabilizer of the null line `ℝẽ_0`.
//!
//! Matrix entry `(α, β)` is `ω^α_β`. A stabilizer element reads
//!
//! ```text
//!   a   Xᵀ   0
//!   0   A   -X
//!   0   0   -a
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::factor::Block;
use crate::lorentz::scenario::isotropic_j;

/// `max |Mᵀ J + J M|`.
pub fn algebra_residual(m: &DMatrix<f64>) -> f64 {
    let j = isotropic_j(m.nrows() - 2);
    (m.transpose() * &j + &j * m).amax()
}

/// Entries that must vanish for `m` to fix the null line.
pub fn stabilizer_residual(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    let top = d - 1;
    let mut r = m[(top, 0)].abs();
    for i in 1..top {
        r = r.max(m[(i, 0)].abs()).max(m[(top, i)].abs());
    }
    r
}

pub fn bracket(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

/// Trace pairing `tr(XᵀY)`.
pub fn pairing(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.component_mul(y).sum()
}

/// `(a, A, X)` coordinates of a stabilizer element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposed {
    pub a: f64,
    pub rot: DMatrix<f64>,
    pub x: DVector<f64>,
}

impl Decomposed {
    pub fn zero(n: usize) -> Self {
        Decomposed {
            a: 0.0,
            rot: DMatrix::zeros(n, n),
            x: DVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = n + 2;
        let mut m = DMatrix::zeros(d, d);
        m[(0, 0)] = self.a;
        m[(d - 1, d - 1)] = -self.a;
        for i in 0..n {
            m[(0, i + 1)] = self.x[i];
            m[(i + 1, d - 1)] = -self.x[i];
            for j in 0..n {
                m[(i + 1, j + 1)] = self.rot[(i, j)];
            }
        }
        m
    }
}

/// Read off `(a, A, X)` without any checks.
pub fn project(m: &DMatrix<f64>) -> Decomposed {
    let d = m.nrows();
    let n = d - 2;
    Decomposed {
        a: m[(0, 0)],
        rot: m.view((1, 1), (n, n)).into_owned(),
        x: DVector::from_fn(n, |i, _| m[(0, i + 1)]),
    }
}

/// Strict decomposition; `m` must lie in `so(n+1,1)_L` up to `tol`.
pub fn decompose(m: &DMatrix<f64>, tol: f64) -> Result<Decomposed> {
    let residual = stabilizer_residual(m).max(algebra_residual(m));
    if !(residual <= tol * m.amax().max(1.0)) {
        return Err(Error::NotInStabilizer { residual });
    }
    Ok(project(m))
}

pub fn pr_a(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = project(m);
    Decomposed {
        a: d.a,
        ..Decomposed::zero(d.n())
    }
    .assemble()
}

pub fn pr_k(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = project(m);
    Decomposed {
        rot: d.rot,
        ..Decomposed::zero(d.x.len())
    }
    .assemble()
}

pub fn pr_n(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = project(m);
    Decomposed {
        x: d.x.clone(),
        ..Decomposed::zero(d.n())
    }
    .assemble()
}

/// Coefficient of `Φ̂` of a Kähler block in the rotation part `rot`:
/// `tr(Ĵᵀ A_block) / tr(ĴᵀĴ)`.
pub fn center_component(rot: &DMatrix<f64>, block: &Block) -> f64 {
    let j = block.hat_matrix().expect("center projection needs a Kähler block");
    let r = &block.range;
    let sub = rot.view((r.start, r.start), (r.len(), r.len()));
    j.zip_map(&sub.into_owned(), |a, b| a * b).sum() / j.norm_squared()
}

/// `E_{ij} - E_{ji}` inside the rotation block of `so(n+1,1)`.
pub fn rotation(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut d = Decomposed::zero(n);
    d.rot[(i, j)] = 1.0;
    d.rot[(j, i)] = -1.0;
    d.assemble()
}

pub fn translation(n: usize, i: usize) -> DMatrix<f64> {
    let mut d = Decomposed::zero(n);
    d.x[i] = 1.0;
    d.assemble()
}

pub fn boost(n: usize) -> DMatrix<f64> {
    Decomposed {
        a: 1.0,
        ..Decomposed::zero(n)
    }
    .assemble()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> DMatrix<f64> {
        let mut d = Decomposed::zero(n);
        d.a = 0.3;
        d.x = DVector::from_fn(n, |i, _| i as f64 - 0.5);
        for i in 0..n {
            for j in 0..i {
                d.rot[(i, j)] = (i * j) as f64 * 0.1 + 0.2;
                d.rot[(j, i)] = -d.rot[(i, j)];
            }
        }
        d.assemble()
    }

    #[test]
    fn assembled_elements_lie_in_the_algebra() {
        let m = sample(4);
        assert_eq!(algebra_residual(&m), 0.0);
        assert_eq!(stabilizer_residual(&m), 0.0);
        assert_eq!(decompose(&m, 1e-12).unwrap().assemble(), m);
    }

    #[test]
    fn projections_sum_back() {
        let m = sample(3);
        assert_eq!(pr_a(&m) + pr_k(&m) + pr_n(&m), m);
        let b = boost(3);
        assert_eq!(pr_a(&b), b);
        assert_eq!(pr_k(&b).amax(), 0.0);
        assert_eq!(pr_n(&b).amax(), 0.0);
    }

    #[test]
    fn translations_commute() {
        assert_eq!(bracket(&translation(4, 0), &translation(4, 2)).amax(), 0.0);
    }

    #[test]
    fn boost_scales_translations() {
        let b = bracket(&boost(2), &translation(2, 1));
        assert_eq!(b, translation(2, 1));
    }

    #[test]
    fn non_stabilizer_element_is_rejected() {
        let mut m = DMatrix::zeros(4, 4);
        m[(1, 0)] = 1.0;
        m[(3, 1)] = -1.0;
        assert!(algebra_residual(&m) < 1e-15);
        assert!(matches!(decompose(&m, 1e-10), Err(Error::NotInStabilizer { .. })));
    }
}
