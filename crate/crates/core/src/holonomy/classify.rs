//! Matching a holonomy algebra against the four templates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::algebra::{center_component, project, stabilizer_residual};
use super::closure::{span_with_floor, Subalgebra};
use crate::error::{Error, Result};
use crate::lorentz::factor::BlockSplit;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Relative rank cutoff for `h`.
    pub rank_tol: f64,
    /// Below this (relative to the basis size) `a` counts as zero.
    pub zero_tol: f64,
    /// Relative least-squares residual accepted for a φ/ψ fit.
    pub fit_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            rank_tol: 1e-8,
            zero_tol: 1e-6,
            fit_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub stabilizer_residual: f64,
    pub max_boost: f64,
    /// Relative residual of `a = φ(z)`; `None` without Kähler blocks.
    pub phi_residual: Option<f64>,
    /// Relative residual of `X_flat = ψ(z)`; `None` without a flat block.
    pub psi_residual: Option<f64>,
    /// Largest rotation-part entry on the flat indices.
    pub flat_rotation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyTemplate {
    pub type_tag: u8,
    pub n: usize,
    pub dim: usize,
    pub dim_h: usize,
    /// Dimension of the ℝᵐ the translation part ranges over (`n` except Type 4).
    pub m: usize,
    pub h_basis: Vec<DMatrix<f64>>,
    /// `φ_i` per Kähler block (Type 3).
    pub phi: Vec<f64>,
    /// `ψ[i][k]`: Kähler block `i`, flat index `k` (Type 4).
    pub psi: Vec<Vec<f64>>,
    pub fit: FitReport,
}

impl HolonomyTemplate {
    /// Parameter count of the template.
    pub fn expected_dim(type_tag: u8, n: usize, m: usize, dim_h: usize) -> usize {
        match type_tag {
            1 => 1 + n + dim_h,
            4 => m + dim_h,
            _ => n + dim_h,
        }
    }
}

/// Least squares `y ≈ Z c`; returns `(c, |y - Zc| / |y|)`.
fn fit(z: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let ny = y.norm();
    if z.ncols() == 0 {
        return (DVector::zeros(0), if ny == 0.0 { 0.0 } else { 1.0 });
    }
    let svd = z.clone().svd(true, true);
    let c = svd.solve(y, 1e-12).unwrap_or_else(|_| DVector::zeros(z.ncols()));
    let r = (y - z * &c).norm();
    (c, if ny == 0.0 { r } else { r / ny })
}

/// Decide which template `hol` fits. `hol` must be closed.
pub fn classify(hol: &Subalgebra, split: &BlockSplit, opts: &ClassifyOptions) -> Result<HolonomyTemplate> {
    if !hol.closed {
        return Err(Error::Unclassified("algebra is not closed".into()));
    }
    let n = split.n;
    let parts: Vec<_> = hol.basis.iter().map(project).collect();
    let stab = hol.basis.iter().map(stabilizer_residual).fold(0.0, f64::max);
    if stab > 1e-8 {
        return Err(Error::NotInStabilizer { residual: stab });
    }
    // the basis is orthonormal, so an absolute floor separates noise
    let rot_span = span_with_floor(&parts.iter().map(|p| p.rot.clone()).collect::<Vec<_>>(), opts.rank_tol, opts.zero_tol);
    let dim_h = rot_span.dim();
    let h_basis = rot_span.basis.clone();

    let kahler: Vec<_> = split.kahler().cloned().collect();
    let flat = split.flat_indices();
    let k = parts.len();
    let z = DMatrix::from_fn(k, kahler.len(), |b, i| center_component(&parts[b].rot, &kahler[i]));
    let a = DVector::from_fn(k, |b, _| parts[b].a);
    let max_boost = a.amax();
    let a_zero = max_boost < opts.zero_tol;
    let flat_rotation = flat
        .iter()
        .flat_map(|&f| parts.iter().map(move |p| p.rot.row(f).amax().max(p.rot.column(f).amax())))
        .fold(0.0, f64::max);

    let (phi, phi_residual) = if kahler.is_empty() || a_zero {
        (DVector::zeros(kahler.len()), None)
    } else {
        let (c, r) = fit(&z, &a);
        (c, Some(r))
    };
    let mut psi = vec![vec![0.0; flat.len()]; kahler.len()];
    let mut psi_residual = None;
    if !flat.is_empty() && !kahler.is_empty() {
        let mut worst: f64 = 0.0;
        for (col, &f) in flat.iter().enumerate() {
            let y = DVector::from_fn(k, |b, _| parts[b].x[f]);
            let (c, r) = fit(&z, &y);
            worst = worst.max(r);
            for i in 0..kahler.len() {
                psi[i][col] = c[i];
            }
        }
        psi_residual = Some(worst);
    }

    let fit_report = FitReport {
        stabilizer_residual: stab,
        max_boost,
        phi_residual,
        psi_residual,
        flat_rotation,
    };
    let dim = hol.dim();
    let psi_norm = psi.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let phi_ok = phi_residual.is_some_and(|r| r < opts.fit_tol) && phi.norm() > 1e-6;
    let psi_ok = psi_residual.is_some_and(|r| r < opts.fit_tol) && psi_norm > 1e-6 && flat_rotation < opts.zero_tol;

    let candidates: Vec<(u8, usize)> = if !a_zero {
        if phi_ok {
            vec![(3, n)]
        } else {
            vec![(1, n)]
        }
    } else if psi_ok {
        vec![(4, n - flat.len())]
    } else {
        vec![(2, n)]
    };
    for (tag, m) in candidates {
        if dim == HolonomyTemplate::expected_dim(tag, n, m, dim_h) {
            return Ok(HolonomyTemplate {
                type_tag: tag,
                n,
                dim,
                dim_h,
                m,
                h_basis,
                phi: if tag == 3 { phi.iter().copied().collect() } else { Vec::new() },
                psi: if tag == 4 { psi } else { Vec::new() },
                fit: fit_report,
            });
        }
    }
    Err(Error::Unclassified(format!(
        "dim {dim}, dim h {dim_h}, n {n}; boost {max_boost:.3e}, phi residual {phi_residual:?}, psi residual {psi_residual:?}, flat rotation {flat_rotation:.3e}"
    )))
}
