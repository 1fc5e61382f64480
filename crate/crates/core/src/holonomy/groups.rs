//! Exponential-map spot checks of the group templates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::algebra::{project, stabilizer_residual};
use crate::lorentz::scenario::isotropic_j;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCheck {
    /// `|WᵀJW - J|`
    pub orthogonality: f64,
    /// Largest entry moving `ẽ_0` off its line.
    pub stabilizer: f64,
    /// `|W_{0,n+1} - (-½|X|²)|` for a pure translation, otherwise `0`.
    pub corner: f64,
}

/// `exp(x)` and its membership residuals in the stabilizer group.
pub fn exp_check(x: &DMatrix<f64>) -> (DMatrix<f64>, GroupCheck) {
    let d = x.nrows();
    let w = x.clone().exp();
    let j = isotropic_j(d - 2);
    let orthogonality = (w.transpose() * &j * &w - &j).amax();
    let parts = project(x);
    let corner = if parts.a == 0.0 && parts.rot.amax() == 0.0 {
        (w[(0, d - 1)] + 0.5 * parts.x.norm_squared()).abs()
    } else {
        0.0
    };
    (
        w.clone(),
        GroupCheck {
            orthogonality,
            stabilizer: stabilizer_residual(&w),
            corner,
        },
    )
}
