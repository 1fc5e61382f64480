//! Curvature endomorphisms and their first brackets with the connection,
//! harvested over sample points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::algebra::bracket;
use crate::error::{Error, Result};
use crate::geometry::frame::{connection_curvature_forms, FrameField};
use crate::geometry::metric::MetricField;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Harvest {
    pub elements: Vec<DMatrix<f64>>,
    pub points_used: usize,
    pub skipped: Vec<SkippedPoint>,
    /// `max |Mᵀ J + J M|` over everything harvested.
    pub algebra_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub point: Vec<f64>,
    pub reason: String,
}

/// `Ω̃(ẽ_α, ẽ_β)` for `α < β` and `[ω̃(ẽ_γ), Ω̃(ẽ_α, ẽ_β)]` at every point.
///
/// Points where the frame degenerates are skipped; more than 10% skipped is
/// an error.
pub fn ambrose_singer_generators<S>(space: &S, points: &[Vec<f64>]) -> Result<Harvest>
where
    S: MetricField + FrameField + ?Sized,
{
    let j = space.gram_target();
    let mut elements = Vec::new();
    let mut skipped = Vec::new();
    let mut residual: f64 = 0.0;
    for p in points {
        let forms = match connection_curvature_forms(space, space, p) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("skipping sample point {p:?}: {e}");
                skipped.push(SkippedPoint {
                    point: p.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        residual = residual.max(forms.algebra_residual(&j));
        let d = forms.dim;
        for a in 0..d {
            for b in a + 1..d {
                let om = forms.curvature(a, b);
                if om.amax() == 0.0 {
                    continue;
                }
                elements.push(om.clone());
                for g in 0..d {
                    let w = forms.connection(g);
                    if w.amax() != 0.0 {
                        elements.push(bracket(w, om));
                    }
                }
            }
        }
    }
    if skipped.len() * 10 > points.len() {
        return Err(Error::TooManySkipped {
            skipped: skipped.len(),
            total: points.len(),
        });
    }
    Ok(Harvest {
        elements,
        points_used: points.len() - skipped.len(),
        skipped,
        algebra_residual: residual,
    })
}
