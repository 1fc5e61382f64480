//! Holonomy algebras of the Lorentzian scenarios.

pub mod algebra;
pub mod classify;
pub mod closure;
pub mod generators;
pub mod groups;
pub mod loops;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use algebra::{bracket, center_component, decompose, pr_a, pr_k, pr_n, project, Decomposed};
pub use classify::{classify, ClassifyOptions, FitReport, HolonomyTemplate};
pub use closure::{lie_closure, span, Subalgebra};
pub use generators::{ambrose_singer_generators, Harvest};
pub use groups::{exp_check, GroupCheck};
pub use loops::{lasso_family, loop_holonomy, matrix_log, Lasso, LoopHolonomy};

use crate::error::Result;
use crate::lorentz::factor::Factor;
use crate::lorentz::scenario::{build_scenario, LorentzScenario, LorentzSpace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolonomyOptions {
    pub points: usize,
    pub rank_tol: f64,
    /// Seeds tried (the configured one first) before giving up on a deficit.
    pub attempts: u64,
    pub classify: ClassifyOptions,
}

impl Default for HolonomyOptions {
    fn default() -> Self {
        HolonomyOptions {
            points: 20,
            rank_tol: 1e-8,
            attempts: 5,
            classify: ClassifyOptions::default(),
        }
    }
}

/// `dim h` for the constructed `M`: the product of the factors' holonomies,
/// with each `su(m)` enlarged to `u(m)` once `F` feeds the center.
pub fn expected_h_dim(space: &LorentzSpace) -> usize {
    space
        .base()
        .factors()
        .iter()
        .map(|f| match f {
            Factor::Flat { .. } => 0,
            Factor::Torus { u } => usize::from(!u.is_zero()),
            Factor::Calabi { space: c, .. } => {
                let m = c.m();
                if space.type_tag() >= 3 {
                    m * m
                } else {
                    m * m - 1
                }
            }
        })
        .sum()
}

pub fn expected_dim(space: &LorentzSpace) -> usize {
    let n = space.n();
    let m = n - space.base().flat_coords().len();
    HolonomyTemplate::expected_dim(space.type_tag(), n, m, expected_h_dim(space))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolonomyRun {
    pub seed_used: u64,
    /// `(seed, closure dimension)` per attempt.
    pub attempts: Vec<(u64, usize)>,
    pub expected_dim: usize,
    pub span_dim: usize,
    pub algebra: Subalgebra,
    pub generators: usize,
    pub skipped: usize,
    pub algebra_residual: f64,
    pub template: Option<HolonomyTemplate>,
    pub classify_error: Option<String>,
}

/// Sample points of `space` drawn from its seed.
pub fn sample_points(space: &LorentzSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count).map(|_| space.chart().sample(&mut rng)).collect()
}

/// Harvest, close and classify, reseeding `f` on a dimension deficit.
pub fn scenario_holonomy(spec: &LorentzScenario, opts: &HolonomyOptions) -> Result<(LorentzSpace, HolonomyRun)> {
    let mut attempts = Vec::new();
    let mut best: Option<(LorentzSpace, Harvest, Subalgebra, usize, u64)> = None;
    for k in 0..opts.attempts.max(1) {
        let seed = spec.seed + k;
        let space = build_scenario(&spec.with_seed(seed))?;
        let points = sample_points(&space, opts.points, seed);
        let harvest = ambrose_singer_generators(&space, &points)?;
        let span_dim = span(&harvest.elements, opts.rank_tol).dim();
        let alg = lie_closure(&harvest.elements, opts.rank_tol)?;
        let want = expected_dim(&space);
        attempts.push((seed, alg.dim()));
        let done = alg.dim() >= want;
        if done || best.is_none() {
            best = Some((space, harvest, alg, span_dim, seed));
        }
        if done {
            break;
        }
        log::warn!("seed {seed}: holonomy dimension {} below template {want}, reseeding", attempts[k as usize].1);
    }
    let (space, harvest, algebra, span_dim, seed_used) = best.expect("at least one attempt");
    let (template, classify_error) = match classify(&algebra, &space.split(), &opts.classify) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let run = HolonomyRun {
        seed_used,
        attempts,
        expected_dim: expected_dim(&space),
        span_dim,
        generators: harvest.elements.len(),
        skipped: harvest.skipped.len(),
        algebra_residual: harvest.algebra_residual,
        algebra,
        template,
        classify_error,
    };
    Ok((space, run))
}
