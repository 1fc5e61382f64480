//! Scenarios `(N = M × ℝ², g̃)` with
//! `g̃ = 2dη(dξ + εf dη + 2εA) + g` and the isotropic coframe
//! `ẽ⁰ = dξ + εf dη + 2εA`, `ẽ^i = e^i`, `ẽ^{n+1} = dη`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factor::{BlockSplit, Factor, FactorSpec, ProductManifold};
use super::functions::{Bump, Profile, TrigPoly};
use crate::error::{Error, Result};
use crate::geometry::chart::{Chart, Coordinate};
use crate::geometry::frame::FrameField;
use crate::geometry::metric::{Signature, SmoothMetric};
use crate::scalar::{cst, Mat, Real};

/// The isotropic Gram matrix: `J_{0,n+1} = J_{n+1,0} = 1`, identity on `1..=n`.
pub fn isotropic_j(n: usize) -> DMatrix<f64> {
    let d = n + 2;
    let mut j = DMatrix::zeros(d, d);
    j[(0, d - 1)] = 1.0;
    j[(d - 1, 0)] = 1.0;
    for i in 1..=n {
        j[(i, i)] = 1.0;
    }
    j
}

/// `(ξ, η)` box and the bump radius used for Type 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaneSpec {
    pub half_width: f64,
    pub bump_radius: f64,
}

impl Default for PlaneSpec {
    fn default() -> Self {
        PlaneSpec {
            half_width: 2.0,
            bump_radius: 3.5,
        }
    }
}

/// Shape of the seeded trigonometric polynomial behind `f` (or `h`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenericSpec {
    pub degree: i32,
    pub terms: usize,
    pub amplitude: f64,
}

impl Default for GenericSpec {
    fn default() -> Self {
        GenericSpec {
            degree: 2,
            terms: 6,
            amplitude: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzScenario {
    pub type_tag: u8,
    pub factors: Vec<FactorSpec>,
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    /// One coefficient per Calabi factor (Type 3).
    #[serde(default)]
    pub phi: Vec<f64>,
    /// `psi[i][k]`: Calabi factor `i`, flat coordinate `t_{k+1}` (Type 4).
    #[serde(default)]
    pub psi: Vec<Vec<f64>>,
    #[serde(default)]
    pub plane: PlaneSpec,
    #[serde(default)]
    pub generic: GenericSpec,
}

impl LorentzScenario {
    /// Type 1 on the flat torus, `f` a bump in `(ξ, η)` times a seeded
    /// polynomial in all coordinates, `A = 0`.
    pub fn desk_type1() -> Self {
        LorentzScenario {
            type_tag: 1,
            factors: vec![FactorSpec::Torus {
                conformal_amplitude: 0.0,
            }],
            epsilon: 0.1,
            seed: 1,
            phi: vec![],
            psi: vec![],
            plane: PlaneSpec::default(),
            generic: GenericSpec::default(),
        }
    }

    /// Type 2 on a conformally flat torus, `f = h(x, y)`.
    pub fn desk_type2() -> Self {
        LorentzScenario {
            type_tag: 2,
            factors: vec![FactorSpec::Torus {
                conformal_amplitude: 0.3,
            }],
            ..Self::desk_type1()
        }
    }

    /// Type 3 on `C₂`.
    pub fn desk_type3() -> Self {
        LorentzScenario {
            type_tag: 3,
            factors: vec![FactorSpec::Calabi {
                m: 2,
                profile: Profile::Inverse { amp: 1.0, shift: 1.0 },
                rho: (1.2, 3.0),
                base: 1.5,
            }],
            phi: vec![0.7],
            generic: GenericSpec {
                amplitude: 0.3,
                ..GenericSpec::default()
            },
            ..Self::desk_type1()
        }
    }

    /// Type 4 on `ℝ × C₂`.
    pub fn desk_type4() -> Self {
        LorentzScenario {
            type_tag: 4,
            factors: vec![
                FactorSpec::Flat {
                    dim: 1,
                    half_width: 1.5,
                },
                FactorSpec::Calabi {
                    m: 2,
                    profile: Profile::Inverse { amp: 1.0, shift: 1.0 },
                    rho: (1.2, 3.0),
                    base: 1.5,
                },
            ],
            phi: vec![],
            psi: vec![vec![0.8]],
            ..Self::desk_type3()
        }
    }

    pub fn desk(type_tag: u8) -> Result<Self> {
        match type_tag {
            1 => Ok(Self::desk_type1()),
            2 => Ok(Self::desk_type2()),
            3 => Ok(Self::desk_type3()),
            4 => Ok(Self::desk_type4()),
            t => Err(spec(format!("type_tag in 1..=4 (got {t})"))),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        LorentzScenario { seed, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        LorentzScenario {
            epsilon,
            ..self.clone()
        }
    }
}

fn spec(clause: impl Into<String>) -> Error {
    Error::Spec { clause: clause.into() }
}

/// `f` as assembled from a scenario. Coordinate indices refer to points of `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum FShape {
    /// `bump(ξ, η) · h`
    Bumped { bump: Bump, h: TrigPoly },
    /// `h - ξ Σ φ_i G_i(ρ_i)`
    Type3 { h: TrigPoly, terms: Vec<CenterTerm> },
    /// `h - Σ_i Σ_k ψ_i^k t_k G_i(ρ_i)`
    Type4 {
        h: TrigPoly,
        t: Vec<usize>,
        terms: Vec<CenterTerm>,
        psi: Vec<Vec<f64>>,
    },
    /// `h` alone
    Plain { h: TrigPoly },
}

/// `coef · G(ρ)` with `G = ρg'/(2m) + g`; `rho` indexes `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterTerm {
    pub rho: usize,
    pub m: usize,
    pub coef: f64,
    pub profile: Profile,
}

impl CenterTerm {
    fn eval<D: Real>(&self, p: &[D]) -> D {
        self.profile.center(p[self.rho], self.m) * self.coef
    }
}

impl FShape {
    pub fn eval<D: Real>(&self, p: &[D]) -> D {
        match self {
            FShape::Bumped { bump, h } => bump.eval(p[0], p[1]) * h.eval(p),
            FShape::Plain { h } => h.eval(p),
            FShape::Type3 { h, terms } => {
                let mut s = cst::<D>(0.0);
                for t in terms {
                    s += t.eval(p);
                }
                h.eval(p) - p[0] * s
            }
            FShape::Type4 { h, t, terms, psi } => {
                let mut s = h.eval(p);
                for (i, term) in terms.iter().enumerate() {
                    let g = term.eval(p);
                    for (k, &tk) in t.iter().enumerate() {
                        s -= p[tk] * g * psi[i][k];
                    }
                }
                s
            }
        }
    }

    pub fn h(&self) -> &TrigPoly {
        match self {
            FShape::Bumped { h, .. } | FShape::Plain { h } | FShape::Type3 { h, .. } | FShape::Type4 { h, .. } => h,
        }
    }
}

/// A built scenario: the metric `g̃` and its isotropic coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzSpace {
    spec: LorentzScenario,
    base: ProductManifold,
    f: FShape,
    with_potential: bool,
    chart: Chart,
}

/// Validate the scenario and assemble `g̃`.
pub fn build_scenario(spec: &LorentzScenario) -> Result<LorentzSpace> {
    LorentzSpace::new(spec)
}

impl LorentzSpace {
    pub fn new(spec: &LorentzScenario) -> Result<Self> {
        if !(1..=4).contains(&spec.type_tag) {
            return Err(self::spec(format!("type_tag in 1..=4 (got {})", spec.type_tag)));
        }
        if !(spec.epsilon > 0.0 && spec.epsilon.is_finite()) {
            return Err(self::spec("epsilon > 0"));
        }
        if spec.factors.is_empty() {
            return Err(self::spec("M needs at least one factor"));
        }
        if !(spec.plane.half_width > 0.0) {
            return Err(self::spec("plane.half_width > 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let factors = spec
            .factors
            .iter()
            .map(|f| Factor::from_spec(f, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let base = ProductManifold::new(factors);
        let n = base.dim();

        let hw = spec.plane.half_width;
        let plane = Chart::new(vec![Coordinate::new("xi", -hw, hw), Coordinate::new("eta", -hw, hw)]);
        let chart = plane.product(base.chart());

        let shift = |v: Vec<(usize, f64)>| v.into_iter().map(|(i, w)| (i + 2, w)).collect::<Vec<_>>();
        let g = spec.generic;
        let calabi = base.calabi_factors();
        let terms = |coefs: &[f64]| -> Vec<CenterTerm> {
            calabi
                .iter()
                .zip(coefs)
                .map(|(&(rho, m, profile), &coef)| CenterTerm {
                    rho: rho + 2,
                    m,
                    coef,
                    profile: profile.clone(),
                })
                .collect()
        };

        let f = match spec.type_tag {
            1 => {
                if !(spec.plane.bump_radius > 0.0) {
                    return Err(self::spec("plane.bump_radius > 0"));
                }
                let mut vars = vec![(0, 1.0), (1, 1.0)];
                vars.extend(shift(base.h_vars(false)));
                let h = TrigPoly::random(&mut rng, vars, g.degree, g.terms, g.amplitude);
                if !(h.depends_on(0)) {
                    return Err(self::spec("Type 1: f must depend on xi"));
                }
                FShape::Bumped {
                    bump: Bump {
                        radius: spec.plane.bump_radius,
                    },
                    h,
                }
            }
            2 => FShape::Plain {
                h: TrigPoly::random(&mut rng, shift(base.h_vars(false)), g.degree, g.terms, g.amplitude),
            },
            3 => {
                if calabi.is_empty() {
                    return Err(self::spec("Type 3: at least one Calabi factor"));
                }
                if spec.phi.len() != calabi.len() {
                    return Err(self::spec(format!(
                        "Type 3: one phi per Calabi factor ({} given, {} factors)",
                        spec.phi.len(),
                        calabi.len()
                    )));
                }
                if spec.phi.iter().all(|&x| x == 0.0) {
                    return Err(self::spec("Type 3: phi != 0"));
                }
                check_centers(&base)?;
                FShape::Type3 {
                    h: TrigPoly::random(&mut rng, shift(base.h_vars(false)), g.degree, g.terms, g.amplitude),
                    terms: terms(&spec.phi),
                }
            }
            _ => {
                let t: Vec<usize> = base.flat_coords();
                let m = n - t.len();
                if t.is_empty() || m == 0 {
                    return Err(self::spec(format!("Type 4: 0 < m < n (m = {m}, n = {n})")));
                }
                if calabi.is_empty() {
                    return Err(self::spec("Type 4: at least one Calabi factor"));
                }
                if spec.psi.len() != calabi.len() || spec.psi.iter().any(|r| r.len() != t.len()) {
                    return Err(self::spec(format!(
                        "Type 4: psi is r x (n - m) = {} x {}",
                        calabi.len(),
                        t.len()
                    )));
                }
                let psi = DMatrix::from_fn(calabi.len(), t.len(), |i, k| spec.psi[i][k]);
                let rank = psi.rank(1e-12);
                if rank != t.len() {
                    return Err(self::spec(format!(
                        "Type 4: psi of maximal rank onto R^(n-m) (rank {rank}, need {})",
                        t.len()
                    )));
                }
                check_centers(&base)?;
                FShape::Type4 {
                    h: TrigPoly::random(&mut rng, shift(base.h_vars(true)), g.degree, g.terms, g.amplitude),
                    t: t.iter().map(|k| k + 2).collect(),
                    terms: terms(&vec![1.0; calabi.len()]),
                    psi: spec.psi.clone(),
                }
            }
        };

        Ok(LorentzSpace {
            spec: spec.clone(),
            with_potential: spec.type_tag >= 3,
            base,
            f,
            chart,
        })
    }

    pub fn spec(&self) -> &LorentzScenario {
        &self.spec
    }

    pub fn type_tag(&self) -> u8 {
        self.spec.type_tag
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    /// `n = dim M`.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    pub fn dim(&self) -> usize {
        self.n() + 2
    }

    pub fn base(&self) -> &ProductManifold {
        &self.base
    }

    pub fn f_shape(&self) -> &FShape {
        &self.f
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn split(&self) -> BlockSplit {
        self.base.split()
    }

    pub fn j(&self) -> DMatrix<f64> {
        isotropic_j(self.n())
    }

    pub fn f<D: Real>(&self, p: &[D]) -> D {
        self.f.eval(p)
    }

    /// `A` as a 1-form on `M` (length `n`).
    pub fn a<D: Real>(&self, p: &[D]) -> Vec<D> {
        if self.with_potential {
            self.base.potential(&p[2..])
        } else {
            vec![cst(0.0); self.n()]
        }
    }

    /// `g̃` with `ε` replaced, the same `f` and `A`.
    pub fn metric_at_epsilon<D: Real>(&self, p: &[D], epsilon: f64) -> Mat<D> {
        let d = self.dim();
        let g = self.base.components(&p[2..]);
        let f = self.f(p);
        let a = self.a(p);
        let mut out = Mat::zeros(d, d);
        out[(0, 1)] = D::one();
        out[(1, 0)] = D::one();
        out[(1, 1)] = f * (2.0 * epsilon);
        for i in 0..self.n() {
            out[(1, i + 2)] = a[i] * (2.0 * epsilon);
            out[(i + 2, 1)] = a[i] * (2.0 * epsilon);
            for j in 0..self.n() {
                out[(i + 2, j + 2)] = g[(i, j)];
            }
        }
        out
    }

    /// `2dηdξ + g`, the `ε = 0` limit.
    pub fn background<D: Real>(&self, p: &[D]) -> Mat<D> {
        self.metric_at_epsilon(p, 0.0)
    }

    /// Rebuild with another seed.
    pub fn reseed(&self, seed: u64) -> Result<Self> {
        Self::new(&self.spec.with_seed(seed))
    }
}

/// `G_i ≢ 0` for every Calabi factor, probed along the chart's ρ range.
fn check_centers(base: &ProductManifold) -> Result<()> {
    for (rho, m, profile) in base.calabi_factors() {
        let c = base.chart().coord(rho);
        let vanishes = (0..=16).all(|k| {
            let r = c.lower + (c.upper - c.lower) * k as f64 / 16.0;
            profile.center(r, m).abs() < 1e-12
        });
        if vanishes {
            return Err(spec(format!(
                "profile of the Calabi factor at coordinate {rho} has G = rho g'/(2m) + g identically zero"
            )));
        }
    }
    Ok(())
}

impl SmoothMetric for LorentzSpace {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn signature(&self) -> Signature {
        Signature::lorentzian(self.dim())
    }

    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        self.metric_at_epsilon(p, self.spec.epsilon)
    }
}

impl FrameField for LorentzSpace {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn gram_target(&self) -> DMatrix<f64> {
        self.j()
    }

    fn coframe<D: Real>(&self, p: &[D]) -> Mat<D> {
        let n = self.n();
        let d = n + 2;
        let eps = self.spec.epsilon;
        let e = FrameField::coframe(&self.base, &p[2..]);
        let a = self.a(p);
        let mut out = Mat::zeros(d, d);
        out[(0, 0)] = D::one();
        out[(0, 1)] = self.f(p) * eps;
        for i in 0..n {
            out[(0, i + 2)] = a[i] * (2.0 * eps);
            for j in 0..n {
                out[(i + 1, j + 2)] = e[(i, j)];
            }
        }
        out[(d - 1, 1)] = D::one();
        out
    }
}
