//! Scalar building blocks for `f` and `A`: seeded trigonometric polynomials,
//! a compactly supported bump and the radial profiles `g_i(ρ_i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{cst, Real};

/// `Σ c · cos(Σ_v k_v ω_v x_v + phase)` over selected coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    /// Coordinate indices (into the point passed to [`TrigPoly::eval`]) and
    /// their base angular frequency.
    pub vars: Vec<(usize, f64)>,
    pub terms: Vec<TrigTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coef: f64,
    pub freq: Vec<i32>,
    pub phase: f64,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly {
            vars: Vec::new(),
            terms: Vec::new(),
        }
    }

    /// `count` terms with integer frequencies in `-degree..=degree` and
    /// coefficients uniform in `[-amplitude, amplitude]`. A constant term
    /// never appears; derivatives of `f` are what matter.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, vars: Vec<(usize, f64)>, degree: i32, count: usize, amplitude: f64) -> Self {
        let mut terms = Vec::with_capacity(count);
        if vars.is_empty() {
            return TrigPoly { vars, terms };
        }
        while terms.len() < count {
            let freq: Vec<i32> = vars.iter().map(|_| rng.random_range(-degree..=degree)).collect();
            if freq.iter().all(|&k| k == 0) {
                continue;
            }
            terms.push(TrigTerm {
                coef: rng.random_range(-amplitude..=amplitude),
                freq,
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            });
        }
        TrigPoly { vars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn eval<D: Real>(&self, p: &[D]) -> D {
        let mut acc = cst::<D>(0.0);
        for t in &self.terms {
            let mut arg = cst::<D>(t.phase);
            for (&(v, w), &k) in self.vars.iter().zip(&t.freq) {
                if k != 0 {
                    arg += p[v] * (w * k as f64);
                }
            }
            acc += arg.cos() * t.coef;
        }
        acc
    }

    /// Does the polynomial depend on coordinate `v`?
    pub fn depends_on(&self, v: usize) -> bool {
        self.vars.iter().enumerate().any(|(slot, &(var, _))| {
            var == v && self.terms.iter().any(|t| t.coef != 0.0 && t.freq[slot] != 0)
        })
    }
}

/// Smooth bump `exp(1 - 1/(1 - r²/R²))` in the plane, zero for `r ≥ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub radius: f64,
}

impl Bump {
    pub fn eval<D: Real>(&self, xi: D, eta: D) -> D {
        let s = (xi * xi + eta * eta) / (self.radius * self.radius);
        if s.re() >= 1.0 {
            return cst(0.0);
        }
        (D::one() - (D::one() - s).recip()).exp()
    }
}

/// Radial profile `g(ρ)` of a Calabi factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `amp / (shift + ρ²)`
    Inverse { amp: f64, shift: f64 },
    /// `Σ c_k ρ^k`
    Polynomial { coeffs: Vec<f64> },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Inverse { amp: 1.0, shift: 1.0 }
    }
}

impl Profile {
    pub fn g<D: Real>(&self, rho: D) -> D {
        match self {
            Profile::Constant { value } => cst(*value),
            Profile::Inverse { amp, shift } => (rho * rho + *shift).recip() * *amp,
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(cst::<D>(0.0), |acc, &c| acc * rho + c),
        }
    }

    pub fn dg<D: Real>(&self, rho: D) -> D {
        match self {
            Profile::Constant { .. } => cst(0.0),
            Profile::Inverse { amp, shift } => {
                let w = rho * rho + *shift;
                -rho * (2.0 * amp) / (w * w)
            }
            Profile::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(cst::<D>(0.0), |acc, (k, &c)| acc * rho + c * k as f64),
        }
    }

    /// `G = ρ g'/(2m) + g`, the coefficient of Φ̂ in the center part of `dA`.
    pub fn center<D: Real>(&self, rho: D, m: usize) -> D {
        rho * self.dg(rho) / (2.0 * m as f64) + self.g(rho)
    }
}
