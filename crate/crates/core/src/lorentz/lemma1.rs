//! Closed-form connection and curvature of `g̃` in the isotropic frame,
//! assembled from the derivatives of `f`, `F = dA` and the forms of `M`.
//!
//! Nothing here calls the structure-equation solver; `M`'s own forms come
//! from its Christoffel symbols.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::scenario::LorentzSpace;
use crate::error::{Error, Result};
use crate::geometry::frame::{frame_forms_via_christoffel, FrameField, FrameForms};
use crate::scalar::{cst, jacobian, Dual, Dual64, Mat, Real};

/// Scalar ingredients at one point. Frame indices of `M` run over `0..n`;
/// `fa` is indexed by the frame of `N` (`0`, `1..=n`, `n+1`).
#[derive(Clone, Debug)]
pub struct Lemma1Data {
    pub n: usize,
    pub epsilon: f64,
    pub fa: Vec<f64>,
    pub f00: f64,
    /// `f_{0i} = ẽ_i(f_0)`
    pub f0i: Vec<f64>,
    /// `∇̃_0 f_i = ∂_ξ f_i`
    pub nabla0_fi: Vec<f64>,
    /// `[k][i]`: `∇̃_k f_i`
    pub nablak_fi: DMatrix<f64>,
    /// `F_{ij}`
    pub f_frame: DMatrix<f64>,
    /// `[k][i][j]` flattened: `∇_k F_{ij}`
    pub nabla_f: Vec<f64>,
    pub conn_m: Vec<DMatrix<f64>>,
    pub curv_m: Vec<DMatrix<f64>>,
}

impl Lemma1Data {
    pub fn nabla_f(&self, k: usize, i: usize, j: usize) -> f64 {
        self.nabla_f[(k * self.n + i) * self.n + j]
    }
}

/// ω̃ and Ω̃ in the isotropic frame, same layout as [`FrameForms`].
#[derive(Clone, Debug)]
pub struct Lemma1Forms {
    pub dim: usize,
    pub connection: Vec<DMatrix<f64>>,
    pub curvature: Vec<DMatrix<f64>>,
    pub data: Lemma1Data,
}

impl Lemma1Forms {
    pub fn connection(&self, g: usize) -> &DMatrix<f64> {
        &self.connection[g]
    }

    pub fn curvature(&self, g: usize, d: usize) -> &DMatrix<f64> {
        &self.curvature[g * self.dim + d]
    }

    pub fn algebra_residual(&self, j: &DMatrix<f64>) -> f64 {
        self.connection
            .iter()
            .chain(&self.curvature)
            .map(|m| (m.transpose() * j + j * m).amax())
            .fold(0.0, f64::max)
    }
}

/// The six displayed families, plus the entries forced to vanish.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyResiduals {
    pub omega_00: f64,
    pub omega_0i: f64,
    pub omega_ij: f64,
    pub curv_00: f64,
    pub curv_0i: f64,
    pub curv_ij: f64,
    pub zeros: f64,
}

impl FamilyResiduals {
    pub fn max(&self) -> f64 {
        self.as_array().into_iter().map(|(_, v)| v).fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [(&'static str, f64); 7] {
        [
            ("omega_00", self.omega_00),
            ("omega_0i", self.omega_0i),
            ("omega_ij", self.omega_ij),
            ("curvature_00", self.curv_00),
            ("curvature_0i", self.curv_0i),
            ("curvature_ij", self.curv_ij),
            ("forced_zeros", self.zeros),
        ]
    }

    pub fn merge(&mut self, o: &FamilyResiduals) {
        self.omega_00 = self.omega_00.max(o.omega_00);
        self.omega_0i = self.omega_0i.max(o.omega_0i);
        self.omega_ij = self.omega_ij.max(o.omega_ij);
        self.curv_00 = self.curv_00.max(o.curv_00);
        self.curv_0i = self.curv_0i.max(o.curv_0i);
        self.curv_ij = self.curv_ij.max(o.curv_ij);
        self.zeros = self.zeros.max(o.zeros);
    }
}

impl LorentzSpace {
    /// Frame vectors of `M` at `q`, columns.
    fn m_frame<D: Real>(&self, q: &[D]) -> Result<Mat<D>> {
        FrameField::coframe(self.base(), q).inverse().ok_or_else(|| Error::DegenerateFrame {
            point: q.iter().map(|x| x.re()).collect(),
            residual: f64::INFINITY,
        })
    }

    /// `f_α = ẽ_α(f)` with `ẽ_0 = ∂_ξ`, `ẽ_k = e_k - 2εA_k ∂_ξ`,
    /// `ẽ_{n+1} = ∂_η - εf ∂_ξ`.
    fn tilde_derivatives<D: Real>(&self, p: &[D]) -> Vec<D> {
        let n = self.n();
        let eps = self.epsilon();
        let (fv, df) = jacobian(p, |y: &[Dual<D>]| vec![self.f(y)]);
        let e = match self.m_frame(&p[2..]) {
            Ok(e) => e,
            Err(_) => return vec![cst(f64::NAN); n + 2],
        };
        let a = self.a(p);
        let fx = df[0][0];
        let mut out = Vec::with_capacity(n + 2);
        out.push(fx);
        for k in 0..n {
            let mut ak = cst::<D>(0.0);
            let mut ek = cst::<D>(0.0);
            for b in 0..n {
                ak += a[b] * e[(b, k)];
                ek += df[b + 2][0] * e[(b, k)];
            }
            out.push(ek - ak * fx * (2.0 * eps));
        }
        out.push(df[1][0] - fv[0] * fx * eps);
        out
    }

    /// `F_{ij} = dA(e_i, e_j)` on `M`, row-major.
    fn frame_curvature_of_a<D: Real>(&self, q: &[D]) -> Vec<D> {
        let n = self.n();
        let (_, da) = jacobian(q, |y: &[Dual<D>]| self.base().potential(y));
        let e = match self.m_frame(q) {
            Ok(e) => e,
            Err(_) => return vec![cst(f64::NAN); n * n],
        };
        let mut out = vec![cst::<D>(0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = cst::<D>(0.0);
                for a in 0..n {
                    for b in 0..n {
                        acc += (da[a][b] - da[b][a]) * e[(a, i)] * e[(b, j)];
                    }
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    /// Ingredients of the closed form at `p`.
    pub fn lemma1_data(&self, p: &[f64]) -> Result<Lemma1Data> {
        self.chart().check(p)?;
        let n = self.n();
        let d = n + 2;
        let eps = self.epsilon();
        let q = &p[2..];
        let (conn_m, curv_m) = frame_forms_via_christoffel(self.base(), self.base(), q)?;

        let (fa, dfa) = jacobian(p, |x: &[Dual64]| self.tilde_derivatives(x));
        if fa.iter().any(|v| !v.is_finite()) {
            return Err(Error::DerivativeUnavailable(format!("frame of M degenerate at {q:?}")));
        }
        let e = self.m_frame(q)?.re();
        let a = self.a(p);
        let f = self.f(p);
        let a_frame: Vec<f64> = (0..n).map(|k| (0..n).map(|b| a[b] * e[(b, k)]).sum()).collect();
        // ẽ_β(u) from coordinate partials du[c]
        let along = |beta: usize, du: &dyn Fn(usize) -> f64| -> f64 {
            if beta == 0 {
                du(0)
            } else if beta == d - 1 {
                du(1) - eps * f * du(0)
            } else {
                let k = beta - 1;
                (0..n).map(|b| e[(b, k)] * du(b + 2)).sum::<f64>() - 2.0 * eps * a_frame[k] * du(0)
            }
        };
        let dtilde = |beta: usize, alpha: usize| along(beta, &|c| dfa[c][alpha]);

        let (fm, dfm) = if self.spec().type_tag >= 3 {
            let (v, dv) = jacobian(q, |y: &[Dual64]| self.frame_curvature_of_a(y));
            (v, dv)
        } else {
            (vec![0.0; n * n], vec![vec![0.0; n * n]; n])
        };
        let f_frame = DMatrix::from_row_slice(n, n, &fm);
        // e_k(F_ij)
        let ek_f = |k: usize, idx: usize| -> f64 { (0..n).map(|b| e[(b, k)] * dfm[b][idx]).sum() };
        let mut nabla_f = vec![0.0; n * n * n];
        for k in 0..n {
            let w = &conn_m[k];
            for i in 0..n {
                for j in 0..n {
                    let mut v = ek_f(k, i * n + j);
                    for l in 0..n {
                        v -= f_frame[(l, j)] * w[(l, i)] + f_frame[(i, l)] * w[(l, j)];
                    }
                    nabla_f[(k * n + i) * n + j] = v;
                }
            }
        }

        let f00 = dtilde(0, 0);
        let f0i: Vec<f64> = (1..=n).map(|i| dtilde(i, 0)).collect();
        let nabla0_fi: Vec<f64> = (1..=n).map(|i| dtilde(0, i)).collect();
        let nablak_fi = DMatrix::from_fn(n, n, |k, i| {
            let mut v = dtilde(k + 1, i + 1) - eps * f_frame[(i, k)] * fa[0];
            for j in 0..n {
                v -= fa[j + 1] * conn_m[k][(j, i)];
            }
            v
        });
        Ok(Lemma1Data {
            n,
            epsilon: eps,
            fa,
            f00,
            f0i,
            nabla0_fi,
            nablak_fi,
            f_frame,
            nabla_f,
            conn_m,
            curv_m,
        })
    }

    /// ω̃, Ω̃ from the closed-form expressions.
    pub fn lemma1_forms(&self, p: &[f64]) -> Result<Lemma1Forms> {
        let data = self.lemma1_data(p)?;
        let n = data.n;
        let d = n + 2;
        let top = d - 1;
        let eps = data.epsilon;
        let ff = &data.f_frame;

        let mut connection = vec![DMatrix::zeros(d, d); d];
        // ω̃⁰₀ = εf₀ ẽ^{n+1}
        connection[top][(0, 0)] = eps * data.fa[0];
        for i in 0..n {
            // ω̃⁰_i = εf_i ẽ^{n+1} + εF_ij ẽ^j
            connection[top][(0, i + 1)] = eps * data.fa[i + 1];
            for j in 0..n {
                connection[j + 1][(0, i + 1)] = eps * ff[(i, j)];
                // ω̃^i_j = ω^i_j - εF_ij ẽ^{n+1}
                connection[top][(i + 1, j + 1)] = -eps * ff[(i, j)];
                for k in 0..n {
                    connection[k + 1][(i + 1, j + 1)] = data.conn_m[k][(i, j)];
                }
            }
        }
        for m in connection.iter_mut() {
            complete_algebra(m);
        }

        let mut curvature = vec![DMatrix::zeros(d, d); d * d];
        // adds c·(ẽ^a∧ẽ^b) to entry (r, s)
        let mut put = |r: usize, s: usize, a: usize, b: usize, c: f64| {
            curvature[a * d + b][(r, s)] += c;
            curvature[b * d + a][(r, s)] -= c;
        };
        put(0, 0, 0, top, eps * data.f00);
        for i in 0..n {
            put(0, 0, i + 1, top, eps * data.f0i[i]);
            put(0, i + 1, 0, top, eps * data.nabla0_fi[i]);
            for k in 0..n {
                let ff2: f64 = (0..n).map(|j| ff[(i, j)] * ff[(j, k)]).sum();
                put(0, i + 1, k + 1, top, eps * data.nablak_fi[(k, i)] + eps * eps * ff2);
                for j in 0..n {
                    put(0, i + 1, k + 1, j + 1, eps * data.nabla_f(k, i, j));
                    put(i + 1, j + 1, k + 1, top, -eps * data.nabla_f(k, i, j));
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                let c = &mut curvature[(k + 1) * d + l + 1];
                for i in 0..n {
                    for j in 0..n {
                        c[(i + 1, j + 1)] += data.curv_m[k * n + l][(i, j)];
                    }
                }
            }
        }
        for m in curvature.iter_mut() {
            complete_algebra(m);
        }
        Ok(Lemma1Forms {
            dim: d,
            connection,
            curvature,
            data,
        })
    }
}

/// Fill `M^{n+1}_{n+1} = -M^0_0` and `M^i_{n+1} = -M^0_i` from the upper
/// row; the remaining stabilizer entries are zero by construction.
fn complete_algebra(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    let top = d - 1;
    m[(top, top)] = -m[(0, 0)];
    for i in 1..top {
        m[(i, top)] = -m[(0, i)];
    }
}

/// Per-family `max |closed form - solver|` over all frame arguments.
pub fn compare_forms(closed: &Lemma1Forms, solved: &FrameForms) -> FamilyResiduals {
    let d = closed.dim;
    let top = d - 1;
    let mut r = FamilyResiduals::default();
    let upd = |slot: &mut f64, a: f64, b: f64| *slot = slot.max((a - b).abs());
    let visit = |x: &DMatrix<f64>, y: &DMatrix<f64>, conn: bool, r: &mut FamilyResiduals| {
        let inner = |k: usize| k > 0 && k < top;
        for row in 0..d {
            for col in 0..d {
                let (a, b) = (x[(row, col)], y[(row, col)]);
                let diag = (row == 0 && col == 0) || (row == top && col == top);
                let mixed = (row == 0 && inner(col)) || (inner(row) && col == top);
                let slot = match (diag, mixed, inner(row) && inner(col), conn) {
                    (true, _, _, true) => &mut r.omega_00,
                    (true, _, _, false) => &mut r.curv_00,
                    (_, true, _, true) => &mut r.omega_0i,
                    (_, true, _, false) => &mut r.curv_0i,
                    (_, _, true, true) => &mut r.omega_ij,
                    (_, _, true, false) => &mut r.curv_ij,
                    _ => &mut r.zeros,
                };
                upd(slot, a, b);
            }
        }
    };
    for g in 0..d {
        visit(closed.connection(g), solved.connection(g), true, &mut r);
        for h in 0..d {
            visit(closed.curvature(g, h), solved.curvature(g, h), false, &mut r);
        }
    }
    r
}
