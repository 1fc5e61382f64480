use nalgebra::DMatrix;

use super::chart::Chart;
use super::metric::{christoffel, riemann, MetricField};
use crate::error::{Error, Result};
use crate::scalar::{cst, jacobian, Dual, Dual64, Mat, Real};

/// An ordered coframe `θ^0 … θ^{d-1}` whose Gram matrix is a fixed constant.
pub trait FrameField {
    fn chart(&self) -> &Chart;
    /// Identity for orthonormal frames, the isotropic `J` otherwise.
    fn gram_target(&self) -> DMatrix<f64>;
    /// `θ^α_a`: row α, coordinate column a.
    fn coframe<D: Real>(&self, p: &[D]) -> Mat<D>;

    /// Frame vectors as columns, `E^a_β` at row a, column β.
    fn frame(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let theta = self.coframe(p);
        theta.inverse().map(|e| e.re()).ok_or_else(|| Error::DegenerateFrame {
            point: p.to_vec(),
            residual: f64::INFINITY,
        })
    }
}

/// Connection and curvature of a frame at one point, in frame components.
///
/// `connection(γ)[(α, β)] = ω^α_β(E_γ)` and
/// `curvature(γ, δ)[(α, β)] = Ω^α_β(E_γ, E_δ)`.
#[derive(Clone, Debug)]
pub struct FrameForms {
    pub dim: usize,
    pub coframe: DMatrix<f64>,
    pub frame: DMatrix<f64>,
    connection: Vec<DMatrix<f64>>,
    curvature: Vec<DMatrix<f64>>,
    torsion_residual: f64,
}

impl FrameForms {
    pub fn connection(&self, gamma: usize) -> &DMatrix<f64> {
        &self.connection[gamma]
    }

    pub fn curvature(&self, gamma: usize, delta: usize) -> &DMatrix<f64> {
        &self.curvature[gamma * self.dim + delta]
    }

    /// `max |dθ^α + ω^α_β∧θ^β|` over frame components.
    pub fn torsion_residual(&self) -> f64 {
        self.torsion_residual
    }

    /// `max |Mᵀ J + J M|` over all connection and curvature values.
    pub fn algebra_residual(&self, j: &DMatrix<f64>) -> f64 {
        self.connection
            .iter()
            .chain(&self.curvature)
            .map(|m| (m.transpose() * j + j * m).amax())
            .fold(0.0, f64::max)
    }

    /// ω as a coordinate 1-form: `ω^α_β = Σ_γ ω^α_β(E_γ) θ^γ`, returns the
    /// coefficient matrix of `dx^a`.
    pub fn connection_coord(&self, a: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for g in 0..self.dim {
            out += &self.connection[g] * self.coframe[(g, a)];
        }
        out
    }
}

struct Solved<D> {
    theta: Mat<D>,
    frame: Mat<D>,
    /// ω(E_γ) per γ
    omega: Vec<Mat<D>>,
    torsion: f64,
}

/// Solve `dθ = -ω∧θ`, `ωᵀJ + Jω = 0` pointwise. Generic so that ω itself can
/// be differentiated.
fn solve_connection<D: Real, F: FrameField + ?Sized>(
    frame: &F,
    p: &[D],
    j: &Mat<D>,
    jinv: &Mat<D>,
) -> Result<Solved<D>> {
    let n = p.len();
    let (theta_v, dtheta) = jacobian(p, |x: &[Dual<D>]| frame.coframe(x).into_vec());
    let theta = Mat::from_vec(n, n, theta_v);
    let e = theta.inverse().ok_or_else(|| Error::DegenerateFrame {
        point: p.iter().map(|x| x.re()).collect(),
        residual: f64::INFINITY,
    })?;

    // C^α_{βγ} = dθ^α(E_β, E_γ)
    let mut c_up = vec![cst::<D>(0.0); n * n * n];
    for alpha in 0..n {
        let da = Mat::from_fn(n, n, |a, b| dtheta[a][alpha * n + b] - dtheta[b][alpha * n + a]);
        let ce = e.transpose().matmul(&da).matmul(&e);
        for beta in 0..n {
            for gamma in 0..n {
                c_up[(alpha * n + beta) * n + gamma] = ce[(beta, gamma)];
            }
        }
    }
    let cl = |a: usize, b: usize, g: usize| -> D {
        let mut acc = cst::<D>(0.0);
        for mu in 0..n {
            acc += j[(a, mu)] * c_up[(mu * n + b) * n + g];
        }
        acc
    };
    let mut w_low = vec![cst::<D>(0.0); n * n * n];
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                w_low[(a * n + b) * n + g] = (cl(a, b, g) + cl(b, g, a) - cl(g, a, b)) * 0.5;
            }
        }
    }
    let omega: Vec<Mat<D>> = (0..n)
        .map(|g| {
            Mat::from_fn(n, n, |a, b| {
                let mut acc = cst::<D>(0.0);
                for mu in 0..n {
                    acc += jinv[(a, mu)] * w_low[(mu * n + b) * n + g];
                }
                acc
            })
        })
        .collect();

    let mut torsion: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                let r = c_up[(a * n + b) * n + g] + omega[b][(a, g)] - omega[g][(a, b)];
                torsion = torsion.max(r.re().abs());
            }
        }
    }
    Ok(Solved {
        theta,
        frame: e,
        omega,
        torsion,
    })
}

/// Connection and curvature forms of `frame` at `p` from the structure
/// equations, without reference to any metric.
pub fn frame_forms<F: FrameField + ?Sized>(frame: &F, p: &[f64]) -> Result<FrameForms> {
    frame.chart().check(p)?;
    let n = p.len();
    let jf = frame.gram_target();
    let jinv_f = jf
        .clone()
        .try_inverse()
        .expect("gram target must be invertible");

    // ω in coordinates, as a function of the point, for dω
    let j1: Mat<Dual64> = Mat::from_f64(&jf);
    let jinv1: Mat<Dual64> = Mat::from_f64(&jinv_f);
    let (_, d_omega) = {
        let err = std::cell::RefCell::new(None);
        let out = jacobian(p, |x: &[Dual64]| match solve_connection(frame, x, &j1, &jinv1) {
            Ok(s) => {
                let mut v = Vec::with_capacity(n * n * n);
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut acc = Dual64::from(0.0);
                            for g in 0..n {
                                acc += s.omega[g][(a, b)] * s.theta[(g, c)];
                            }
                            v.push(acc);
                        }
                    }
                }
                v
            }
            Err(e) => {
                *err.borrow_mut() = Some(e);
                vec![Dual64::from(0.0); n * n * n]
            }
        });
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        out
    };

    let j0: Mat<f64> = Mat::from_f64(&jf);
    let jinv0: Mat<f64> = Mat::from_f64(&jinv_f);
    let solved = solve_connection(frame, p, &j0, &jinv0)?;
    let e = solved.frame.re();
    let connection: Vec<DMatrix<f64>> = solved.omega.iter().map(|m| m.re()).collect();

    // Ω(E_γ, E_δ) = dω(E_γ, E_δ) + [ω(E_γ), ω(E_δ)]
    let mut curvature = Vec::with_capacity(n * n);
    for g in 0..n {
        for d in 0..n {
            let mut m = &connection[g] * &connection[d] - &connection[d] * &connection[g];
            for a in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        for k in 0..n {
                            let idx = (a * n + b) * n;
                            acc += (d_omega[c][idx + k] - d_omega[k][idx + c]) * e[(c, g)] * e[(k, d)];
                        }
                    }
                    m[(a, b)] += acc;
                }
            }
            curvature.push(m);
        }
    }
    Ok(FrameForms {
        dim: n,
        coframe: solved.theta.re(),
        frame: e,
        connection,
        curvature,
        torsion_residual: solved.torsion,
    })
}

/// `max |θᵀ J θ - g|` relative to the size of `g`.
pub fn gram_residual<M: MetricField + ?Sized, F: FrameField + ?Sized>(metric: &M, frame: &F, p: &[f64]) -> f64 {
    let theta = frame.coframe(p).re();
    let g = metric.eval(p);
    let rebuilt = theta.transpose() * frame.gram_target() * theta;
    (rebuilt - &g).amax() / g.amax().max(1.0)
}

/// Check the frame against the metric, then solve the structure equations.
pub fn connection_curvature_forms<M: MetricField + ?Sized, F: FrameField + ?Sized>(
    metric: &M,
    frame: &F,
    p: &[f64],
) -> Result<FrameForms> {
    frame.chart().check(p)?;
    let residual = gram_residual(metric, frame, p);
    if !(residual < 1e-9) {
        return Err(Error::DegenerateFrame {
            point: p.to_vec(),
            residual,
        });
    }
    frame_forms(frame, p)
}

/// Frame components of the Levi-Civita connection and curvature computed
/// through Christoffel symbols and the coordinate Riemann tensor. Shares no
/// code with [`frame_forms`] and serves as its cross-check.
pub fn frame_forms_via_christoffel<M: MetricField + ?Sized, F: FrameField + ?Sized>(
    metric: &M,
    frame: &F,
    p: &[f64],
) -> Result<(Vec<DMatrix<f64>>, Vec<DMatrix<f64>>)> {
    let n = p.len();
    let gamma = christoffel(metric, p)?;
    let riem = riemann(metric, p)?;
    let theta = frame.coframe(p).re();
    // ∂_b E^a_j through the frame inverse
    let (ev, de) = jacobian(p, |x: &[Dual64]| {
        frame
            .coframe(x)
            .inverse()
            .map(|m| m.into_vec())
            .unwrap_or_else(|| vec![Dual64::from(f64::NAN); n * n])
    });
    let e = DMatrix::from_row_slice(n, n, &ev);
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateFrame {
            point: p.to_vec(),
            residual: f64::INFINITY,
        });
    }
    let mut conn = Vec::with_capacity(n);
    for k in 0..n {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for jj in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    let mut v = 0.0;
                    for b in 0..n {
                        v += e[(b, k)] * de[b][a * n + jj];
                        for c in 0..n {
                            v += gamma.get(a, b, c) * e[(b, k)] * e[(c, jj)];
                        }
                    }
                    acc += theta[(i, a)] * v;
                }
                m[(i, jj)] = acc;
            }
        }
        conn.push(m);
    }
    let mut curv = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for jj in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        if theta[(i, a)] == 0.0 {
                            continue;
                        }
                        let mut v = 0.0;
                        for b in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    v += riem.get(a, b, c, d) * e[(b, jj)] * e[(c, k)] * e[(d, l)];
                                }
                            }
                        }
                        acc += theta[(i, a)] * v;
                    }
                    m[(i, jj)] = acc;
                }
            }
            curv.push(m);
        }
    }
    Ok((conn, curv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Coordinate;
    use crate::geometry::metric::{Signature, SmoothMetric};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    struct Sphere(Chart);

    impl SmoothMetric for Sphere {
        fn chart(&self) -> &Chart {
            &self.0
        }
        fn signature(&self) -> Signature {
            Signature::riemannian(2)
        }
        fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
            let s = p[0].sin();
            Mat::from_vec(2, 2, vec![cst(1.0), cst(0.0), cst(0.0), s * s])
        }
    }

    impl FrameField for Sphere {
        fn chart(&self) -> &Chart {
            &self.0
        }
        fn gram_target(&self) -> DMatrix<f64> {
            DMatrix::identity(2, 2)
        }
        fn coframe<D: Real>(&self, p: &[D]) -> Mat<D> {
            Mat::from_vec(2, 2, vec![cst(1.0), cst(0.0), cst(0.0), p[0].sin()])
        }
    }

    fn sphere() -> Sphere {
        Sphere(Chart::new(vec![Coordinate::new("theta", 0.05, PI - 0.05), Coordinate::periodic("phi", 0.0, 2.0 * PI)]))
    }

    #[test]
    fn sphere_structure_equations() {
        let s = sphere();
        let p = [0.8, 1.3];
        let f = connection_curvature_forms(&s, &s, &p).unwrap();
        // ω^1_2 = -cosθ dφ, so ω^1_2(E_2) = -cotθ
        assert_relative_eq!(f.connection(1)[(0, 1)], -(0.8f64).cos() / (0.8f64).sin(), epsilon = 1e-14);
        assert!(f.connection(0).amax() < 1e-15);
        assert_relative_eq!(f.curvature(0, 1)[(0, 1)], 1.0, epsilon = 1e-12);
        assert!(f.torsion_residual() < 1e-14);
        assert!(f.algebra_residual(&DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn christoffel_route_agrees() {
        let s = sphere();
        let p = [2.2, 0.1];
        let f = frame_forms(&s, &p).unwrap();
        let (conn, curv) = frame_forms_via_christoffel(&s, &s, &p).unwrap();
        for g in 0..2 {
            assert!((f.connection(g) - &conn[g]).amax() < 1e-12);
            for d in 0..2 {
                assert!((f.curvature(g, d) - &curv[g * 2 + d]).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_frame_is_rejected() {
        struct Bad(Chart);
        impl FrameField for Bad {
            fn chart(&self) -> &Chart {
                &self.0
            }
            fn gram_target(&self) -> DMatrix<f64> {
                DMatrix::identity(2, 2)
            }
            fn coframe<D: Real>(&self, _: &[D]) -> Mat<D> {
                Mat::identity(2)
            }
        }
        let s = sphere();
        let err = connection_curvature_forms(&s, &Bad(s.0.clone()), &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { .. }));
    }
}
