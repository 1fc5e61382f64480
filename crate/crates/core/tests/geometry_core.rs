use std::f64::consts::PI;

use lorentz_holonomy::geometry::forms::dd;
use lorentz_holonomy::geometry::*;
use lorentz_holonomy::holonomy::sample_points;
use lorentz_holonomy::lorentz::{build_scenario, LorentzScenario};
use lorentz_holonomy::scalar::{Mat, Real};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cube(n: usize, half: f64) -> Chart {
    Chart::new((0..n).map(|i| Coordinate::new(format!("x{i}"), -half, half)).collect())
}

/// `e^{2u} δ` on ℝ³ with `u = Σ aᵢ sin(bᵢ xᵢ + cᵢ) + d x₀ x₁`.
#[derive(Clone, Debug)]
struct Conformal {
    chart: Chart,
    a: [f64; 3],
    b: [f64; 3],
    c: [f64; 3],
    d: f64,
}

impl Conformal {
    fn u<D: Real>(&self, p: &[D]) -> D {
        let mut u = p[0] * p[1] * self.d;
        for i in 0..3 {
            u += (p[i] * self.b[i] + self.c[i]).sin() * self.a[i];
        }
        u
    }
}

impl SmoothMetric for Conformal {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn signature(&self) -> Signature {
        Signature::riemannian(3)
    }
    fn components<D: Real>(&self, p: &[D]) -> Mat<D> {
        Mat::identity(3).scale((self.u(p) * 2.0).exp())
    }
}

impl FrameField for Conformal {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn gram_target(&self) -> DMatrix<f64> {
        DMatrix::identity(3, 3)
    }
    fn coframe<D: Real>(&self, p: &[D]) -> Mat<D> {
        Mat::identity(3).scale(self.u(p).exp())
    }
}

/// `Σ cₖ monomialₖ dxⁱ` with small integer powers.
struct PolyForm {
    chart: Chart,
    coef: Vec<f64>,
}

impl FormField for PolyForm {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn degree(&self) -> usize {
        1
    }
    fn components<D: Real>(&self, p: &[D]) -> Vec<D> {
        (0..3)
            .map(|i| {
                let c = &self.coef[4 * i..4 * i + 4];
                p[(i + 1) % 3] * p[(i + 2) % 3] * c[0] + p[i].powi(3) * c[1] + p[0] * p[1] * p[2] * c[2] + p[(i + 1) % 3].powi(2) * c[3]
            })
            .collect()
    }
}

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
        Mat::from_vec(2, 2, vec![D::from(1.0), D::from(0.0), D::from(0.0), s * s])
    }
}

fn conformal() -> impl Strategy<Value = Conformal> {
    (
        prop::array::uniform3(-0.5..0.5f64),
        prop::array::uniform3(0.5..2.0f64),
        prop::array::uniform3(0.0..6.0f64),
        -0.3..0.3f64,
    )
        .prop_map(|(a, b, c, d)| Conformal {
            chart: cube(3, 2.0),
            a,
            b,
            c,
            d,
        })
}

fn point3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 3)
}

#[test]
fn latitude_loop_at_sixty_degrees_turns_by_pi() {
    let s = Sphere(Chart::new(vec![Coordinate::new("theta", 0.05, PI - 0.05), Coordinate::periodic("phi", 0.0, 2.0 * PI)]));
    // θ = π/3, once around in φ.
    let loop_ = Polyline::new(vec![vec![PI / 3.0, 0.0], vec![PI / 3.0, PI], vec![PI / 3.0, 2.0 * PI]]);
    let p = transport_matrix(&s, &loop_, &OdeOptions::default().with_rtol(1e-11)).unwrap();
    // Orthonormalize: e_θ and e_φ / sin θ.
    let sn = (PI / 3.0).sin();
    let v = [p[(0, 0)], p[(1, 0)] * sn];
    let angle = v[1].atan2(v[0]).abs();
    assert!((angle - PI).abs() < 1e-8, "{angle}");
}

#[test]
fn finite_differences_converge_under_step_halving() {
    let p = [1.1, 0.7];
    let exact = riemann(&Sphere(Chart::new(vec![Coordinate::new("t", 0.05, 3.0), Coordinate::new("f", -1.0, 1.0)])), &p)
        .unwrap()
        .get(0, 1, 0, 1);
    let err = |w: f64| {
        let chart = Chart::new(vec![Coordinate::new("t", p[0] - w, p[0] + w), Coordinate::new("f", p[1] - w, p[1] + w)]);
        let s = Sphere(chart.clone());
        let fd = SampledMetric::new(chart, Signature::riemannian(2), |q: &[f64]| s.eval(q));
        let r = riemann(&fd, &p).unwrap();
        assert!(r.bianchi_residual() < 1e-4);
        assert!(r.antisymmetry_residual() < 1e-4);
        (r.get(0, 1, 0, 1) - exact).abs()
    };
    let (coarse, fine) = (err(20.0), err(10.0));
    assert!(coarse < 1e-4 && fine < coarse, "{coarse} {fine}");
    let order = (coarse / fine).log2();
    assert!(order >= 1.9, "order {order}");
}

#[test]
fn flat_scenario_has_vanishing_forms() {
    let mut spec = LorentzScenario::desk_type2();
    spec.factors = vec![lorentz_holonomy::lorentz::FactorSpec::Flat { dim: 2, half_width: 1.0 }];
    spec.generic.amplitude = 0.0;
    let space = build_scenario(&spec).unwrap();
    for p in sample_points(&space, 5, 1) {
        let forms = connection_curvature_forms(&space, &space, &p).unwrap();
        for g in 0..space.dim() {
            assert!(forms.connection(g).amax() < 1e-14);
        }
    }
}

#[test]
fn scenarios_satisfy_structure_equations() {
    for t in 1..=4 {
        let space = build_scenario(&LorentzScenario::desk(t).unwrap()).unwrap();
        for p in sample_points(&space, 100, 9) {
            let forms = connection_curvature_forms(&space, &space, &p).unwrap();
            assert!(forms.torsion_residual() < 1e-6, "type {t}: {}", forms.torsion_residual());
            assert!(forms.algebra_residual(&space.j()) < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curvature_symmetries(m in conformal(), p in point3()) {
        let r = riemann(&m, &p).unwrap();
        prop_assert!(r.antisymmetry_residual() < 1e-10);
        prop_assert!(r.bianchi_residual() < 1e-10);
        let g = christoffel(&m, &p).unwrap();
        prop_assert!(g.symmetry_residual() < 1e-12);
        prop_assert!(g.metricity_residual(&m.first_jet(&p).unwrap()) < 1e-10);
    }

    #[test]
    fn transport_preserves_the_pairing(
        m in conformal(),
        base in point3(),
        corners in prop::collection::vec(point3(), 2..4),
        v in prop::array::uniform3(-1.0..1.0f64),
        w in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let mut verts = vec![base.clone()];
        verts.extend(corners);
        verts.push(base.clone());
        let loop_ = Polyline::new(verts);
        let opts = OdeOptions::default();
        let pv = parallel_transport(&m, &loop_, &v, &opts).unwrap();
        let pw = parallel_transport(&m, &loop_, &w, &opts).unwrap();
        let before = m.pair(&base, &v, &w);
        let after = m.pair(&base, &pv, &pw);
        prop_assert!((before - after).abs() < 1e-6 * (1.0 + before.abs()), "{before} {after}");
    }

    #[test]
    fn exterior_derivative_is_nilpotent(coef in prop::collection::vec(-2.0..2.0f64, 12), p in point3()) {
        let form = PolyForm { chart: cube(3, 2.0), coef };
        let ddf = dd(&form, &p).unwrap();
        prop_assert!(ddf.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn conformal_frames_solve_the_structure_equations(m in conformal(), p in point3()) {
        let forms = connection_curvature_forms(&m, &m, &p).unwrap();
        prop_assert!(forms.torsion_residual() < 1e-10);
        prop_assert!(forms.algebra_residual(&DMatrix::identity(3, 3)) < 1e-10);
    }
}
