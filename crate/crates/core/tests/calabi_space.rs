use lorentz_holonomy::calabi::{calibrate_fs_scale, max_ricci_norm, BForm, CalabiChart, CalabiSpace, HatKahler, FS_SCALE};
use lorentz_holonomy::geometry::forms::{covariant_derivative_2form, exterior_derivative, FormField};
use lorentz_holonomy::geometry::frame::{frame_forms, FrameField};
use lorentz_holonomy::geometry::metric::{christoffel, MetricField, SampledMetric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn samples(space: &CalabiSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| space.chart().sample(&mut rng)).collect()
}

#[test]
fn eguchi_hanson_is_ricci_flat() {
    let c = CalabiSpace::eguchi_hanson();
    let pts = samples(&c, 20, 3);
    assert!(max_ricci_norm(&c, &pts).unwrap() < 1e-10);
}

#[test]
fn m3_calabi_is_ricci_flat() {
    let c = CalabiSpace::new(3, FS_SCALE, CalabiChart::default()).unwrap();
    let pts = samples(&c, 10, 4);
    assert!(max_ricci_norm(&c, &pts).unwrap() < 1e-9);
}

#[test]
fn wrong_scale_is_not_ricci_flat() {
    let c = CalabiSpace::eguchi_hanson().with_fs_scale(1.3);
    let pts = samples(&c, 5, 5);
    assert!(max_ricci_norm(&c, &pts).unwrap() > 1e-2);
}

#[test]
fn calibration_matches_golden_constant() {
    let golden: serde_json::Value = serde_json::from_str(include_str!("../golden/constants.json")).unwrap();
    for m in [2usize, 3] {
        let c = CalabiSpace::new(m, 1.0, CalabiChart::default()).unwrap();
        let pts = samples(&c, 4, 11);
        let cal = calibrate_fs_scale(m, &pts, 1e-9).unwrap();
        let pinned = golden["fs_scale"][m.to_string()].as_f64().unwrap();
        assert!((cal.fs_scale - pinned).abs() < 1e-6, "m = {m}: {cal:?}");
        assert!(cal.ricci_norm < 1e-6);
    }
}

#[test]
fn db_equals_hat_kahler() {
    let c = CalabiSpace::eguchi_hanson();
    for p in samples(&c, 50, 6) {
        let db = exterior_derivative(&BForm(&c), &p).unwrap();
        let hat = HatKahler(&c).components(&p[..]);
        let r = db.iter().zip(&hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(r < 1e-12, "{r}");
    }
}

#[test]
fn hat_kahler_is_parallel() {
    for m in [2usize, 3] {
        let c = CalabiSpace::new(m, FS_SCALE, CalabiChart::default()).unwrap();
        for p in samples(&c, 20, 7) {
            let nabla = covariant_derivative_2form(&c, &HatKahler(&c), &p).unwrap();
            let r = nabla.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(r < 1e-10, "m = {m}: {r}");
        }
    }
}

#[test]
fn hat_kahler_is_constant_in_the_frame() {
    let c = CalabiSpace::eguchi_hanson();
    for p in samples(&c, 10, 8) {
        let e = c.frame(&p).unwrap();
        let hat = nalgebra::DMatrix::from_row_slice(4, 4, &c.hat_kahler(&p[..]));
        let framed = e.transpose() * hat * &e;
        assert!((framed - c.hat_kahler_frame()).amax() < 1e-12);
    }
}

#[test]
fn curvature_commutes_with_complex_structure() {
    // su(2)-valued curvature: [Ω, Ĵ] = 0 and tr(Ĵᵀ Ω) = 0
    let c = CalabiSpace::eguchi_hanson();
    let j = c.hat_kahler_frame();
    for p in samples(&c, 10, 9) {
        let f = frame_forms(&c, &p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let om = f.curvature(a, b);
                assert!((om * &j - &j * om).amax() < 1e-9);
                assert!((j.transpose() * om).trace().abs() < 1e-9);
            }
        }
    }
}

#[test]
fn christoffel_at_rho_two_matches_difference_oracle() {
    let c = CalabiSpace::eguchi_hanson();
    let fd = SampledMetric::new(c.chart().clone(), MetricField::signature(&c), |p: &[f64]| c.eval(p));
    let p = [2.0, 0.5, 0.3, -0.2];
    let exact = christoffel(&c, &p).unwrap();
    let approx = christoffel(&fd, &p).unwrap();
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                assert!((exact.get(k, i, j) - approx.get(k, i, j)).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn large_rho_approaches_cone_metric() {
    let c = CalabiSpace::new(2, FS_SCALE, CalabiChart { rho: (1.2, 200.0), base: 1.5, margin: 1e-2 }).unwrap();
    for rho in [20.0f64, 50.0, 100.0] {
        let p = [rho, 0.1, 0.4, 0.2];
        let g = c.eval(&p);
        let fib = c.fiber_form(&p[..]);
        let fs = c.fs_metric(&p[2..]).re();
        let mut cone = nalgebra::DMatrix::zeros(4, 4);
        cone[(0, 0)] = 1.0;
        for a in 0..4 {
            for b in 0..4 {
                cone[(a, b)] += rho * rho * fib[a] * fib[b];
                if a >= 2 && b >= 2 {
                    cone[(a, b)] += rho * rho * fs[(a - 2, b - 2)];
                }
            }
        }
        let rel = (&g - &cone).amax() / cone.amax();
        assert!(rel <= 2.0 * rho.powi(-4), "{rho}: {rel}");
    }
}
