use lorentz_holonomy::causality::*;
use lorentz_holonomy::error::Error;
use lorentz_holonomy::geometry::metric::MetricField;
use lorentz_holonomy::lorentz::{build_scenario, LorentzScenario};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cone_opts(samples: usize) -> ConeOptions {
    ConeOptions {
        samples,
        ..ConeOptions::default()
    }
}

fn plane(c: f64) -> ConstantMetric {
    // 2dη(dξ - c dη)
    ConstantMetric::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, -2.0 * c]), 5.0)
}

fn check_const<L: MetricField, H: MetricField>(lo: &L, hi: &H, samples: usize, strict: bool) -> ConeVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chart = lo.chart().clone();
    let opts = ConeOptions {
        samples,
        strict,
        ..ConeOptions::default()
    };
    let tau = |p: &[f64]| {
        let mut v = vec![0.0; p.len()];
        v[1] = 1.0;
        v[0] = -1.0;
        v
    };
    cone_contained(lo, hi, |r| chart.sample(r), tau, &opts, &mut rng).unwrap()
}

#[test]
fn constant_plane_cones() {
    let flat = plane(0.0);
    let tilted = plane(1.0);
    assert!(check_const(&flat, &tilted, 2000, false).pass);
    assert!(check_const(&flat, &flat, 2000, false).pass);
    let back = check_const(&tilted, &flat, 2000, false);
    assert!(!back.pass);
    let v = &back.violations[0];
    assert!(v.lo <= 1e-12 && v.hi > 0.0);
}

#[test]
fn riemannian_metric_is_a_signature_error() {
    let e = ConstantMetric::new(DMatrix::identity(2, 2), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chart = e.chart().clone();
    let r = cone_contained(&e, &e, |r| chart.sample(r), |_| vec![0.0, 1.0], &cone_opts(10), &mut rng);
    assert!(matches!(r, Err(Error::Signature { .. })));
}

#[test]
fn epsilon_grid_examples() {
    // C = 1, f ≡ 1
    let from_c: f64 = 0.25 / 1.0;
    let from_f = epsilon_from_f([(1.0, 0.3), (1.0, -2.0)]);
    assert_eq!(from_f, f64::INFINITY);
    assert_eq!(grid_epsilon(from_c.min(from_f)), Some(2));
    // A ≡ 0: only the f constraint remains
    assert_eq!(grid_epsilon(f64::INFINITY.min(epsilon_from_f([(3.0, 0.0)]))), Some(1));
    assert_eq!(grid_epsilon(1e-9), None);
}

#[test]
fn desk_epsilon_bound_and_cone_comparison() {
    for t in [3u8, 4] {
        let space = build_scenario(&LorentzScenario::desk(t).unwrap()).unwrap();
        let b = epsilon_bound(&space, 10_000, 11).unwrap();
        let eps = b.epsilon.expect("an admissible epsilon on the grid");
        assert!(b.k.unwrap() < 20 && eps <= b.from_c && eps <= b.from_f);
        let at = build_scenario(&space.spec().with_epsilon(eps)).unwrap();
        let v = compare_with_background(&at, &cone_opts(10_000), 5).unwrap();
        assert!(v.pass, "type {t}: {:?}", v.violations.first());
        assert_eq!((v.samples, v.null_samples), (10_000, 5_000));
        assert!(v.orientation < 0.0);
        assert!(v.margin <= 1e-10);
    }
}

#[test]
fn epsilon_far_above_the_bound_breaks_containment() {
    let space = build_scenario(&LorentzScenario::desk(3).unwrap().with_epsilon(4.0)).unwrap();
    let v = compare_with_background(&space, &cone_opts(4000), 5).unwrap();
    assert!(!v.pass && v.violation_count > 0);
    assert!(v.violations.iter().all(|x| x.hi > 0.0 && x.lo <= 1e-9 * x.vector.iter().map(|a| a * a).sum::<f64>()));
}

#[test]
fn time_function_values() {
    assert!((TimeFunction::ShiftedLog.eval(&[0.0, 0.0]) + 2f64.ln()).abs() < 1e-15);
    assert_eq!(TimeFunction::SignedLog.eval(&[0.0, 0.0]), 0.0);
    // vertical curve ξ = 0: Ṫ = η̇
    for tf in [TimeFunction::SignedLog, TimeFunction::ShiftedLog] {
        assert_eq!(tf.gradient(&[0.0, 0.7])[1], 1.0);
        assert_eq!(tf.gradient(&[0.0, 0.7])[0] * 0.0, 0.0);
    }
}

fn plane_start(r: &mut ChaCha8Rng) -> Vec<f64> {
    vec![r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)]
}

#[test]
fn signed_log_time_function_increases_on_causal_curves() {
    let g = WedgeBackground::plane(40.0);
    let r = verify_time_function(&g, TimeFunction::SignedLog, |_| vec![0.0, 1.0], plane_start, &CurveOptions::default()).unwrap();
    assert_eq!(r.curves, 100);
    assert!(r.pass && r.min_rate > 0.0, "{r:?}");
    assert!(r.counterexample.is_none());
}

#[test]
fn shifted_log_fails_for_negative_xi() {
    let g = WedgeBackground::plane(40.0);
    let r = verify_time_function(&g, TimeFunction::ShiftedLog, |_| vec![0.0, 1.0], plane_start, &CurveOptions::default()).unwrap();
    assert!(!r.pass && r.min_rate < 0.0);
    assert!(r.worst_point[0] < 0.0);
    assert!(r.counterexample.is_some_and(|c| !c.is_empty()));
}

#[test]
fn time_function_on_the_type3_scenario() {
    let space = build_scenario(&LorentzScenario::desk(3).unwrap()).unwrap();
    let chart = space.chart().clone();
    let opts = CurveOptions {
        curves: 20,
        length: 1.0,
        ..CurveOptions::default()
    };
    let r = verify_time_function(&space, TimeFunction::SignedLog, |p| time_direction(&space, p), |r| chart.sample(r), &opts).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn plane_diamond_escape_for_five_pairs() {
    let opts = CurveOptions {
        curves: 500,
        ..CurveOptions::default()
    };
    let pairs = [
        ([0.0, 0.0], [0.0, 2.0]),
        ([-1.0, 0.5], [1.0, 3.0]),
        ([2.0, -1.0], [-3.0, 1.0]),
        ([0.5, 0.0], [4.0, 1.5]),
        ([-2.0, -2.0], [-2.0, 0.5]),
    ];
    for (p1, p2) in pairs {
        let r = plane_escape_test(&p1, &p2, 0.05, &opts).unwrap();
        assert!(r.pass && r.curves == 500 && r.checked_points > 0, "{p1:?} {p2:?} {r:?}");
    }
}

#[test]
fn empty_and_degenerate_diamonds() {
    assert!(plane_diamond(&[0.0, 1.0], &[0.0, 0.0]).is_none());
    assert!(flat_diamond(&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]).is_none());
    let b = plane_diamond(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
    // both corners sit on null rays through the endpoints
    assert!((b.upper[0] - (2f64.exp() - 1.0)).abs() < 1e-12);
}

#[test]
fn flat_diamond_escape() {
    let opts = CurveOptions {
        curves: 500,
        ..CurveOptions::default()
    };
    let r = flat_escape_test(1, &[0.0, 0.0, 0.0], 0.05, &opts).unwrap();
    assert!(r.pass, "{r:?}");
    let r = flat_escape_test(2, &[0.5, -0.2, 0.3, -0.1], 0.05, &CurveOptions { curves: 100, ..opts }).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn flat_factor_growth_is_quadratic() {
    for k in [1, 2] {
        let g = flat_growth(k, 200, 100.0, 3).unwrap();
        assert!((g.exponent - 2.0).abs() <= 0.2, "k = {k}: {}", g.exponent);
        assert!(g.bound_ratio <= 1.0 + 1e-6);
    }
    assert!(matches!(flat_growth(1, 10, 5.0, 3), Err(Error::Window(_))));
}

#[test]
fn tilted_metric_strictly_contains_the_background() {
    for k in [1, 2] {
        let v = tilted_comparison(k, 5.0, 10_000, 3).unwrap();
        assert!(v.pass && v.margin < 0.0 && v.orientation < 0.0, "{v:?}");
    }
}

#[test]
fn monotone_functional_on_thousand_segments() {
    let opts = CurveOptions {
        curves: 1000,
        length: 1.5,
        ..CurveOptions::default()
    };
    let s = monotone_scan(1, &opts).unwrap();
    assert_eq!(s.curves, 1000);
    assert!(s.pass && s.min_rate >= -1e-9 && s.min_return > 0.1, "{s:?}");
}

#[test]
fn cubic_rays() {
    let r = lightray_exponent(&RayProfile::Eta { coeffs: vec![0.0, 0.0, 1.0] }, 0.0, 0.0, 100.0).unwrap();
    assert!((r.exponent - 3.0).abs() <= 0.01);
    assert!(r.exact_residual.unwrap() < 1e-6);
    let r = lightray_exponent(&RayProfile::Eta { coeffs: vec![0.0, 1.0, 1.0] }, 0.0, 0.0, 1000.0).unwrap();
    assert!((r.exponent - 3.0).abs() <= 0.05 && r.exact_residual.unwrap() < 1e-6);
    let r = lightray_exponent(&RayProfile::Eta { coeffs: vec![1.0] }, 0.0, 0.0, 100.0).unwrap();
    assert!((r.exponent - 1.0).abs() < 1e-9);
    let r = lightray_exponent(&RayProfile::Xi { coef: 1.0, power: 2.0 / 3.0 }, 1.0, 0.0, 1000.0).unwrap();
    assert!((r.exponent - 3.0).abs() <= 0.05, "{}", r.exponent);
}

#[test]
fn ray_window_errors() {
    let zero = RayProfile::Eta { coeffs: vec![] };
    assert!(matches!(lightray_exponent(&zero, 0.0, 0.0, 100.0), Err(Error::Window(_))));
    let sq = RayProfile::Eta { coeffs: vec![0.0, 0.0, 1.0] };
    assert!(matches!(lightray_exponent(&sq, 0.0, 0.0, 5.0), Err(Error::Window(_))));
}

#[test]
fn c0_limit_is_linear_in_epsilon() {
    for t in [1u8, 2] {
        let space = build_scenario(&LorentzScenario::desk(t).unwrap()).unwrap();
        let c = epsilon_convergence(&space, &[1e-1, 1e-2, 1e-3], 200, 1);
        assert!((c.slope - 1.0).abs() <= 0.05);
    }
}

#[test]
fn verdicts_are_deterministic() {
    let space = build_scenario(&LorentzScenario::desk(4).unwrap()).unwrap();
    let a = compare_with_background(&space, &cone_opts(500), 9).unwrap();
    let b = compare_with_background(&space, &cone_opts(500), 9).unwrap();
    assert_eq!(a, b);
    let o = CurveOptions { curves: 10, ..CurveOptions::default() };
    assert_eq!(plane_escape_test(&[0.0, 0.0], &[0.0, 2.0], 0.05, &o).unwrap(), plane_escape_test(&[0.0, 0.0], &[0.0, 2.0], 0.05, &o).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cone_order_is_transitive(a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0) {
        let (ga, gb, gc) = (plane(a), plane(b), plane(c));
        let ab = check_const(&ga, &gb, 300, false).pass;
        let bc = check_const(&gb, &gc, 300, false).pass;
        if ab && bc {
            prop_assert!(check_const(&ga, &gc, 300, false).pass);
        }
        // the family is ordered by the tilt
        prop_assert_eq!(ab, a <= b);
    }

    #[test]
    fn plane_diamond_grows_with_eta2(x1 in -3.0f64..3.0, e1 in -2.0f64..2.0, de in 0.0f64..3.0, extra in 0.0f64..2.0) {
        let p1 = [x1, e1];
        let p2 = [x1, e1 + de];
        let p3 = [x1, e1 + de + extra];
        let small = plane_diamond(&p1, &p2).unwrap();
        let big = plane_diamond(&p1, &p3).unwrap();
        for i in 0..2 {
            prop_assert!(big.lower[i] <= small.lower[i] + 1e-12 && big.upper[i] >= small.upper[i] - 1e-12);
        }
    }

    #[test]
    fn flat_diamond_grows_with_eta2(x1 in -3.0f64..3.0, t1 in -2.0f64..2.0, de in 0.1f64..3.0, extra in 0.0f64..2.0) {
        let p1 = [x1, 0.0, t1];
        let p2 = [x1, de, t1];
        let p3 = [x1, de + extra, t1];
        let small = flat_diamond(&p1, &p2).unwrap();
        let big = flat_diamond(&p1, &p3).unwrap();
        for i in 0..3 {
            prop_assert!(big.lower[i] <= small.lower[i] + 1e-12 && big.upper[i] >= small.upper[i] - 1e-12);
        }
    }

    #[test]
    fn delta_is_admissible(f in 0.0f64..1e6) {
        let d = tilt_delta(f);
        prop_assert!(d > 0.0 && d < 1.0);
        prop_assert!((2.0 * (1.0 + f) * d - 0.5).abs() < 1e-15);
    }
}
