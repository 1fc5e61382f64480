use lorentz_holonomy::calabi::CalabiSpace;
use lorentz_holonomy::geometry::frame::connection_curvature_forms;
use lorentz_holonomy::geometry::ode::OdeOptions;
use lorentz_holonomy::holonomy::*;
use lorentz_holonomy::lorentz::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn desk(t: u8) -> (LorentzSpace, HolonomyRun) {
    scenario_holonomy(&LorentzScenario::desk(t).unwrap(), &HolonomyOptions::default()).unwrap()
}

fn loop_opts() -> OdeOptions {
    OdeOptions::default().with_rtol(1e-11)
}

#[test]
fn desk_dimensions_and_types() {
    for (t, dim) in [(1, 3), (2, 3), (3, 8), (4, 8)] {
        let (_, run) = desk(t);
        assert_eq!(run.algebra.dim(), dim, "type {t}");
        assert_eq!(run.span_dim, dim, "closure adds nothing for type {t}");
        let tpl = run.template.unwrap_or_else(|| panic!("{:?}", run.classify_error));
        assert_eq!(tpl.type_tag, t);
        assert!(run.algebra.gram_residual() < 1e-10);
        assert!(run.algebra.bracket_residual() < 1e-8, "type {t}: {}", run.algebra.bracket_residual());
    }
}

#[test]
fn recovered_functionals_match_the_construction() {
    let (_, run3) = desk(3);
    let phi = run3.template.unwrap().phi;
    assert!((phi[0] / 0.7 - 1.0).abs() < 1e-3, "{phi:?}");
    let (_, run4) = desk(4);
    let psi = run4.template.unwrap().psi;
    assert!((psi[0][0] / 0.8 - 1.0).abs() < 1e-3, "{psi:?}");
}

#[test]
fn flat_product_has_trivial_holonomy() {
    let mut spec = LorentzScenario::desk_type2();
    spec.factors = vec![FactorSpec::Torus {
        conformal_amplitude: 0.0,
    }];
    spec.generic.amplitude = 0.0;
    let s = build_scenario(&spec).unwrap();
    let h = ambrose_singer_generators(&s, &sample_points(&s, 10, 0)).unwrap();
    assert!(h.elements.is_empty());
    assert_eq!(lie_closure(&h.elements, 1e-8).unwrap().dim(), 0);
}

#[test]
fn more_points_contain_fewer() {
    let s = build_scenario(&LorentzScenario::desk_type3()).unwrap();
    let pts = sample_points(&s, 12, 5);
    let few = span(&ambrose_singer_generators(&s, &pts[..3]).unwrap().elements, 1e-8);
    let many = span(&ambrose_singer_generators(&s, &pts).unwrap().elements, 1e-8);
    assert!(many.contains(&few, 1e-8));
    assert!(many.dim() >= few.dim());
}

#[test]
fn boost_part_follows_center_part_in_type3() {
    let s = build_scenario(&LorentzScenario::desk_type3()).unwrap();
    let block = s.split().kahler().next().unwrap().clone();
    let top = s.dim() - 1;
    for p in sample_points(&s, 5, 2) {
        let forms = connection_curvature_forms(&s, &s, &p).unwrap();
        for k in 1..top {
            let d = project(forms.curvature(k, top));
            let z = center_component(&d.rot, &block);
            assert!((d.a - 0.7 * z).abs() < 1e-10, "{} vs {}", d.a, 0.7 * z);
        }
    }
}

#[test]
fn eguchi_hanson_loops_give_su2() {
    let c = CalabiSpace::eguchi_hanson();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = vec![1.8, 0.3, 0.2, -0.1];
    let fam = lasso_family(c.chart(), &base, 0.1, 4, 0.1, &mut rng);
    let lh = loop_holonomy(&c, &c, &base, &fam, &loop_opts(), 1e-6).unwrap();
    assert_eq!(lh.algebra.dim(), 3);
}

#[test]
fn loops_stay_inside_the_curvature_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 1..=4 {
        let (s, run) = desk(t);
        let base = sample_points(&s, 1, 77)[0].clone();
        let fam = lasso_family(s.chart(), &base, 0.15, 8, 0.1, &mut rng);
        let lh = loop_holonomy(&s, &s, &base, &fam, &loop_opts(), 1e-6).unwrap();
        assert!(run.algebra.contains(&lh.algebra, 1e-4), "type {t}");
        assert_eq!(lh.algebra.dim(), run.algebra.dim(), "type {t}");
        if t == 1 {
            for l in &lh.logs {
                assert!(project(l).rot.amax() < 1e-8);
            }
        }
    }
}

#[test]
fn flat_scenario_transport_is_trivial() {
    let mut spec = LorentzScenario::desk_type2();
    spec.factors = vec![FactorSpec::Torus {
        conformal_amplitude: 0.0,
    }];
    spec.generic.amplitude = 0.0;
    let s = build_scenario(&spec).unwrap();
    let base = vec![0.1, 0.2, 1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fam = lasso_family(s.chart(), &base, 0.3, 2, 0.1, &mut rng);
    let lh = loop_holonomy(&s, &s, &base, &fam, &loop_opts(), 1e-6).unwrap();
    assert!(lh.distances.iter().all(|&d| d < 1e-12));
    assert_eq!(lh.algebra.dim(), 0);
}

fn conjugate(hol: &Subalgebra, g: &DMatrix<f64>) -> Subalgebra {
    let gi = g.clone().try_inverse().unwrap();
    let basis: Vec<_> = hol.basis.iter().map(|b| g * b * &gi).collect();
    lie_closure(&basis, 1e-8).unwrap()
}

#[test]
fn classification_survives_unitary_conjugation() {
    for t in [3, 4] {
        let (s, run) = desk(t);
        let block = s.split().kahler().next().unwrap().clone();
        // exp of an element of u(2) inside the Kähler block
        let j = block.hat_matrix().unwrap();
        let mut gen = DMatrix::zeros(s.n(), s.n());
        let r = block.range.clone();
        let y = DMatrix::from_fn(4, 4, |a, b| (a as f64 - b as f64) * 0.2 + if a < b { 0.1 } else { -0.1 });
        let x = (&y - &j * &y * &j) * 0.5 + &j * 0.4;
        assert!((&x * &j - &j * &x).amax() < 1e-15);
        gen.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&x);
        let rot = gen.exp();
        let mut g = DMatrix::identity(s.dim(), s.dim());
        g.view_mut((1, 1), (s.n(), s.n())).copy_from(&rot);
        let moved = conjugate(&run.algebra, &g);
        let a = classify(&run.algebra, &s.split(), &ClassifyOptions::default()).unwrap();
        let b = classify(&moved, &s.split(), &ClassifyOptions::default()).unwrap();
        assert_eq!(a.type_tag, b.type_tag);
        assert_eq!(a.dim, b.dim);
        for (u, v) in a.phi.iter().zip(&b.phi) {
            assert!((u - v).abs() < 1e-8);
        }
        for (u, v) in a.psi.iter().flatten().zip(b.psi.iter().flatten()) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}

#[test]
fn holonomy_exponentials_are_lorentz_transformations() {
    let (_, run) = desk(2);
    for b in &run.algebra.basis {
        let (_, c) = exp_check(b);
        assert!(c.orthogonality < 1e-12 && c.stabilizer < 1e-12);
    }
}

#[test]
fn resampling_reports_the_seed() {
    let (_, run) = desk(2);
    assert_eq!(run.seed_used, 1);
    assert_eq!(run.attempts, vec![(1, 3)]);
}

fn element(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut d = Decomposed::zero(n);
    d.a = v[0];
    let mut k = 1;
    for i in 0..n {
        d.x[i] = v[k];
        k += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            d.rot[(i, j)] = v[k];
            d.rot[(j, i)] = -v[k];
            k += 1;
        }
    }
    d.assemble()
}

proptest! {
    #[test]
    fn decomposition_round_trips(v in prop::collection::vec(-3.0f64..3.0, 10)) {
        let m = element(3, &v);
        prop_assert!(algebra::algebra_residual(&m) < 1e-12);
        let d = decompose(&m, 1e-12).unwrap();
        prop_assert_eq!(d.assemble(), m.clone());
        prop_assert!((pr_a(&m) + pr_k(&m) + pr_n(&m) - &m).amax() == 0.0);
    }

    #[test]
    fn brackets_stay_in_the_stabilizer(u in prop::collection::vec(-2.0f64..2.0, 10), w in prop::collection::vec(-2.0f64..2.0, 10)) {
        let b = bracket(&element(3, &u), &element(3, &w));
        prop_assert!(algebra::algebra_residual(&b) < 1e-12);
        prop_assert!(algebra::stabilizer_residual(&b) < 1e-12);
        let nu: Vec<f64> = u.iter().enumerate().map(|(k, x)| if (1..4).contains(&k) { *x } else { 0.0 }).collect();
        let nw: Vec<f64> = w.iter().enumerate().map(|(k, x)| if (1..4).contains(&k) { *x } else { 0.0 }).collect();
        prop_assert!(bracket(&element(3, &nu), &element(3, &nw)).amax() == 0.0);
    }

    #[test]
    fn closure_dimension_ignores_generator_order(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        let mut gens = vec![
            algebra::rotation(3, 0, 1),
            algebra::translation(3, 2),
            algebra::rotation(3, 1, 2) * 0.5,
        ];
        let before = lie_closure(&gens, 1e-8).unwrap().dim();
        gens.shuffle(&mut rng);
        prop_assert_eq!(lie_closure(&gens, 1e-8).unwrap().dim(), before);
    }
}
