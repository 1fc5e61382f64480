//! Execution of the verification suites selected by a [`Config`].

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use anyhow::{anyhow, Result};
use lorentz_holonomy::calabi::{max_ricci_norm, BForm, CalabiSpace, HatKahler};
use lorentz_holonomy::causality::backgrounds::sgn_log_inv;
use lorentz_holonomy::causality::*;
use lorentz_holonomy::geometry::forms::{covariant_derivative_2form, exterior_derivative, FormField};
use lorentz_holonomy::geometry::frame::connection_curvature_forms;
use lorentz_holonomy::geometry::ode::OdeOptions;
use lorentz_holonomy::holonomy::{lasso_family, loop_holonomy, scenario_holonomy, HolonomyOptions};
use lorentz_holonomy::lorentz::{build_scenario, compare_forms, Factor, FamilyResiduals, LorentzSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, Suite};
use crate::report::*;

/// Point pairs for the plane diamond test.
pub const DIAMOND_PAIRS: [([f64; 2], [f64; 2]); 5] = [
    ([0.0, 0.0], [0.0, 2.0]),
    ([-1.0, 0.5], [1.0, 3.0]),
    ([2.0, -1.0], [-3.0, 1.0]),
    ([0.5, 0.0], [4.0, 1.5]),
    ([-2.0, -2.0], [-2.0, 0.5]),
];

struct Outcome {
    verdict: Verdict,
    curves: Vec<CurveSet>,
    holonomy: Option<HolonomySummary>,
}

impl Outcome {
    fn new(suite: Suite) -> Outcome {
        Outcome {
            verdict: Verdict::new(suite.name()),
            curves: Vec::new(),
            holonomy: None,
        }
    }
}

fn seed_for(cfg: &Config, suite: Suite) -> u64 {
    cfg.seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ (suite as u64 + 1)
}

fn points(space: &LorentzSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| space.chart().sample(&mut rng)).collect()
}

pub fn summarize(space: &LorentzSpace) -> ScenarioSummary {
    ScenarioSummary {
        type_tag: space.type_tag(),
        epsilon: space.epsilon(),
        n: space.n(),
        dim: space.dim(),
        coordinates: space.chart().names().iter().map(|s| s.to_string()).collect(),
    }
}

/// Run every selected suite. Failures inside a suite are recorded in its
/// verdict; the remaining suites still run.
pub fn run(cfg: &Config) -> Report {
    run_suites(cfg, &cfg.suites)
}

pub fn run_suites(cfg: &Config, suites: &[Suite]) -> Report {
    let space = build_scenario(&cfg.scenario);
    let mut report = Report {
        schema_version: crate::config::SCHEMA_VERSION,
        tool: Tool::current(),
        seed: cfg.seed,
        scenario: space.as_ref().ok().map(summarize),
        suites: Vec::new(),
        holonomy: None,
        curves: Vec::new(),
        pass: true,
        timing: BTreeMap::new(),
    };
    for &suite in suites {
        let start = Instant::now();
        let out = match &space {
            Err(e) => Err(anyhow!("scenario: {e}")),
            Ok(space) => catch_unwind(AssertUnwindSafe(|| run_one(cfg, space, suite)))
                .unwrap_or_else(|p| Err(anyhow!("suite panicked: {}", panic_message(&p)))),
        };
        let out = out.unwrap_or_else(|e| {
            log::error!("suite {} failed: {e:#}", suite.name());
            Outcome {
                verdict: Verdict::failed(suite.name(), format!("{e:#}")),
                ..Outcome::new(suite)
            }
        });
        report.timing.insert(suite.name().to_string(), start.elapsed().as_secs_f64());
        report.pass &= out.verdict.pass;
        report.suites.push(out.verdict);
        report.curves.extend(out.curves);
        if out.holonomy.is_some() {
            report.holonomy = out.holonomy;
        }
    }
    report
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn run_one(cfg: &Config, space: &LorentzSpace, suite: Suite) -> Result<Outcome> {
    let seed = seed_for(cfg, suite);
    match suite {
        Suite::Lemma1 => lemma1(cfg, space, seed),
        Suite::Holonomy => holonomy(cfg, space),
        Suite::Cones => cones(cfg, space, seed),
        Suite::Timefn => timefn(cfg, space, seed),
        Suite::Diamond => diamond(cfg, space, seed),
        Suite::Rays => rays(cfg),
        Suite::Calabi => calabi(cfg, space, seed),
    }
}

fn lemma1(cfg: &Config, space: &LorentzSpace, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Lemma1);
    let pts = points(space, cfg.samples.lemma1_points, seed);
    let mut r = FamilyResiduals::default();
    let mut algebra: f64 = 0.0;
    for p in &pts {
        let solved = connection_curvature_forms(space, space, p)?;
        let closed = space.lemma1_forms(p)?;
        algebra = algebra.max(closed.algebra_residual(&space.j()));
        r.merge(&compare_forms(&closed, &solved));
    }
    let tol = cfg.tolerances.lemma1;
    for (name, v) in r.as_array() {
        out.verdict.push(Check::new(name, v, Compare::Below, tol, pts.len()));
    }
    out.verdict.push(Check::new("so(n+1,1) membership", algebra, Compare::Below, tol, pts.len()));
    Ok(out)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn holonomy(cfg: &Config, space: &LorentzSpace) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Holonomy);
    let opts = HolonomyOptions {
        points: cfg.samples.holonomy_points,
        ..HolonomyOptions::default()
    };
    let (_, run) = scenario_holonomy(&cfg.scenario, &opts)?;
    let n = opts.points;
    let v = &mut out.verdict;
    v.push(Check::new("span dimension", run.span_dim as f64, Compare::Equal, run.expected_dim as f64, n));
    v.push(Check::new("closure adds nothing", run.algebra.dim() as f64, Compare::Equal, run.span_dim as f64, n));
    v.note("generators", run.generators as f64);
    v.note("seed_used", run.seed_used as f64);
    let tpl = run.template.as_ref();
    v.push(Check::new(
        "classified type",
        tpl.map(|t| t.type_tag as f64).unwrap_or(0.0),
        Compare::Equal,
        space.type_tag() as f64,
        n,
    ));
    if let Some(t) = tpl {
        if space.type_tag() == 3 {
            let err = t.phi.iter().zip(&cfg.scenario.phi).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
            v.push(Check::new("phi relative error", err, Compare::Below, cfg.tolerances.fit, n));
        }
        if space.type_tag() == 4 {
            let err = t
                .psi
                .iter()
                .flatten()
                .zip(cfg.scenario.psi.iter().flatten())
                .map(|(a, b)| rel(*a, *b))
                .fold(0.0, f64::max);
            v.push(Check::new("psi relative error", err, Compare::Below, cfg.tolerances.fit, n));
        }
    } else if let Some(e) = &run.classify_error {
        log::warn!("classification failed: {e}");
    }
    out.holonomy = Some(HolonomySummary {
        hol_dim: run.algebra.dim(),
        expected_dim: run.expected_dim,
        span_dim: run.span_dim,
        type_tag: tpl.map(|t| t.type_tag),
        dim_h: tpl.map(|t| t.dim_h),
        phi: tpl.map(|t| t.phi.clone()).unwrap_or_default(),
        psi: tpl.map(|t| t.psi.clone()).unwrap_or_default(),
        seed_used: run.seed_used,
    });
    Ok(out)
}

/// Dimension of the flat factor for Type 4, else `1`.
fn wedge_dim(space: &LorentzSpace) -> usize {
    if space.type_tag() == 4 {
        space.base().flat_coords().len()
    } else {
        1
    }
}

fn cones(cfg: &Config, space: &LorentzSpace, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Cones);
    let s = &cfg.samples;
    let v = &mut out.verdict;
    if space.type_tag() >= 3 {
        let b = epsilon_bound(space, s.epsilon_probes, seed)?;
        v.push(Check::flag("epsilon found on the grid", b.epsilon.is_some(), s.epsilon_probes));
        v.note("C", b.c);
        v.note("epsilon_from_c", b.from_c);
        v.note("epsilon_from_f", b.from_f);
        if let Some(eps) = b.epsilon {
            v.note("epsilon_bound", eps);
            let mut at = vec![eps];
            if space.epsilon() < eps {
                at.insert(0, space.epsilon());
            }
            for (i, e) in at.into_iter().enumerate() {
                let checked = build_scenario(&space.spec().with_epsilon(e))?;
                let opts = ConeOptions {
                    samples: s.cone_samples,
                    tol: cfg.tolerances.cone,
                    ..ConeOptions::default()
                };
                let c = compare_with_background(&checked, &opts, seed ^ (1 + i as u64))?;
                let tag = format!("eps={e}");
                v.push(Check::new(format!("g~ <= g0 violations, {tag}"), c.violation_count as f64, Compare::Equal, 0.0, c.samples));
                v.push(Check::new(format!("g~ <= g0 margin, {tag}"), c.margin, Compare::AtMost, cfg.tolerances.cone, c.samples));
                v.push(Check::new(format!("time orientation, {tag}"), c.orientation, Compare::Below, 0.0, c.samples));
            }
        }
    } else {
        let c = epsilon_convergence(space, &[1e-1, 1e-2, 1e-3], s.epsilon_probes.min(1000), seed);
        v.push(Check::new(
            "C0 convergence slope",
            c.slope,
            Compare::Near { target: 1.0 },
            cfg.tolerances.slope,
            c.epsilons.len(),
        ));
    }
    let k = wedge_dim(space);
    let t = tilted_comparison(k, 5.0, s.cone_samples, seed ^ 7)?;
    v.push(Check::new("g1 < g2 violations", t.violation_count as f64, Compare::Equal, 0.0, t.samples));
    v.push(Check::new("g1 < g2 strict margin", t.margin, Compare::Below, 0.0, t.samples));
    let scan = monotone_scan(
        k,
        &CurveOptions {
            curves: s.scan_curves,
            length: 1.5,
            seed: seed ^ 3,
            ..CurveOptions::default()
        },
    )?;
    v.push(Check::new("eta' - delta xi' along g2 curves", scan.min_rate, Compare::Above, -1e-9, scan.curves));
    v.push(Check::new("return distance", scan.min_return, Compare::Above, 0.0, scan.curves));
    Ok(out)
}

fn timefn(cfg: &Config, space: &LorentzSpace, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Timefn);
    let opts = CurveOptions {
        curves: cfg.samples.time_curves,
        seed,
        ..CurveOptions::default()
    };
    let g = WedgeBackground::plane(40.0);
    let start = |r: &mut ChaCha8Rng| {
        use rand::Rng;
        vec![r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)]
    };
    let r = verify_time_function(&g, cfg.time_function, |_| vec![0.0, 1.0], start, &opts)?;
    out.verdict.push(Check::new("min dT/ds on g1 curves", r.min_rate, Compare::Above, 0.0, r.curves));
    if let Some(c) = &r.counterexample {
        out.curves.push(CurveSet {
            name: "timefn_counterexample".into(),
            title: "causal curve with non-increasing T".into(),
            x_label: "xi".into(),
            y_label: "eta".into(),
            log_scale: false,
            series: vec![Series {
                label: "curve".into(),
                points: c.iter().map(|y| [y[0], y[1]]).collect(),
            }],
            boxes: Vec::new(),
        });
    }
    if space.type_tag() >= 3 {
        let chart = space.chart().clone();
        let o = CurveOptions {
            curves: (opts.curves / 5).max(1),
            length: 1.0,
            ..opts.clone()
        };
        let r = verify_time_function(space, cfg.time_function, |p| time_direction(space, p), |r| chart.sample(r), &o)?;
        out.verdict.push(Check::new("min dT/ds on scenario curves", r.min_rate, Compare::Above, 0.0, r.curves));
    }
    Ok(out)
}

/// Boundary of the plane diamond: the two horizontal edges and the two
/// null arcs `η = c + s(ξ)`.
fn diamond_outline(p1: &[f64; 2], p2: &[f64; 2]) -> Vec<Series> {
    let c1 = diamond::ray_label(p1);
    let c2 = diamond::ray_label(p2);
    let arc = |c: f64, label: &str| {
        let (lo, hi) = (sgn_log_inv(p1[1] - c), sgn_log_inv(p2[1] - c));
        Series {
            label: label.into(),
            points: (0..=64)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / 64.0;
                    [x, c + x.signum() * x.abs().ln_1p()]
                })
                .collect(),
        }
    };
    vec![
        arc(c1, "c = c1"),
        arc(c2, "c = c2"),
        Series {
            label: "eta = eta1".into(),
            points: vec![[sgn_log_inv(p1[1] - c2), p1[1]], [sgn_log_inv(p1[1] - c1), p1[1]]],
        },
        Series {
            label: "eta = eta2".into(),
            points: vec![[sgn_log_inv(p2[1] - c2), p2[1]], [sgn_log_inv(p2[1] - c1), p2[1]]],
        },
    ]
}

fn diamond(cfg: &Config, space: &LorentzSpace, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Diamond);
    let opts = CurveOptions {
        curves: cfg.samples.diamond_curves,
        seed,
        ..CurveOptions::default()
    };
    let inflate = cfg.tolerances.inflate;
    for (i, (p1, p2)) in DIAMOND_PAIRS.iter().enumerate() {
        let r = plane_escape_test(p1, p2, inflate, &opts)?;
        out.verdict.push(Check::new(format!("plane pair {} escape", i + 1), r.max_excess, Compare::AtMost, 0.0, r.curves));
        if i == 0 {
            let b = plane_diamond(p1, p2).expect("pair is causal");
            let mut series = diamond_outline(p1, p2);
            for (j, p) in r.sample_paths.iter().enumerate() {
                series.push(Series {
                    label: format!("curve {}", j + 1),
                    points: p.clone(),
                });
            }
            out.curves.push(CurveSet {
                name: "diamond".into(),
                title: "causal diamond of (0,0) and (0,2)".into(),
                x_label: "xi".into(),
                y_label: "eta".into(),
                log_scale: false,
                series,
                boxes: vec![Rect {
                    label: "bounding box".into(),
                    x: [b.lower[0], b.upper[0]],
                    y: [b.lower[1], b.upper[1]],
                }],
            });
        }
    }
    if space.type_tag() == 4 {
        let k = wedge_dim(space);
        let mut p1 = vec![0.0; k + 2];
        p1[2] = 0.3;
        let r = flat_escape_test(k, &p1, inflate, &opts)?;
        out.verdict.push(Check::new("flat factor escape", r.max_excess, Compare::AtMost, 0.0, r.curves));
        let g = flat_growth(k, 200, 100.0, seed ^ 5)?;
        out.verdict.push(Check::new(
            "growth exponent of F",
            g.exponent,
            Compare::Near { target: 2.0 },
            cfg.tolerances.growth,
            200,
        ));
        out.curves.push(CurveSet {
            name: "growth".into(),
            title: "largest F along causal curves".into(),
            x_label: "eta".into(),
            y_label: "max F".into(),
            log_scale: true,
            series: vec![Series {
                label: "max F".into(),
                points: g.eta.iter().zip(&g.max_f).map(|(e, f)| [*e, *f]).collect(),
            }],
            boxes: Vec::new(),
        });
    }
    Ok(out)
}

fn rays(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Rays);
    let tol = &cfg.tolerances;
    let sq = lightray_exponent(&RayProfile::Eta { coeffs: vec![0.0, 0.0, 1.0] }, 0.0, 0.0, 100.0)?;
    let v = &mut out.verdict;
    v.push(Check::new("exponent, g = eta^2", sq.exponent, Compare::Near { target: 3.0 }, tol.ray_exponent, sq.eta.len()));
    v.push(Check::new(
        "gap to eta^3/3",
        sq.exact_residual.unwrap_or(f64::INFINITY),
        Compare::Below,
        tol.ray_exact,
        sq.path.len(),
    ));
    let mixed = lightray_exponent(&RayProfile::Eta { coeffs: vec![0.0, 1.0, 1.0] }, 0.0, 0.0, 1000.0)?;
    v.push(Check::new(
        "exponent, g = eta^2 + eta",
        mixed.exponent,
        Compare::Near { target: 3.0 },
        tol.ray_exponent,
        mixed.eta.len(),
    ));
    let xi = lightray_exponent(&RayProfile::Xi { coef: 1.0, power: 2.0 / 3.0 }, 1.0, 0.0, 1000.0)?;
    v.push(Check::new("exponent, g = |xi|^(2/3)", xi.exponent, Compare::Near { target: 3.0 }, tol.ray_exponent, xi.eta.len()));
    let thin = |p: &[[f64; 2]]| -> Vec<[f64; 2]> {
        let step = (p.len() / 200).max(1);
        p.iter().step_by(step).copied().collect()
    };
    out.curves.push(CurveSet {
        name: "rays".into(),
        title: "null rays of 2 deta (dxi - g deta)".into(),
        x_label: "eta".into(),
        y_label: "xi".into(),
        log_scale: false,
        series: vec![
            Series {
                label: "g = eta^2".into(),
                points: thin(&sq.path),
            },
            Series {
                label: "eta^3/3".into(),
                points: (0..=100).map(|i| [i as f64, (i as f64).powi(3) / 3.0]).collect(),
            },
        ],
        boxes: Vec::new(),
    });
    Ok(out)
}

fn calabi(cfg: &Config, space: &LorentzSpace, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(Suite::Calabi);
    let mut factors: Vec<CalabiSpace> = space
        .base()
        .factors()
        .iter()
        .filter_map(|f| match f {
            Factor::Calabi { space, .. } => Some(space.clone()),
            _ => None,
        })
        .collect();
    if factors.is_empty() {
        factors.push(CalabiSpace::eguchi_hanson());
    }
    let tol = cfg.tolerances.calabi;
    let n = cfg.samples.calabi_points;
    for (i, c) in factors.iter().enumerate() {
        let tag = format!("C{} #{}", c.m(), i + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let probes: Vec<Vec<f64>> = (0..n).map(|_| c.chart().sample(&mut rng)).collect();
        let v = &mut out.verdict;
        v.push(Check::new(format!("{tag} Ricci norm"), max_ricci_norm(c, &probes)?, Compare::Below, tol, n));
        let (mut db, mut nabla) = (0.0f64, 0.0f64);
        for p in &probes {
            let d = exterior_derivative(&BForm(c), p)?;
            let hat = HatKahler(c).components(&p[..]);
            db = db.max(d.iter().zip(&hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            let cov = covariant_derivative_2form(c, &HatKahler(c), p)?;
            nabla = nabla.max(cov.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
        v.push(Check::new(format!("{tag} dB - hat Phi"), db, Compare::Below, tol, n));
        v.push(Check::new(format!("{tag} nabla hat Phi"), nabla, Compare::Below, tol, n));
        let base = probes[0].clone();
        let m = c.m();
        let fam = lasso_family(c.chart(), &base, 0.1, 2 * m * m, 0.1, &mut rng);
        let lh = loop_holonomy(c, c, &base, &fam, &OdeOptions::default().with_rtol(1e-11), 1e-6)?;
        v.push(Check::new(
            format!("{tag} loop holonomy dimension"),
            lh.algebra.dim() as f64,
            Compare::Equal,
            (m * m - 1) as f64,
            fam.len(),
        ));
    }
    Ok(out)
}
