use std::collections::BTreeMap;

use lorhol::report::{Check, Compare, Report, Series, Tool, Verdict, CurveSet};
use proptest::prelude::*;

fn compare() -> impl Strategy<Value = Compare> {
    prop_oneof![
        Just(Compare::Below),
        Just(Compare::AtMost),
        Just(Compare::Above),
        Just(Compare::Equal),
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|t| Compare::Near { target: t }),
    ]
}

fn check() -> impl Strategy<Value = Check> {
    ("[a-z ]{1,12}", any::<f64>(), compare(), 0.0..1.0f64, 0usize..100_000)
        .prop_map(|(name, v, c, tol, n)| Check::new(name, v, c, tol, n))
}

fn verdict() -> impl Strategy<Value = Verdict> {
    (
        prop::collection::vec(check(), 0..6),
        prop::option::of("[a-z]{0,10}"),
        prop::collection::btree_map("[a-z_]{1,6}", -1e300..1e300f64, 0..4),
    )
        .prop_map(|(checks, error, notes)| {
            let mut v = Verdict::new("cones");
            for c in checks {
                v.push(c);
            }
            v.error = error;
            v.notes = notes;
            v
        })
}

fn curve() -> impl Strategy<Value = CurveSet> {
    prop::collection::vec((-1e6..1e6f64, -1e6..1e6f64), 0..20).prop_map(|pts| CurveSet {
        name: "c".into(),
        title: "t".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        log_scale: false,
        series: vec![Series {
            label: "s".into(),
            points: pts.into_iter().map(|(a, b)| [a, b]).collect(),
        }],
        boxes: Vec::new(),
    })
}

proptest! {
    #[test]
    fn json_round_trip_is_lossless(
        seed in any::<u64>(),
        suites in prop::collection::vec(verdict(), 0..4),
        curves in prop::collection::vec(curve(), 0..2),
        t in 0.0..100.0f64,
    ) {
        let pass = suites.iter().all(|v| v.pass);
        let r = Report {
            schema_version: 1,
            tool: Tool::current(),
            seed,
            scenario: None,
            suites,
            holonomy: None,
            curves,
            pass,
            timing: BTreeMap::from([("cones".to_string(), t)]),
        };
        let back = Report::from_json(&r.to_json()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn every_check_carries_tolerance_and_samples(c in check()) {
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        prop_assert!(v["tolerance"].is_number());
        prop_assert!(v["samples"].is_u64());
        prop_assert!(v["value"].is_number());
    }
}
