use bochner_core::bernstein::{make_catalog, BernsteinFunction};
use bochner_core::legendre::{nfunction_catalog, power_law, power_nash};
use bochner_core::spectral::{
    check_super_poincare, fourier_rate_function, Phi, Report, SampleSet, SpectralModel, TestFunction,
};
use bochner_core::subordination::{stable_half_measure, subordinate_semigroup};
use bochner_core::transforms::{sandwich_bounds, transfer_beta};
use proptest::prelude::*;

fn catalog() -> impl Strategy<Value = BernsteinFunction> {
    prop_oneof![
        (0.05f64..1.0).prop_map(|a| make_catalog("power", &[a]).unwrap()),
        Just(make_catalog("log1p", &[]).unwrap()),
        (0.1f64..1.0, 0.1f64..1.0).prop_map(|(a, c)| make_catalog("logpow", &[a, c]).unwrap()),
        (0.1f64..10.0).prop_map(|l| make_catalog("elementary", &[l]).unwrap()),
        (0.0f64..2.0, 0.1f64..3.0).prop_map(|(a, b)| make_catalog("affine", &[a, b]).unwrap()),
    ]
}

fn bijective() -> impl Strategy<Value = BernsteinFunction> {
    prop_oneof![
        (0.1f64..1.0).prop_map(|a| make_catalog("power", &[a]).unwrap()),
        Just(make_catalog("log1p", &[]).unwrap()),
        (0.2f64..1.0, 0.3f64..1.0).prop_map(|(a, c)| make_catalog("logpow", &[a, c]).unwrap()),
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    (-4.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bernstein_is_monotone_and_concave(g in catalog(), x in positive(), y in positive()) {
        let (lo, hi) = (x.min(y), x.max(y));
        let scale = g.eval(hi).abs().max(1.0);
        prop_assert!(g.eval(lo) >= 0.0);
        prop_assert!(g.eval(lo) <= g.eval(hi) * (1.0 + 1e-12));
        let mid = g.eval(0.5 * (lo + hi));
        prop_assert!(mid >= 0.5 * (g.eval(lo) + g.eval(hi)) - 1e-12 * scale);
    }

    #[test]
    fn closed_inverse_round_trips(g in bijective(), x in positive()) {
        let back = g.invert(g.eval(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-8 * x, "{} at {x}: {back}", g.name());
    }

    #[test]
    fn young_inequality(p in 1.1f64..4.0, t in 0.0f64..5.0, x in 0.0f64..50.0, which in 0usize..4) {
        let id = match which {
            0 => format!("h1:{p}"),
            1 => "h2".to_string(),
            2 => "h3".to_string(),
            _ => format!("h4:{p}"),
        };
        let pair = nfunction_catalog(&id).unwrap();
        let scale = (t * x).max(1.0);
        prop_assert!(pair.young_gap(t, x) >= -1e-9 * scale, "{id} t={t} x={x}");
    }

    #[test]
    fn transferred_rate_is_non_increasing(g in bijective(), n in 1.0f64..4.0, r in positive(), k in 1.01f64..10.0) {
        let bg = transfer_beta(&power_law(n, 1.0), &g).unwrap();
        let (a, b) = (bg.eval(r), bg.eval(r * k));
        prop_assert!(b <= a * (1.0 + 1e-12) || a.is_infinite());
    }

    #[test]
    fn sandwich_is_ordered(g in bijective(), c in 0.5f64..2.0, p in 0.2f64..2.0, x in positive()) {
        let (lo, hi) = sandwich_bounds(&power_nash(c, p), &g, x).unwrap();
        prop_assert!(lo >= 0.0 && lo <= hi * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subordinated_semigroup_contracts(values in prop::collection::vec(-5.0f64..5.0, 16), t in 0.05f64..5.0) {
        let model = SpectralModel::torus(1, 16, None).unwrap();
        let f = TestFunction::new(&model, values);
        prop_assume!(f.l2 > 1e-9);
        let tf = subordinate_semigroup(&model, &Phi::identity(), &stable_half_measure(t).unwrap(), &f).unwrap();
        prop_assert!(tf.l2 <= f.l2 * (1.0 + 1e-9));
        prop_assert!(tf.l1 <= f.l1 * (1.0 + 1e-9));
    }

    #[test]
    fn fourier_rate_is_sound(values in prop::collection::vec(-5.0f64..5.0, 32), g in bijective()) {
        let model = SpectralModel::torus(1, 32, None).unwrap();
        let base = fourier_rate_function(&model, &Phi::identity()).unwrap();
        let beta = transfer_beta(&base, &g).unwrap().into_rate();
        let samples = SampleSet::new(&model, vec![TestFunction::new(&model, values)]).unwrap();
        let rs = [1e-3, 1e-1, 1.0, 10.0];
        let report = check_super_poincare(&model, &Phi::bernstein(&g), &beta, &rs, &samples).unwrap();
        prop_assert_eq!(report.n_violations, 0);
    }
}

#[test]
fn reports_serialize() {
    let model = SpectralModel::torus(1, 8, None).unwrap();
    let samples = SampleSet::new(&model, vec![TestFunction::new(&model, vec![1.0; 8])]).unwrap();
    let report: Report =
        check_super_poincare(&model, &Phi::identity(), &power_law(1.0, 1.0), &[1.0], &samples).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    assert_eq!(v["n_checked"], 1);
    assert_eq!(v["n_violations"], 0);
}
