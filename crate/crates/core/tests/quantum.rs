use proptest::prelude::*;
use seqcert_core::quantum::{
    build_mcm_chain, build_preparations, honest_stats, max_confidence, post_measurement_params, simulate_joint,
    ScenarioParams,
};

fn closed_form_confidence(delta: f64, r: f64) -> f64 {
    0.5 * (1.0 + r * (1.0 - delta * delta).sqrt() / (1.0 - r * r * delta * delta).sqrt())
}

#[test]
fn reference_confidences() {
    let c = max_confidence(&ScenarioParams::new(0.5, 0.8).unwrap()).unwrap();
    assert!((c - 0.877964).abs() < 1e-6);
    assert_eq!(max_confidence(&ScenarioParams::new(0.0, 1.0).unwrap()).unwrap(), 1.0);
    assert!((max_confidence(&ScenarioParams::new(0.3, 0.0).unwrap()).unwrap() - 0.5).abs() < 1e-12);
    assert!((max_confidence(&ScenarioParams::new(1.0, 1.0).unwrap()).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ScenarioParams::new(1.2, 0.5).is_err());
    assert!(ScenarioParams::new(0.5, 1.5).is_err());
    assert!(ScenarioParams::new(-0.1, 0.5).is_err());
}

#[test]
fn chain_elements_sum_to_identity() {
    let params = ScenarioParams::new(0.4, 0.9).unwrap();
    let chain = build_mcm_chain(&params, 0.7).unwrap();
    let mut total = chain.joint_element(0, 0).scale(0.0);
    for b in 0..3 {
        for c in 0..3 {
            total.axpy(1.0, &chain.joint_element(b, c));
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((total.get(i, j).re - expect).abs() < 1e-12 && total.get(i, j).im.abs() < 1e-12);
        }
    }
    let dist = simulate_joint(&chain, &build_preparations(&params).unwrap()).unwrap();
    for x in 0..2 {
        let s: f64 = dist.table[x].iter().flatten().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(dist.table[x].iter().flatten().all(|&p| p >= -1e-15));
    }
}

fn params_and_rate() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..0.95, 0.05f64..=1.0, 0.0f64..=1.0).prop_map(|(delta, r, u)| {
        let x = r * delta;
        (delta, r, x + (1.0 - x) * u)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn confidence_has_closed_form(delta in 0.0f64..0.99, r in 0.0f64..=1.0) {
        let c = max_confidence(&ScenarioParams::new(delta, r).unwrap()).unwrap();
        prop_assert!((c - closed_form_confidence(delta, r)).abs() < 1e-10);
    }

    #[test]
    fn honest_chain_reproduces_bob_statistics((delta, r, q) in params_and_rate()) {
        let params = ScenarioParams::new(delta, r).unwrap();
        let stats = honest_stats(&params, q).unwrap();
        prop_assert!((stats.conf_b - closed_form_confidence(delta, r)).abs() < 1e-8);
        prop_assert!((stats.inc_b - q).abs() < 1e-8);
    }

    #[test]
    fn post_measurement_purity_and_overlap((delta, r, q) in params_and_rate()) {
        prop_assume!(q > 1e-6);
        let params = ScenarioParams::new(delta, r).unwrap();
        let pm = post_measurement_params(&params, q).unwrap();
        let c = closed_form_confidence(delta, r);
        let x = r * delta;
        let purity = 1.0 - 2.0 * c * (1.0 - c) * (1.0 - (x / q).powi(2));
        prop_assert!(((1.0 + pm.t * pm.t) / 2.0 - purity).abs() < 1e-10);
        prop_assert!((pm.t * pm.s * q - x).abs() < 1e-10);
    }
}
