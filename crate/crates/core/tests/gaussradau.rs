use proptest::prelude::*;
use seqcert_core::gaussradau::radau_quadrature;

#[test]
fn two_node_rule() {
    let q = radau_quadrature(2).unwrap();
    assert!((q.nodes[0] - 1.0 / 3.0).abs() < 1e-14);
    assert!((q.nodes[1] - 1.0).abs() < 1e-14);
    assert!((q.weights[0] - 0.75).abs() < 1e-14);
    assert!((q.weights[1] - 0.25).abs() < 1e-14);
}

#[test]
fn nodes_and_weights_are_admissible() {
    for m in 2..=64 {
        let q = radau_quadrature(m).unwrap();
        assert_eq!(q.nodes.len(), m);
        assert!(q.weights.iter().all(|&w| w > 0.0), "m = {m}");
        assert!(q.nodes.iter().all(|&t| t > 0.0 && t <= 1.0), "m = {m}");
        assert_eq!(q.nodes[m - 1], 1.0);
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn constant_grows_with_nodes() {
    let c: Vec<f64> = (2..=64).map(|m| radau_quadrature(m).unwrap().c_m).collect();
    assert!(c.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn tau_matches_weights() {
    let q = radau_quadrature(8).unwrap();
    for i in 0..8 {
        assert!((q.tau[i] - q.weights[i] / (q.nodes[i] * std::f64::consts::LN_2)).abs() < 1e-14);
    }
    let free: f64 = q.tau[..7].iter().sum();
    assert!((q.c_m - free).abs() < 1e-14);
}

#[test]
fn out_of_range_counts_are_rejected() {
    assert!(radau_quadrature(1).is_err());
    assert!(radau_quadrature(65).is_err());
}

proptest! {
    #[test]
    fn exact_for_polynomials_up_to_degree_2m_minus_2(m in 2usize..=16, coeffs in prop::collection::vec(-1.0f64..1.0, 31)) {
        let q = radau_quadrature(m).unwrap();
        let deg = 2 * m - 2;
        let c = &coeffs[..=deg];
        let exact: f64 = c.iter().enumerate().map(|(k, a)| a / (k as f64 + 1.0)).sum();
        let approx = q.integrate(|t| c.iter().rev().fold(0.0, |acc, a| acc * t + a));
        prop_assert!((approx - exact).abs() < 1e-12, "m = {}, err = {:e}", m, approx - exact);
    }
}
