mod common;

use proptest::prelude::*;
use seqcert_core::certify::{
    build_guessing_program, build_shannon_program, eat_at, eat_first_order, guessing_bound, guessing_bound_with,
    max_confidence_sdp, shannon_tradeoff, shannon_tradeoff_with, BoundKind, EntropyBound, ProgramOptions, Target,
};
use seqcert_core::matops::HermitianOperator;
use seqcert_core::quantum::{
    build_mcm_chain, build_preparations, honest_stats, max_confidence, post_measurement_ensemble, simulate_joint,
    ObservedStats, ScenarioParams,
};
use seqcert_core::sdp::{verify_certificate, DualCertificate, SolveStatus};

fn scenario(delta: f64, r: f64) -> ScenarioParams {
    ScenarioParams::new(delta, r).unwrap()
}

fn bound(target: Target, delta: f64, r: f64, q: f64) -> EntropyBound {
    let params = scenario(delta, r);
    let stats = honest_stats(&params, q).unwrap();
    let ensemble = match target {
        Target::CharlieTrusted => post_measurement_ensemble(&params, q).unwrap(),
        _ => build_preparations(&params).unwrap(),
    };
    guessing_bound(target, &ensemble, &stats, 0).unwrap()
}

fn shannon(target: Target, delta: f64, r: f64, q: f64, m: usize) -> EntropyBound {
    let params = scenario(delta, r);
    let stats = honest_stats(&params, q).unwrap();
    shannon_tradeoff(target, &build_preparations(&params).unwrap(), m, &stats, 0).unwrap()
}

fn binary_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

fn closed_form_confidence(delta: f64, r: f64) -> f64 {
    0.5 * (1.0 + r * (1.0 - delta * delta).sqrt() / (1.0 - r * r * delta * delta).sqrt())
}

#[test]
fn confidence_program_examples() {
    let c = |delta, r| max_confidence_sdp(&build_preparations(&scenario(delta, r)).unwrap()).unwrap();
    assert!((c(0.0, 1.0) - 1.0).abs() < 1e-6);
    assert!((c(0.5, 0.8) - 0.877964).abs() < 1e-6);
    assert!((c(0.5, 0.8) - closed_form_confidence(0.5, 0.8)).abs() < 1e-6);
    assert!((c(0.3, 0.0) - 0.5).abs() < 1e-6);
}

#[test]
fn orthogonal_states_give_no_randomness() {
    let params = scenario(0.0, 1.0);
    let b = guessing_bound(Target::Bob, &build_preparations(&params).unwrap(), &ObservedStats::bob_only(1.0, 0.0), 0)
        .unwrap();
    assert!((b.guessing_prob.unwrap() - 1.0).abs() < 1e-6);
    assert!(b.value_bits < 1e-6);
    assert_eq!(b.kind, BoundKind::MinEntropy);
}

#[test]
fn bob_randomness_vanishes_above_critical_rate() {
    for q in [0.625, 0.7, 0.85, 1.0] {
        assert!(bound(Target::Bob, 0.5, 1.0, q).value_bits < 1e-6, "Q = {q}");
    }
}

#[test]
fn charlie_randomness_vanishes_below_critical_rate() {
    for q in [0.5, 0.6, 0.7, 0.79] {
        assert!(bound(Target::Charlie, 0.5, 1.0, q).value_bits < 1e-6, "Q = {q}");
    }
}

#[test]
fn joint_randomness_inside_window() {
    for q in [0.48, 0.5, 0.52] {
        let b = bound(Target::Joint, 0.25, 1.0, q);
        assert!(b.value_bits > 0.0, "Q = {q}");
        assert!(b.gap <= 1e-6);
    }
}

#[test]
fn unphysical_statistics_still_bounded() {
    let params = scenario(0.5, 1.0);
    let ensemble = build_preparations(&params).unwrap();
    let b = guessing_bound(Target::Bob, &ensemble, &ObservedStats::bob_only(1.0, 0.0), 0).unwrap();
    assert_eq!(b.status, SolveStatus::Infeasible);
    assert!(b.certificate.valid);
    assert!(b.guessing_prob.unwrap().is_finite());
    let s = shannon_tradeoff(Target::Bob, &ensemble, 4, &ObservedStats::bob_only(1.0, 0.0), 0).unwrap();
    assert!(s.certificate.valid && s.value_bits.is_finite());
}

#[test]
fn preparation_choice_is_immaterial() {
    let params = scenario(0.4, 0.9);
    let ensemble = build_preparations(&params).unwrap();
    let stats = honest_stats(&params, 0.45).unwrap();
    for target in [Target::Bob, Target::Charlie] {
        let a = guessing_bound(target, &ensemble, &stats, 0).unwrap();
        let b = guessing_bound(target, &ensemble, &stats, 1).unwrap();
        assert!((a.primal_value - b.primal_value).abs() <= 1e-8, "{target:?}");
    }
}

#[test]
fn hand_built_dual_point() {
    let params = scenario(0.0, 1.0);
    let ensemble = build_preparations(&params).unwrap();
    let stats = ObservedStats::bob_only(1.0, 0.0);
    let program = build_guessing_program(Target::Bob, &ensemble, &stats, 0, &ProgramOptions::default()).unwrap();
    let y = program.dual_point(&HermitianOperator::identity(2), &[]);
    let cert = verify_certificate(&program.problem, &DualCertificate::candidate(y)).unwrap();
    assert!(cert.valid);
    assert!(cert.certified_value >= 2.0 && cert.certified_value - 2.0 < 1e-9);

    let y = program.dual_point(&HermitianOperator::identity(2).scale(1.0 - 1e-2), &[]);
    let cert = verify_certificate(&program.problem, &DualCertificate::candidate(y)).unwrap();
    assert!(!cert.valid);
}

#[test]
fn solver_point_at_corner_is_sound() {
    let b = bound(Target::Bob, 0.5, 1.0, 0.5);
    assert!(b.certificate.valid);
    assert!(b.certificate.certified_value >= b.primal_value);
}

#[test]
#[ignore = "degree-two corner: f64 verification cannot close the certified gap below ~4e-4"]
fn solver_point_at_corner_is_tight() {
    let b = bound(Target::Bob, 0.5, 1.0, 0.5);
    assert!(b.certificate.certified_value - b.primal_value <= 1e-6, "{}", b.certified_gap);
}

#[test]
fn shannon_vanishes_for_orthogonal_states() {
    let b = shannon(Target::Bob, 0.0, 1.0, 0.0, 8);
    assert!(b.value_bits < 1e-6, "{}", b.value_bits);
}

#[test]
fn shannon_tightens_with_nodes() {
    let v: Vec<f64> = [2, 4, 8].iter().map(|&m| shannon(Target::Bob, 0.5, 1.0, 0.5, m).value_bits).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0]), "{v:?}");
}

#[test]
fn shannon_tightens_with_nodes_through_twelve() {
    let v: Vec<f64> = [2, 4, 8, 12].iter().map(|&m| shannon(Target::Bob, 0.5, 1.0, 0.5, m).value_bits).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0]), "{v:?}");
}

#[test]
fn shannon_below_honest_entropy() {
    let params = scenario(0.5, 1.0);
    let ensemble = build_preparations(&params).unwrap();
    for q in [0.5, 0.55] {
        let stats = honest_stats(&params, q).unwrap();
        let dist = simulate_joint(&build_mcm_chain(&params, q).unwrap(), &ensemble).unwrap();
        let marginal: Vec<f64> = (0..3).map(|b| dist.bob_marginal(b, 0)).collect();
        let opts = ProgramOptions { confidence_equality: true, ..Default::default() };
        let b = shannon_tradeoff_with(Target::Bob, &ensemble, 12, &stats, 0, &opts).unwrap();
        assert!(b.value_bits <= binary_entropy(&marginal) + 1e-6, "Q = {q}");
    }
}

#[test]
fn tradeoff_evaluation() {
    let b = shannon(Target::Bob, 0.5, 1.0, 0.55, 4);
    assert_eq!(eat_first_order(&b).unwrap(), b.value_bits);
    let coeffs = b.tradeoff_coeffs.unwrap();
    assert!((coeffs.evaluate(&b.stats).max(0.0) - b.value_bits).abs() < 1e-6);

    let corner = ObservedStats::bob_only(1.0, 1.0);
    let affine = coeffs.c_m - coeffs.g_b - coeffs.trace_r;
    assert!((coeffs.evaluate(&corner) - affine).abs() < 1e-12);
    assert_eq!(eat_at(&b, &corner).unwrap(), affine.max(0.0));

    let negative = [(0.5, 1.0), (0.5, 0.9), (0.6, 0.8)]
        .iter()
        .map(|&(c, q)| ObservedStats::bob_only(c, q))
        .find(|s| coeffs.evaluate(s) < 0.0)
        .expect("some statistics make the affine function negative");
    assert_eq!(eat_at(&b, &negative).unwrap(), 0.0);

    let g = bound(Target::Bob, 0.5, 1.0, 0.55);
    assert!(eat_first_order(&g).is_err());
    assert!(eat_at(&g, &corner).is_err());
}

#[test]
fn bob_bound_nonincreasing_in_rate() {
    for (delta, r) in [(0.5, 1.0), (0.3, 0.8)] {
        let x: f64 = r * delta;
        let n = ((1.0 - x) / 0.01).floor() as usize;
        let v: Vec<f64> = (0..=n).map(|i| bound(Target::Bob, delta, r, x + 0.01 * i as f64).value_bits).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-7), "{v:?}");
    }
}

#[test]
fn zero_crossings_match_critical_rates() {
    let (delta, r) = (0.4, 1.0);
    let x: f64 = r * delta;
    let grid: Vec<f64> = (0..).map(|i| x + 0.01 * i as f64).take_while(|&q| q <= 1.0 + 1e-12).collect();
    let q_bob = (1.0 + x * x) / 2.0;
    let q_charlie = 2.0 * x / (1.0 + x * x);
    let first_zero = grid.iter().copied().find(|&q| bound(Target::Bob, delta, r, q).value_bits < 1e-6).unwrap();
    assert!((first_zero - q_bob).abs() <= 0.01, "{first_zero}");
    let last_zero =
        grid.iter().copied().filter(|&q| bound(Target::Charlie, delta, r, q).value_bits < 1e-6).fold(0.0, f64::max);
    assert!((last_zero - q_charlie).abs() <= 0.01, "{last_zero}");
}

#[test]
fn shannon_two_nodes_below_sixteen() {
    for q in [0.6, 0.75, 0.9] {
        let lo = shannon(Target::Bob, 0.5, 1.0, q, 2).value_bits;
        let hi = shannon(Target::Bob, 0.5, 1.0, q, 16).value_bits;
        assert!(lo <= hi + 1e-9, "Q = {q}: {lo} vs {hi}");
    }
    let lo = shannon(Target::Charlie, 0.5, 1.0, 0.9, 2).value_bits;
    let hi = shannon(Target::Charlie, 0.5, 1.0, 0.9, 16).value_bits;
    assert!(lo <= hi + 1e-9, "{lo} vs {hi}");
}

#[test]
fn trusted_charlie_has_no_shannon_program() {
    let params = scenario(0.5, 1.0);
    let ensemble = build_preparations(&params).unwrap();
    let stats = honest_stats(&params, 0.6).unwrap();
    assert!(shannon_tradeoff(Target::CharlieTrusted, &ensemble, 4, &stats, 0).is_err());
    assert!(shannon_tradeoff(Target::Bob, &ensemble, 17, &stats, 0).is_err());
}

fn interior() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.1f64..0.6, 0.7f64..=1.0, 0.1f64..0.9).prop_map(|(delta, r, u)| {
        let x = r * delta;
        (delta, r, x + 0.05 + (0.95 - x - 0.05) * u)
    })
}

fn anywhere() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..0.8, 0.3f64..=1.0, 0.0f64..=1.0).prop_map(|(delta, r, u)| {
        let x = r * delta;
        (delta, r, x + (1.0 - x) * u)
    })
}

fn target() -> impl Strategy<Value = Target> {
    prop::sample::select(Target::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dual_bound_sandwiches_primal(t in target(), (delta, r, q) in anywhere()) {
        let b = bound(t, delta, r, q);
        prop_assert!(b.certificate.valid);
        prop_assert!(b.certificate.certified_value >= b.primal_value - b.gap);
        prop_assert!(b.gap <= 1e-6, "gap {}", b.gap);
        let p = b.guessing_prob.unwrap();
        let expect = (-p.log2()).max(0.0);
        prop_assert!((b.value_bits - expect).abs() <= 1e-9);

        let params = scenario(delta, r);
        let ensemble = match t {
            Target::CharlieTrusted => post_measurement_ensemble(&params, q).unwrap(),
            _ => build_preparations(&params).unwrap(),
        };
        let program = build_guessing_program(t, &ensemble, &b.stats, 0, &ProgramOptions::default()).unwrap();
        let honest = common::honest_point(&program, t, &build_mcm_chain(&params, q).unwrap());
        prop_assert!(b.certificate.certified_value >= common::objective_value(&program.problem, &honest));
    }

    #[test]
    fn interior_certified_gap_is_small(
        t in prop::sample::select(vec![Target::Bob, Target::Charlie]),
        (delta, r, q) in interior(),
    ) {
        let b = bound(t, delta, r, q);
        prop_assert!(b.certified_gap <= 1e-6, "{:?} at ({}, {}, {}): {}", t, delta, r, q, b.certified_gap);
    }

    #[test]
    fn shannon_dual_bound_sits_below_primal((delta, r, q) in anywhere(), m in 2usize..=4) {
        let params = scenario(delta, r);
        let stats = honest_stats(&params, q).unwrap();
        let ensemble = build_preparations(&params).unwrap();
        let opts = ProgramOptions { confidence_equality: true, ..Default::default() };
        let b = shannon_tradeoff_with(Target::Bob, &ensemble, m, &stats, 0, &opts).unwrap();
        prop_assert!(b.certificate.valid);
        prop_assert!(b.certificate.certified_value <= b.primal_value + b.gap);
        prop_assert!(b.gap <= 1e-6, "gap {}", b.gap);
        let program = build_shannon_program(Target::Bob, &ensemble, m, &stats, 0, &opts).unwrap();
        let honest = common::honest_point(&program, Target::Bob, &build_mcm_chain(&params, q).unwrap());
        prop_assert!(b.certificate.certified_value <= common::objective_value(&program.problem, &honest));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_chain_is_primal_feasible(t in target(), (delta, r, q) in anywhere(), m in 2usize..=4) {
        let params = scenario(delta, r);
        let stats = honest_stats(&params, q).unwrap();
        let opts = ProgramOptions { confidence_equality: true, ..Default::default() };
        let chain = build_mcm_chain(&params, q).unwrap();
        let ensemble = match t {
            Target::CharlieTrusted => post_measurement_ensemble(&params, q).unwrap(),
            _ => build_preparations(&params).unwrap(),
        };
        let program = build_guessing_program(t, &ensemble, &stats, 0, &opts).unwrap();
        let point = common::honest_point(&program, t, &chain);
        prop_assert!(common::primal_residual(&program.problem, &point) <= 1e-8);
        prop_assert!(point.iter().all(|b| b.min_eigenvalue() >= -1e-12));
        if t != Target::CharlieTrusted {
            let program = build_shannon_program(t, &ensemble, m, &stats, 0, &opts).unwrap();
            let point = common::honest_point(&program, t, &chain);
            prop_assert!(common::primal_residual(&program.problem, &point) <= 1e-8);
        }
    }
}

#[test]
#[ignore = "near the degree-two corners and for the trusted receiver f64 verification leaves gaps up to ~4e-4"]
fn certified_gap_is_small_everywhere() {
    for t in Target::ALL {
        for i in 0..=20 {
            let q = 0.5 + 0.025 * i as f64;
            let b = bound(t, 0.5, 1.0, q);
            assert!(b.certified_gap <= 1e-6, "{t:?} at Q = {q}: {}", b.certified_gap);
        }
    }
}

#[test]
fn confidence_statistics_match_closed_form() {
    let params = scenario(0.5, 1.0);
    let stats = honest_stats(&params, 0.7).unwrap();
    assert!((stats.conf_b - max_confidence(&params).unwrap()).abs() < 1e-10);
    let b = guessing_bound_with(
        Target::Bob,
        &build_preparations(&params).unwrap(),
        &stats,
        0,
        &ProgramOptions { confidence_equality: true, ..Default::default() },
    )
    .unwrap();
    assert!(b.certificate.valid);
}
