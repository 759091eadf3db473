//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix};
use seqcert_core::analytic::delta_threshold;
use seqcert_core::certify::{
    build_guessing_program, build_shannon_program, guessing_bound, max_confidence_sdp, shannon_tradeoff,
    EntropyBound, Program, ProgramOptions, Target,
};
use seqcert_core::gaussradau::radau_quadrature;
use seqcert_core::matops::HermitianOperator;
use seqcert_core::quantum::{
    build_mcm_chain, build_preparations, honest_stats, post_measurement_ensemble, simulate_joint, ScenarioParams,
};
use seqcert_core::sdp::{dual_slacks, Sense};

const STEP: f64 = 0.005;
const ZERO: f64 = 1e-6;
const POSITIVE: f64 = 1e-4;

struct Instance {
    bound: EntropyBound,
    program: Program,
}

struct Sweep {
    delta: f64,
    grid: Vec<f64>,
    items: Vec<Instance>,
}

impl Sweep {
    fn bits(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.bound.value_bits).collect()
    }
}

fn grid(x: f64) -> Vec<f64> {
    let n = ((1.0 - x) / STEP + 1e-9).floor() as usize;
    (0..=n).map(|i| (x + STEP * i as f64).min(1.0)).collect()
}

fn sweep(target: Target, delta: f64) -> Sweep {
    let params = ScenarioParams::new(delta, 1.0).unwrap();
    let grid = grid(params.x());
    let opts = ProgramOptions::default();
    let items = grid
        .iter()
        .map(|&q| {
            let stats = honest_stats(&params, q).unwrap();
            let ensemble = match target {
                Target::CharlieTrusted => post_measurement_ensemble(&params, q).unwrap(),
                _ => build_preparations(&params).unwrap(),
            };
            Instance {
                bound: guessing_bound(target, &ensemble, &stats, 0).unwrap(),
                program: build_guessing_program(target, &ensemble, &stats, 0, &opts).unwrap(),
            }
        })
        .collect();
    Sweep { delta, grid, items }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, n: usize, pass: bool, elapsed: Duration, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("criterion {n:>2}: {} ({:.1} s) {detail}", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
}

fn closed_form_confidence(delta: f64, r: f64) -> f64 {
    0.5 * (1.0 + r * (1.0 - delta * delta).sqrt() / (1.0 - r * r * delta * delta).sqrt())
}

fn criterion_1(report: &mut Report) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..9 {
        for j in 0..9 {
            let (delta, r) = (0.9 * i as f64 / 8.0, 0.9 * j as f64 / 8.0);
            let params = ScenarioParams::new(delta, r).unwrap();
            let sdp = max_confidence_sdp(&build_preparations(&params).unwrap()).unwrap();
            worst = worst.max((sdp - closed_form_confidence(delta, r)).abs());
        }
    }
    let t = start.elapsed();
    report.line(1, worst <= 1e-6 && t < Duration::from_secs(30), t, format!("max deviation {worst:.2e}"));
}

fn criterion_2(report: &mut Report, bobs: &[Sweep], t: Duration) {
    let mut pass = t < Duration::from_secs(300);
    let mut detail = Vec::new();
    for s in bobs {
        let crit = (1.0 + s.delta * s.delta) / 2.0;
        let bits = s.bits();
        let first = s.grid.iter().zip(&bits).find(|(_, &b)| b < ZERO).map(|(&q, _)| q);
        pass &= first.is_some_and(|q| (q - crit).abs() <= STEP + 1e-12);
        detail.push(format!("delta {}: first zero at {first:?} vs {crit}", s.delta));
    }
    report.line(2, pass, t, detail.join("; "));
}

fn criterion_3(report: &mut Report, charlies: &[Sweep], t: Duration) {
    let mut pass = t < Duration::from_secs(600);
    let mut detail = Vec::new();
    for s in charlies {
        let x = s.delta;
        let crit = 2.0 * x / (1.0 + x * x);
        let bits = s.bits();
        let below = s.grid.iter().zip(&bits).filter(|(&q, _)| q < crit - STEP).all(|(_, &b)| b < ZERO);
        let above = s.grid.iter().zip(&bits).find(|(&q, _)| q >= crit + STEP - 1e-12);
        let above_ok = above.is_some_and(|(_, &b)| b > POSITIVE);
        let onset = s.grid.iter().zip(&bits).find(|(_, &b)| b >= ZERO).map(|(&q, _)| q);
        pass &= below && above_ok;
        detail.push(format!(
            "delta {}: critical {crit:.6}, first nonzero grid Q {onset:?}, {:.3e} bits one step above",
            s.delta,
            above.map_or(f64::NAN, |(_, b)| *b)
        ));
    }
    report.line(3, pass, t, detail.join("; "));
}

fn window(bob: &Sweep, charlie: &Sweep) -> Option<f64> {
    bob.grid
        .iter()
        .zip(bob.bits().iter().zip(charlie.bits()))
        .find(|(_, (&b, c))| b > POSITIVE && *c > POSITIVE)
        .map(|(&q, _)| q)
}

fn criterion_4(report: &mut Report, bobs: &[Sweep], charlies: &[Sweep], t: Duration) {
    let wide = window(&bobs[1], &charlies[1]);
    let narrow = window(&bobs[0], &charlies[0]);
    report.line(
        4,
        wide.is_some() && narrow.is_none(),
        t,
        format!("delta 0.25 window at {wide:?}; delta 0.5 window {narrow:?}"),
    );
}

fn criterion_5(report: &mut Report) {
    let start = Instant::now();
    let d: Vec<f64> = (2..=6).map(|n| delta_threshold(n).unwrap()).collect();
    let t = start.elapsed();
    let pass = (d[0] - 0.2956).abs() <= 5e-4
        && (d[1] - 0.1316).abs() <= 5e-4
        && (d[2] - 0.0635).abs() <= 5e-4
        && d.windows(2).all(|w| w[1] < w[0])
        && t < Duration::from_secs(1);
    report.line(5, pass, t, format!("{d:.5?}"));
}

fn criterion_6(report: &mut Report) {
    let start = Instant::now();
    let q = radau_quadrature(2).unwrap();
    let mut worst = [
        (q.nodes[0] - 1.0 / 3.0).abs(),
        (q.nodes[1] - 1.0).abs(),
        (q.weights[0] - 0.75).abs(),
        (q.weights[1] - 0.25).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    for m in 2..=16 {
        let q = radau_quadrature(m).unwrap();
        for k in 0..=2 * m - 2 {
            worst = worst.max((q.integrate(|t| t.powi(k as i32)) - 1.0 / (k as f64 + 1.0)).abs());
        }
    }
    report.line(6, worst <= 1e-12, start.elapsed(), format!("max error {worst:.2e}"));
}

fn shannon_instances() -> (Vec<Instance>, f64) {
    let params = ScenarioParams::new(0.5, 1.0).unwrap();
    let ensemble = build_preparations(&params).unwrap();
    let stats = honest_stats(&params, 0.55).unwrap();
    let items = [2, 4, 8, 12]
        .iter()
        .map(|&m| Instance {
            bound: shannon_tradeoff(Target::Bob, &ensemble, m, &stats, 0).unwrap(),
            program: build_shannon_program(Target::Bob, &ensemble, m, &stats, 0, &ProgramOptions::default()).unwrap(),
        })
        .collect();
    let dist = simulate_joint(&build_mcm_chain(&params, 0.55).unwrap(), &ensemble).unwrap();
    let entropy = (0..3).map(|b| dist.bob_marginal(b, 0)).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    (items, entropy)
}

fn criterion_7(report: &mut Report, items: &[Instance], entropy: f64, t: Duration) {
    let v: Vec<f64> = items.iter().map(|i| i.bound.value_bits).collect();
    let pass = v.windows(2).all(|w| w[1] >= w[0]) && v[3] <= entropy + 1e-6 && t < Duration::from_secs(300);
    report.line(7, pass, t, format!("m = 2, 4, 8, 12: {v:.7?}; H(p(b|x*)) = {entropy:.7}"));
}

fn reference_min_eigenvalue(h: &HermitianOperator) -> f64 {
    let n = h.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let z = h.get(i, j);
        Complex::new(z.re, z.im)
    });
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn criterion_8(report: &mut Report, all: &[&Instance]) {
    let start = Instant::now();
    let mut failures = 0;
    let mut max_gap = 0.0f64;
    let mut max_certified_gap = 0.0f64;
    let mut min_slack = f64::INFINITY;
    for inst in all {
        let b = &inst.bound;
        let sound = match inst.program.problem.sense {
            Sense::Maximize => b.primal_value <= b.certificate.certified_value,
            Sense::Minimize => b.certificate.certified_value <= b.primal_value,
        };
        let slack = dual_slacks(&inst.program.problem, &b.certificate.multipliers)
            .iter()
            .map(reference_min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        if !(sound && b.gap <= 1e-6 && b.certificate.valid && slack >= 0.0) {
            failures += 1;
        }
        max_gap = max_gap.max(b.gap);
        max_certified_gap = max_certified_gap.max(b.certified_gap);
        min_slack = min_slack.min(slack);
    }
    report.line(
        8,
        failures == 0,
        start.elapsed(),
        format!(
            "{} instances, {failures} failing; max solver gap {max_gap:.2e}, min recomputed slack eigenvalue {min_slack:.2e}, max certified gap {max_certified_gap:.2e}",
            all.len()
        ),
    );
}

fn criterion_9(report: &mut Report, trusted: &Sweep, t: Duration) {
    let bits = trusted.bits();
    let (i, _) = bits.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &b)| if b > acc.1 { (i, b) } else { acc });
    let q = trusted.grid[i];
    let x = trusted.delta;
    // Grid point where Charlie's rate x/Q equals one half.
    let target = 2.0 * x;
    report.line(
        9,
        (q - target).abs() <= STEP + 1e-12,
        t,
        format!("peak {:.6} bits at Q = {q}, Charlie rate {:.6}", bits[i], x / q),
    );
}

fn criterion_10(report: &mut Report) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_seqcert"))
            .args(["sweep", "--delta", "0.5", "--r", "1", "--q-step", "0.025", "--targets", "bob,charlie"])
            .arg("--output")
            .arg(&out)
            .env("SEQCERT_WORKERS", workers)
            .status()
            .unwrap();
        (status.success(), std::fs::read(out).unwrap_or_default())
    };
    let (ok_a, a) = run("a.csv", "1");
    let (ok_b, b) = run("b.csv", "4");
    let (ok_c, c) = run("c.csv", "4");
    let pass = ok_a && ok_b && ok_c && !a.is_empty() && a == b && b == c;
    report.line(10, pass, start.elapsed(), format!("{} bytes, three runs identical: {}", a.len(), a == b && b == c));
}

fn main() {
    let mut report = Report { failures: 0 };
    criterion_1(&mut report);

    let start = Instant::now();
    let bobs = [sweep(Target::Bob, 0.5), sweep(Target::Bob, 0.25)];
    let t_bob = start.elapsed();
    criterion_2(&mut report, &bobs, t_bob);

    let start = Instant::now();
    let charlies = [sweep(Target::Charlie, 0.5), sweep(Target::Charlie, 0.25)];
    let t_charlie = start.elapsed();
    criterion_3(&mut report, &charlies, t_charlie);
    criterion_4(&mut report, &bobs, &charlies, t_bob + t_charlie);
    criterion_5(&mut report);
    criterion_6(&mut report);

    let start = Instant::now();
    let (shannon, entropy) = shannon_instances();
    criterion_7(&mut report, &shannon, entropy, start.elapsed());

    let all: Vec<&Instance> =
        bobs.iter().chain(&charlies).flat_map(|s| s.items.iter()).chain(shannon.iter()).collect();
    criterion_8(&mut report, &all);

    let start = Instant::now();
    let trusted = sweep(Target::CharlieTrusted, 0.5);
    criterion_9(&mut report, &trusted, start.elapsed());
    criterion_10(&mut report);

    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
