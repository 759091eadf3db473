#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use seqcert_core::certify::{Program, Target};
use seqcert_core::matops::HermitianOperator;
use seqcert_core::quantum::MCMChain;
use seqcert_core::sdp::{place, Placement, SdpProblem};

/// Smallest eigenvalue computed by nalgebra, independent of the crate's own solver.
pub fn reference_min_eigenvalue(h: &HermitianOperator) -> f64 {
    let n = h.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let z = h.get(i, j);
        Complex64::new(z.re, z.im)
    });
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest constraint violation of `blocks`: equalities in absolute value,
/// `≥` rows by their shortfall.
pub fn primal_residual(problem: &SdpProblem, blocks: &[HermitianOperator]) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..problem.num_constraints() {
        let c = problem.constraint(k);
        let lhs: f64 = c
            .terms
            .iter()
            .map(|t| seqcert_core::frobenius_inner(&t.coeff, &blocks[t.block]).unwrap())
            .sum();
        let r = if problem.is_inequality(k) { (c.rhs - lhs).max(0.0) } else { (lhs - c.rhs).abs() };
        worst = worst.max(r);
    }
    worst
}

/// Objective of `blocks`, in the problem's own sense.
pub fn objective_value(problem: &SdpProblem, blocks: &[HermitianOperator]) -> f64 {
    problem.objective.constant
        + problem
            .objective
            .terms
            .iter()
            .map(|t| seqcert_core::frobenius_inner(&t.coeff, &blocks[t.block]).unwrap())
            .sum::<f64>()
}

fn parse_indices(label: &str) -> Vec<String> {
    label.split('[').skip(1).map(|s| s.trim_end_matches(']').to_string()).collect()
}

fn outcome(s: &str) -> Option<usize> {
    s.parse().ok()
}

/// The honest chain as a single-strategy primal point: one strategy label
/// carries the chain's elements and every other block is zero. Gauss–Radau
/// lifts hold the element in their top-left corner.
pub fn honest_point(program: &Program, target: Target, chain: &MCMChain) -> Vec<HermitianOperator> {
    let p = &program.problem;
    let element = |b: Option<usize>, c: Option<usize>| match (target, b, c) {
        (Target::CharlieTrusted, Some(c), None) => chain.charlie_povm[c].clone(),
        (_, Some(b), None) => chain.bob_povm[b].clone(),
        (_, Some(b), Some(c)) => chain.joint_element(b, c),
        _ => unreachable!(),
    };
    p.blocks
        .iter()
        .map(|spec| {
            let idx = parse_indices(&spec.label);
            let name = spec.label.split('[').next().unwrap();
            match name {
                // M[l][b]: strategy l = 0 carries the measurement.
                "M" => {
                    if idx[0] == "0" {
                        element(outcome(&idx[1]), None)
                    } else {
                        HermitianOperator::zeros(spec.size)
                    }
                }
                // Semi-DI guessing blocks G[λ][b][c]; Shannon blocks G[b] or G[b][c].
                "G" if idx.len() == 3 => {
                    if idx[0] == "0" {
                        element(outcome(&idx[1]), outcome(&idx[2]))
                    } else {
                        HermitianOperator::zeros(spec.size)
                    }
                }
                "G" => element(outcome(&idx[0]), idx.get(1).and_then(|s| outcome(s))),
                "Y" => {
                    let mut parts = idx[2].split(',');
                    let b = parts.next().and_then(outcome);
                    let c = parts.next().and_then(outcome);
                    place(spec.size, &element(b, c), Placement::Diagonal(0))
                }
                other => panic!("unexpected block {other}"),
            }
        })
        .collect()
}
