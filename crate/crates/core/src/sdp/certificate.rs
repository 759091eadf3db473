//! Rigorous dual bounds from approximate multipliers.

use serde::{Deserialize, Serialize};

use super::problem::{RepairMove, SdpProblem, Sense};
use super::solver::SdpSolution;
use crate::error::{Error, Result};
use crate::matops::{ComplexMatrix, HermitianOperator, C64};

/// Pre-repair violations above this cannot be absorbed.
pub const MAX_ABSORBED_VIOLATION: f64 = 1e-4;
const MAX_SHIFT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// Multipliers of the minimization form, equalities first then inequalities.
    pub multipliers: Vec<f64>,
    /// Largest eigenvalue of any `−S` block; nonpositive for a feasible point.
    pub slack_margin: f64,
    /// Bound implied by the multipliers, rounded to the conservative side.
    pub certified_value: f64,
    pub valid: bool,
    /// Largest negative slack eigenvalue before repair, as a positive number.
    pub raw_violation: f64,
    /// Total multiplier displacement applied by repair moves.
    pub shift: f64,
}

impl DualCertificate {
    /// An unverified candidate wrapping raw multipliers.
    pub fn candidate(multipliers: Vec<f64>) -> Self {
        Self {
            multipliers,
            slack_margin: f64::NAN,
            certified_value: f64::NAN,
            valid: false,
            raw_violation: f64::NAN,
            shift: 0.0,
        }
    }

    pub fn from_solution(solution: &SdpSolution) -> Self {
        Self::candidate(solution.dual_multipliers.clone())
    }
}

fn sense_sign(sense: Sense) -> f64 {
    match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    }
}

/// Recomputes `S_β = C_β − Σ_k y_k A_kβ` for every block, accumulating
/// each entry with compensated products and sums.
pub fn dual_slacks(problem: &SdpProblem, y: &[f64]) -> Vec<HermitianOperator> {
    accumulate_slacks(problem, y).into_iter().map(|a| a.slack).collect()
}

struct SlackBlock {
    slack: HermitianOperator,
    /// Bound on the spectral norm of the rounding error in `slack`.
    rounding: f64,
}

fn accumulate_slacks(problem: &SdpProblem, y: &[f64]) -> Vec<SlackBlock> {
    let sign = sense_sign(problem.sense);
    let sizes: Vec<usize> = problem.blocks.iter().map(|b| b.size).collect();
    let mut hi: Vec<Vec<f64>> = sizes.iter().map(|n| vec![0.0; 2 * n * n]).collect();
    let mut lo = hi.clone();
    let mut abs = hi.clone();
    let mut terms = vec![0usize; sizes.len()];
    let mut add = |blk: usize, k: f64, coeff: &HermitianOperator| {
        terms[blk] += 1;
        for (e, z) in coeff.matrix().entries().iter().enumerate() {
            for (part, x) in [(2 * e, z.re), (2 * e + 1, z.im)] {
                if x == 0.0 {
                    continue;
                }
                let h = k * x;
                let r = k.mul_add(x, -h);
                let (q, t) = two_sum(hi[blk][part], h);
                hi[blk][part] = q;
                lo[blk][part] += t + r;
                abs[blk][part] += h.abs();
            }
        }
    };
    for t in &problem.objective.terms {
        add(t.block, sign, &t.coeff);
    }
    for (k, &yk) in y.iter().enumerate() {
        if yk == 0.0 {
            continue;
        }
        for t in &problem.constraint(k).terms {
            add(t.block, -yk, &t.coeff);
        }
    }
    let u = f64::EPSILON / 2.0;
    sizes
        .iter()
        .enumerate()
        .map(|(blk, &n)| {
            let m = 2.0 * terms[blk] as f64 + 1.0;
            let gamma = m * u / (1.0 - m * u);
            let mut err2 = 0.0;
            let entries: Vec<C64> = (0..n * n)
                .map(|e| {
                    let part = |i: usize| {
                        let v = hi[blk][i] + lo[blk][i];
                        (v, 2.0 * u * v.abs() + 2.0 * gamma * gamma * abs[blk][i] + f64::MIN_POSITIVE * m)
                    };
                    let (re, ere) = part(2 * e);
                    let (im, eim) = part(2 * e + 1);
                    err2 += (ere + eim) * (ere + eim);
                    C64::new(re, im)
                })
                .collect();
            let matrix = ComplexMatrix::new(n, entries).expect("block size");
            let slack = HermitianOperator::new(matrix).expect("hermitian terms give a hermitian slack");
            SlackBlock { slack, rounding: err2.sqrt() * (1.0 + 4.0 * u) }
        })
        .collect()
}

pub(crate) fn move_effect(problem: &SdpProblem, rows: &[usize]) -> Vec<Option<HermitianOperator>> {
    let mut delta: Vec<Option<HermitianOperator>> = vec![None; problem.blocks.len()];
    for &k in rows {
        for t in &problem.equalities[k].terms {
            match &mut delta[t.block] {
                Some(d) => d.axpy(1.0, &t.coeff),
                slot @ None => *slot = Some(t.coeff.clone()),
            }
        }
    }
    delta
}

/// Cushion above the eigenvalue rounding error of a recomputed slack.
pub(crate) fn margin_for(s: &HermitianOperator) -> f64 {
    64.0 * f64::EPSILON * (1.0 + s.matrix().frobenius_norm())
}

/// Per-block bound on the eigenvalue error of `dual_slacks(problem, y)`:
/// the rounding of the compensated accumulation plus the backward error of
/// the eigensolver.
pub(crate) fn slack_error_bounds(problem: &SdpProblem, y: &[f64]) -> Vec<f64> {
    accumulate_slacks(problem, y).iter().map(eigenvalue_error).collect()
}

fn eigenvalue_error(b: &SlackBlock) -> f64 {
    let u = f64::EPSILON / 2.0;
    b.rounding + 8.0 * b.slack.dim() as f64 * u * b.slack.matrix().frobenius_norm() + f64::MIN_POSITIVE
}

/// Smallest `s ≥ 0` with `λ_min(S + s Δ) ≥ margin`, or `None` beyond the cap.
pub(crate) fn required_shift(s: &HermitianOperator, delta: &HermitianOperator, margin: f64, cap: f64) -> Option<f64> {
    let ok = |t: f64| {
        let mut m = s.clone();
        m.axpy(t, delta);
        m.min_eigenvalue() >= margin
    };
    if ok(0.0) {
        return Some(0.0);
    }
    let mut hi = 1e-15;
    while !ok(hi) {
        hi *= 2.0;
        if hi > cap {
            return None;
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Compensated dot product with a rigorous bound on its error
/// (Ogita, Rump and Oishi's Dot2 with the accompanying estimate).
pub(crate) fn dot2(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut p = 0.0;
    let mut s = 0.0;
    let mut abs = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let h = x * y;
        let r = x.mul_add(y, -h);
        let (q, t) = two_sum(p, h);
        p = q;
        s += t + r;
        abs += h.abs();
    }
    let res = p + s;
    let n = 2.0 * a.len() as f64 + 1.0;
    let u = f64::EPSILON / 2.0;
    let gamma = n * u / (1.0 - n * u);
    (res, 2.0 * u * res.abs() + 2.0 * gamma * gamma * abs + f64::MIN_POSITIVE * n)
}

/// Recomputes every dual slack block from the multipliers, repairs small
/// violations along the problem's repair moves, and returns a certificate
/// whose `certified_value` is a sound bound whenever `valid` holds.
pub fn verify_certificate(problem: &SdpProblem, candidate: &DualCertificate) -> Result<DualCertificate> {
    problem.validate()?;
    let n_con = problem.num_constraints();
    if candidate.multipliers.len() != n_con {
        return Err(Error::DimensionMismatch { expected: n_con, found: candidate.multipliers.len() });
    }
    let mut y = candidate.multipliers.clone();
    let invalid = |y: Vec<f64>, raw: f64| DualCertificate {
        multipliers: y,
        slack_margin: f64::INFINITY,
        certified_value: f64::NAN,
        valid: false,
        raw_violation: raw,
        shift: 0.0,
    };
    if y.iter().any(|v| !v.is_finite()) {
        return Ok(invalid(y, f64::INFINITY));
    }
    let mut clamp_violation = 0.0f64;
    for (k, v) in y.iter_mut().enumerate() {
        if problem.is_inequality(k) && *v < 0.0 {
            clamp_violation = clamp_violation.max(-*v);
            *v = 0.0;
        }
    }

    let mut slacks = dual_slacks(problem, &y);
    let bounds: Vec<f64> = slack_error_bounds(problem, &y).iter().map(|b| 2.0 * b).collect();
    let raw = slacks.iter().map(|s| -s.min_eigenvalue()).fold(clamp_violation, f64::max).max(0.0);
    if raw > MAX_ABSORBED_VIOLATION {
        return Ok(invalid(y, raw));
    }

    let mut total_shift = 0.0;
    for mv in &problem.repairs {
        let (rows, only) = match mv {
            RepairMove::Lift { rows, block } => (rows, Some(*block)),
            RepairMove::Global { rows } => (rows, None),
        };
        let delta = move_effect(problem, rows);
        let mut needed = 0.0f64;
        let mut stuck = false;
        for (blk, d) in delta.iter().enumerate() {
            let Some(d) = d else { continue };
            if only.is_some_and(|b| b != blk) {
                continue;
            }
            if d.min_eigenvalue() < -1e-14 || d.is_zero() {
                continue;
            }
            if slacks[blk].min_eigenvalue() >= bounds[blk] {
                continue;
            }
            match required_shift(&slacks[blk], d, bounds[blk], MAX_SHIFT) {
                Some(s) => needed = needed.max(s),
                None => stuck = true,
            }
        }
        if stuck && needed == 0.0 {
            continue;
        }
        if needed > 0.0 {
            for &k in rows {
                y[k] -= needed;
            }
            for (blk, d) in delta.iter().enumerate() {
                if let Some(d) = d {
                    slacks[blk].axpy(needed, d);
                }
            }
            total_shift += needed * rows.len() as f64;
        }
    }

    // Rebuild from the final multipliers so no accumulated update is trusted.
    let blocks = accumulate_slacks(problem, &y);
    let bounds: Vec<f64> = blocks.iter().map(eigenvalue_error).collect();
    let slacks: Vec<HermitianOperator> = blocks.into_iter().map(|b| b.slack).collect();
    let mins: Vec<f64> = slacks.iter().map(HermitianOperator::min_eigenvalue).collect();
    let slack_margin = mins.iter().map(|m| -m).fold(f64::NEG_INFINITY, f64::max);
    let valid = mins.iter().zip(&bounds).all(|(m, b)| m >= b);

    let b: Vec<f64> = (0..n_con).map(|k| problem.constraint(k).rhs).collect();
    let (value, err) = dot2(&b, &y);
    let lower = value - err - 2.0 * f64::EPSILON * problem.objective.constant.abs();
    let certified_value = match problem.sense {
        Sense::Minimize => lower + problem.objective.constant,
        Sense::Maximize => -lower + problem.objective.constant,
    };
    Ok(DualCertificate {
        multipliers: y,
        slack_margin,
        certified_value: if valid { certified_value } else { f64::NAN },
        valid,
        raw_violation: raw,
        shift: total_shift,
    })
}
