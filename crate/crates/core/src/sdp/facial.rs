//! Facial reduction driven by exposing multiplier vectors.
//!
//! A vector `y` with `Z = Σ y_k A_k ⪰ 0` (inequality slacks contributing
//! `−y_k`) and `Σ y_k b_k = 0` forces every feasible point onto the kernel
//! of `Z`. Solving on that face restores strict feasibility; the dual point
//! is mapped back by moving along each exposing vector in reverse order.

use super::certificate::{dual_slacks, margin_for, move_effect, required_shift, verify_certificate, DualCertificate};
use super::problem::{Constraint, Link, Placement, RepairMove, SdpProblem, Sense, Term};
use super::solver::SdpSolution;
use crate::matops::{frobenius_inner, HermitianOperator, C64};
use crate::sdp::problem::hermitian_basis;

const EXPOSE_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-6;
const MAX_LIFT: f64 = 1e12;

type Basis = Vec<Vec<C64>>;

#[derive(Debug, Clone)]
pub(crate) struct Face {
    /// Orthonormal columns spanning each block's face; `None` is the full space.
    bases: Vec<Option<Basis>>,
    /// Inequality slacks forced to zero.
    fixed: Vec<bool>,
}

impl Face {
    fn full(p: &SdpProblem) -> Self {
        Self { bases: vec![None; p.blocks.len()], fixed: vec![false; p.inequalities.len()] }
    }

    fn dim(&self, p: &SdpProblem, blk: usize) -> usize {
        self.bases[blk].as_ref().map_or(p.blocks[blk].size, Vec::len)
    }

    fn restrict(&self, blk: usize, h: &HermitianOperator) -> HermitianOperator {
        match &self.bases[blk] {
            Some(v) => h.restrict(v),
            None => h.clone(),
        }
    }
}

pub(crate) struct Reduction {
    pub problem: SdpProblem,
    block_map: Vec<Option<usize>>,
    row_map: Vec<Option<usize>>,
    /// Exposing vectors in application order, each with the face it acted on.
    levels: Vec<(Vec<(usize, f64)>, Face)>,
    face: Face,
    /// Whether any level came from a matrix link rather than a hint.
    pub linked: bool,
}

fn exposure(p: &SdpProblem, y: &[(usize, f64)]) -> Vec<Option<HermitianOperator>> {
    let mut z: Vec<Option<HermitianOperator>> = vec![None; p.blocks.len()];
    for &(k, yk) in y {
        for t in &p.constraint(k).terms {
            match &mut z[t.block] {
                Some(acc) => acc.axpy(yk, &t.coeff),
                slot @ None => *slot = Some(t.coeff.scale(yk)),
            }
        }
    }
    z
}

fn compose(v: Option<&Basis>, n: usize, kernel: &[Vec<C64>]) -> Basis {
    match v {
        None => kernel.to_vec(),
        Some(v) => kernel
            .iter()
            .map(|c| {
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (coef, col) in c.iter().zip(v) {
                    out.iter_mut().zip(col).for_each(|(o, x)| *o += coef * x);
                }
                out
            })
            .collect(),
    }
}

/// Applies `y` to `face` if it is a valid exposing vector that shrinks something.
fn try_expose(p: &SdpProblem, face: &Face, y: &[(usize, f64)]) -> Option<Face> {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for &(k, yk) in y {
        value += yk * p.constraint(k).rhs;
        magnitude += (yk * p.constraint(k).rhs).abs();
    }
    if value.abs() > EXPOSE_TOL * (1.0 + magnitude) {
        return None;
    }
    let mut next = face.clone();
    let mut changed = false;
    let n_eq = p.equalities.len();
    for &(k, yk) in y {
        if k < n_eq || face.fixed[k - n_eq] {
            continue;
        }
        let z = -yk;
        if z < -EXPOSE_TOL * (1.0 + yk.abs()) {
            return None;
        }
        if z > EXPOSE_TOL {
            next.fixed[k - n_eq] = true;
            changed = true;
        }
    }
    for (blk, z) in exposure(p, y).into_iter().enumerate() {
        let Some(z) = z else { continue };
        if face.dim(p, blk) == 0 {
            continue;
        }
        let zr = face.restrict(blk, &z);
        let scale = 1.0 + zr.matrix().frobenius_norm();
        let (vals, vecs) = zr.eigen();
        if vals[0] < -EXPOSE_TOL * scale {
            return None;
        }
        if vals.iter().any(|&v| v > EXPOSE_TOL * scale && v < 1e-6 * scale) {
            return None;
        }
        let kernel: Vec<Vec<C64>> =
            vals.iter().zip(vecs).filter(|(v, _)| **v <= EXPOSE_TOL * scale).map(|(_, c)| c).collect();
        if kernel.len() < vals.len() {
            next.bases[blk] = Some(compose(face.bases[blk].as_ref(), p.blocks[blk].size, &kernel));
            changed = true;
        }
    }
    changed.then_some(next)
}

/// Exposing vector from a matrix link whose part is confined to a face:
/// the projector onto the part's missing directions, in the link's rows.
fn link_candidates(face: &Face, link: &Link) -> Vec<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let d = link.dim;
    for part in &link.parts {
        let Placement::Diagonal(off) = part.placement else { continue };
        let Some(v) = &face.bases[part.block] else { continue };
        let mut q: Vec<Vec<C64>> = Vec::new();
        for col in v {
            let mut w: Vec<C64> = col[off..off + d].to_vec();
            for u in &q {
                let proj: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                w.iter_mut().zip(u).for_each(|(b, a)| *b -= proj * a);
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-9 {
                w.iter_mut().for_each(|z| *z /= norm);
                q.push(w);
            }
        }
        if q.len() == d {
            continue;
        }
        let mut proj = HermitianOperator::identity(d);
        for u in &q {
            proj = proj.sub(&HermitianOperator::ket_bra(u));
        }
        let sign = -part.scale.signum();
        let basis = hermitian_basis(d);
        let y: Vec<(usize, f64)> = basis
            .iter()
            .zip(&link.rows)
            .map(|(e, &k)| {
                let c = frobenius_inner(e, &proj).expect("basis size") / frobenius_inner(e, e).expect("basis size");
                (k, sign * c)
            })
            .filter(|(_, c)| *c != 0.0)
            .collect();
        out.push(y);
    }
    out
}

fn restrict_terms(face: &Face, terms: &[Term], block_map: &[Option<usize>]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in terms {
        let Some(nb) = block_map[t.block] else { continue };
        let c = face.restrict(t.block, &t.coeff);
        if c.matrix().max_abs() <= 1e-13 * (1.0 + t.coeff.matrix().max_abs()) {
            continue;
        }
        match out.iter_mut().find(|o| o.block == nb) {
            Some(o) => o.coeff = o.coeff.add(&c),
            None => out.push(Term { block: nb, coeff: c }),
        }
    }
    out
}

/// Builds the reduced problem when the hints, and optionally the links,
/// expose a proper face.
pub(crate) fn reduce(p: &SdpProblem, follow_links: bool) -> Option<Reduction> {
    if p.exposing_hints.is_empty() {
        return None;
    }
    let mut face = Face::full(p);
    let mut levels = Vec::new();
    for hint in &p.exposing_hints {
        if let Some(next) = try_expose(p, &face, hint) {
            levels.push((hint.clone(), face));
            face = next;
        }
    }
    if levels.is_empty() {
        return None;
    }
    let from_hints = levels.len();
    for _ in 0..if follow_links { 8 } else { 0 } {
        let mut progressed = false;
        for link in &p.links {
            for y in link_candidates(&face, link) {
                if let Some(next) = try_expose(p, &face, &y) {
                    levels.push((y, face));
                    face = next;
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }

    let mut reduced = SdpProblem::new(p.sense);
    let mut block_map = vec![None; p.blocks.len()];
    for (blk, spec) in p.blocks.iter().enumerate() {
        let dim = face.dim(p, blk);
        if dim > 0 {
            block_map[blk] = Some(reduced.add_block(spec.label.clone(), dim));
        }
    }
    reduced.objective.constant = p.objective.constant;
    reduced.objective.terms = restrict_terms(&face, &p.objective.terms, &block_map);

    let n_eq = p.equalities.len();
    let mut eqs: Vec<(usize, Constraint)> = Vec::new();
    let mut ineqs: Vec<(usize, Constraint)> = Vec::new();
    for k in 0..p.num_constraints() {
        let c = p.constraint(k);
        let terms = restrict_terms(&face, &c.terms, &block_map);
        let is_eq = k < n_eq || face.fixed[k - n_eq];
        if terms.is_empty() {
            let ok = if is_eq { c.rhs.abs() <= GAP_TOL } else { c.rhs <= GAP_TOL };
            if !ok {
                return None;
            }
            continue;
        }
        let row = Constraint { terms, rhs: c.rhs, tag: c.tag };
        if is_eq {
            eqs.push((k, row));
        } else {
            ineqs.push((k, row));
        }
    }
    let mut row_map = vec![None; p.num_constraints()];
    for (i, (k, _)) in eqs.iter().enumerate() {
        row_map[*k] = Some(i);
    }
    for (i, (k, _)) in ineqs.iter().enumerate() {
        row_map[*k] = Some(eqs.len() + i);
    }
    reduced.equalities = eqs.into_iter().map(|(_, c)| c).collect();
    reduced.inequalities = ineqs.into_iter().map(|(_, c)| c).collect();
    if reduced.num_constraints() == 0 {
        return None;
    }
    let linked = levels.len() > from_hints;
    Some(Reduction { problem: reduced, block_map, row_map, levels, face, linked })
}

/// Cost shifts tried when the repaired multipliers stay loose.
const SHIFTS: [f64; 13] = [1e-9, 1e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 2e-4, 5e-4, 1e-3, 3e-3];
const SHIFT_TRIGGER: f64 = 1e-7;

/// Face slack margins tried when regularizing the reduced dual point.
const LIFT_MARGINS: [f64; 21] = [
    1e-10, 1e-9, 3e-9, 1e-8, 3e-8, 6e-8, 8e-8, 1e-7, 1.4e-7, 2e-7, 3e-7, 4e-7, 1e-6, 3e-6, 1e-5, 1e-4, 3e-4, 6e-4, 1e-3,
    1e-2, 5e-2,
];

/// Pushes every face-restricted slack to at least `eps` along the repair moves.
fn face_repair(p: &SdpProblem, y: &mut [f64], face: &Face, eps: f64) {
    let n_eq = p.equalities.len();
    for (i, fixed) in face.fixed.iter().enumerate() {
        if !fixed && y[n_eq + i] < 0.0 {
            y[n_eq + i] = 0.0;
        }
    }
    let mut slacks = dual_slacks(p, y);
    for mv in &p.repairs {
        let (rows, only) = match mv {
            RepairMove::Lift { rows, block } => (rows, Some(*block)),
            RepairMove::Global { rows } => (rows, None),
        };
        let delta = move_effect(p, rows);
        let mut needed = 0.0f64;
        for (blk, d) in delta.iter().enumerate() {
            let Some(d) = d else { continue };
            if only.is_some_and(|b| b != blk) || face.dim(p, blk) == 0 {
                continue;
            }
            let dr = face.restrict(blk, d);
            if dr.is_zero() || dr.min_eigenvalue() < -1e-14 {
                continue;
            }
            let sf = face.restrict(blk, &slacks[blk]);
            let margin = eps * (1.0 + sf.matrix().frobenius_norm());
            if let Some(t) = required_shift(&sf, &dr, margin, 1.0) {
                needed = needed.max(t);
            }
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
        }
    }
}

/// Moves `y` along `−t·e` with the smallest `t ≥ 0` keeping every slack
/// that `e` exposes on `before` above half its margin on `after`, at most `eps`.
fn lift_level(p: &SdpProblem, y: &mut [f64], e: &[(usize, f64)], before: &Face, after: &Face, eps: f64) {
    let z = exposure(p, e);
    let n_eq = p.equalities.len();
    let base = dual_slacks(p, y);
    let blocks: Vec<(HermitianOperator, HermitianOperator, f64)> = z
        .iter()
        .enumerate()
        .filter_map(|(blk, zb)| {
            let zb = zb.as_ref()?;
            if before.dim(p, blk) == 0 {
                return None;
            }
            let reached = if after.dim(p, blk) == 0 { eps } else { after.restrict(blk, &base[blk]).min_eigenvalue() };
            let zr = before.restrict(blk, zb);
            if zr.is_zero() || zr.max_eigenvalue() <= 1e-14 {
                return None;
            }
            let sr = before.restrict(blk, &base[blk]);
            let m = (0.5 * reached).min(eps).max(margin_for(&sr));
            Some((sr, zr, m))
        })
        .collect();
    let scalars: Vec<(f64, f64)> = e
        .iter()
        .filter(|(k, _)| *k >= n_eq && !before.fixed[*k - n_eq])
        .map(|&(k, ek)| (y[k], -ek))
        .collect();
    let ok = |t: f64| {
        scalars.iter().all(|(v, d)| v + t * d >= 0.0)
            && blocks.iter().all(|(s, zr, m)| {
                let mut w = s.clone();
                w.axpy(t, zr);
                w.min_eigenvalue() >= *m
            })
    };
    if ok(0.0) {
        return;
    }
    let mut hi = 1e-9;
    while !ok(hi) {
        hi *= 2.0;
        if hi > MAX_LIFT {
            return;
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for &(k, ek) in e {
        y[k] -= hi * ek;
    }
}

impl Reduction {
    /// Removes from the reduced multipliers their least-squares component
    /// along the exposing vectors, which vanish on the face.
    fn drop_exposed_drift(&self, y_red: &[f64]) -> Vec<f64> {
        let mut y = y_red.to_vec();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for (e, _) in &self.levels {
            let mut v = vec![0.0; y.len()];
            for &(k, ek) in e {
                if let Some(r) = self.row_map[k] {
                    v[r] = ek;
                }
            }
            for u in &dirs {
                let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(b, a)| *b -= proj * a);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                v.iter_mut().for_each(|x| *x /= norm);
                dirs.push(v);
            }
        }
        for u in &dirs {
            let proj: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
            y.iter_mut().zip(u).for_each(|(b, a)| *b -= proj * a);
        }
        y
    }

    fn lift_multipliers(&self, p: &SdpProblem, y_red: &[f64], eps: f64) -> Vec<f64> {
        let y_red = self.drop_exposed_drift(y_red);
        let mut y = vec![0.0; p.num_constraints()];
        for (k, r) in self.row_map.iter().enumerate() {
            if let Some(r) = r {
                y[k] = y_red[*r];
            }
        }
        face_repair(p, &mut y, &self.face, eps);
        for (i, (e, before)) in self.levels.iter().enumerate().rev() {
            let after = self.levels.get(i + 1).map_or(&self.face, |(_, f)| f);
            lift_level(p, &mut y, e, before, after, eps);
        }
        y
    }

    /// The reduced problem with `ε 𝟙` taken out of every block's cost, so
    /// that its dual slacks dominate `ε 𝟙` on the face.
    fn shifted(&self, eps: f64) -> SdpProblem {
        let mut q = self.problem.clone();
        let sign = match q.sense {
            Sense::Minimize => -1.0,
            Sense::Maximize => 1.0,
        };
        for (blk, spec) in self.problem.blocks.iter().enumerate() {
            q.add_objective_term(blk, HermitianOperator::identity(spec.size).scale(sign * eps));
        }
        q
    }

    /// Maps a solution of the reduced problem back to the original one,
    /// keeping the lifted dual point with the tightest verified bound. The
    /// dual value and gap stay those of the reduced problem: on a face
    /// without interior the dual optimum is generally not attained, and the
    /// lifted point only approaches it.
    ///
    /// Candidates come from repairing the reduced multipliers on the face
    /// and, when that leaves a loose or invalid bound, from re-solving the
    /// reduced problem with shifted costs through `resolve`.
    /// Also returns the verified bound of the chosen point, if any verified.
    pub(crate) fn lift<F>(&self, p: &SdpProblem, sol: SdpSolution, resolve: F) -> (SdpSolution, Option<f64>)
    where
        F: Fn(&SdpProblem) -> Option<Vec<f64>>,
    {
        let better = |a: f64, b: f64| match p.sense {
            Sense::Minimize => a > b,
            Sense::Maximize => a < b,
        };
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut fallback = None;
        let mut consider = |y: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| -> bool {
            let vc = verify_certificate(p, &DualCertificate::candidate(y.clone()));
            match vc {
                Ok(c) if c.valid => {
                    let improved = best.as_ref().is_none_or(|(v, _)| better(c.certified_value, *v));
                    if improved {
                        *best = Some((c.certified_value, y));
                    }
                    improved
                }
                _ => {
                    fallback.get_or_insert(y);
                    false
                }
            }
        };
        for eps in LIFT_MARGINS {
            consider(self.lift_multipliers(p, &sol.dual_multipliers, eps), &mut best);
        }
        let loose = best.as_ref().is_none_or(|(v, _)| (v - sol.dual_value).abs() > SHIFT_TRIGGER);
        if loose {
            let mut found = false;
            for eps in SHIFTS {
                let Some(y_red) = resolve(&self.shifted(eps)) else { continue };
                let improved = consider(self.lift_multipliers(p, &y_red, eps), &mut best);
                if found && !improved {
                    break;
                }
                found |= improved;
            }
        }
        let bound = best.as_ref().map(|(v, _)| *v);
        let y = best.map(|(_, y)| y).or(fallback).expect("at least one margin");
        let primal_blocks: Vec<HermitianOperator> = p
            .blocks
            .iter()
            .enumerate()
            .map(|(blk, spec)| match self.block_map[blk] {
                None => HermitianOperator::zeros(spec.size),
                Some(r) => match &self.face.bases[blk] {
                    Some(v) => sol.primal_blocks[r].extend(v, spec.size),
                    None => sol.primal_blocks[r].clone(),
                },
            })
            .collect();
        let mut primal_value = p.objective.constant;
        for t in &p.objective.terms {
            primal_value += frobenius_inner(&t.coeff, &primal_blocks[t.block]).expect("validated sizes");
        }
        let dual_slacks = dual_slacks(p, &y);
        let lifted = SdpSolution { primal_value, primal_blocks, dual_multipliers: y, dual_slacks, ..sol };
        (lifted, bound)
    }
}
