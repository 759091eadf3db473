//! Infeasible-start primal-dual interior-point method with Nesterov–Todd scaling.
//!
//! Internal standard form: minimize `⟨C, X⟩` subject to `⟨A_k, X⟩ = b_k`,
//! `X ⪰ 0`, with dual `maximize bᵀy` subject to `S = C − Σ y_k A_k ⪰ 0`.
//! Inequalities gain a 1×1 slack block; maximization negates `C`.

use serde::{Deserialize, Serialize};

use super::dense::{self, SchurFactor};
use super::facial;
use super::problem::{SdpProblem, Sense};
use crate::error::{Error, Result};
use crate::matops::{frobenius_inner, sym_eigen, HermitianOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Acceptance threshold on max(primal residual, dual residual, relative gap).
    pub tol: f64,
    /// Iteration continues towards this tighter threshold while progress lasts.
    pub target_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, target_tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Objective at the returned primal blocks, in the problem's own sense.
    pub primal_value: f64,
    /// Dual objective of the returned multipliers, in the problem's own sense.
    pub dual_value: f64,
    /// `|primal_value − dual_value|`.
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub primal_blocks: Vec<HermitianOperator>,
    /// Multipliers of the minimization form, equalities first then inequalities.
    pub dual_multipliers: Vec<f64>,
    /// Dual slack blocks `C − Σ y_k A_k` per variable block.
    pub dual_slacks: Vec<HermitianOperator>,
}

#[derive(Debug, Clone)]
struct SparseSym {
    /// Upper-triangle entries `(i, j, value)` with `i ≤ j`.
    entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    fn from_dense(n: usize, a: &[f64]) -> Self {
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = a[i * n + j];
                if v != 0.0 {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
        Self { entries }
    }

    fn pair(&self, n: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            if i == j {
                acc += v * x[i * n + i];
            } else {
                acc += v * (x[i * n + j] + x[j * n + i]);
            }
        }
        acc
    }

    fn add_scaled(&self, n: usize, k: f64, out: &mut [f64]) {
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            out[i * n + j] += k * v;
            if i != j {
                out[j * n + i] += k * v;
            }
        }
    }

    fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    /// Dense `A · W` for symmetric `A`.
    fn times_dense(&self, n: usize, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            for c in 0..n {
                out[i * n + c] += v * w[j * n + c];
            }
            if i != j {
                for c in 0..n {
                    out[j * n + c] += v * w[i * n + c];
                }
            }
        }
        out
    }
}

struct Compiled {
    sizes: Vec<usize>,
    /// Whether user blocks are carried through the real embedding.
    complex: bool,
    user_blocks: usize,
    c: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// Per internal row: `(block, coefficient)`.
    rows: Vec<Vec<(usize, SparseSym)>>,
    /// Per block: `(row, index into rows[row])`.
    block_rows: Vec<Vec<(usize, usize)>>,
    /// User multiplier index for each internal row.
    row_origin: Vec<usize>,
}

fn coefficient_is_real(h: &HermitianOperator) -> bool {
    h.is_real()
}

fn coefficient_is_imaginary(h: &HermitianOperator) -> bool {
    h.matrix().entries().iter().all(|z| z.re == 0.0)
}

fn internal_coefficient(h: &HermitianOperator, complex: bool) -> Vec<f64> {
    if complex {
        h.real_embedding().into_iter().map(|v| 0.5 * v).collect()
    } else {
        h.matrix().entries().iter().map(|z| z.re).collect()
    }
}

fn compile(problem: &SdpProblem) -> Result<Compiled> {
    problem.validate()?;
    let mut droppable = vec![false; problem.num_constraints()];
    let mut complex = problem.objective.terms.iter().any(|t| !coefficient_is_real(&t.coeff));
    for (k, flag) in droppable.iter_mut().enumerate() {
        let con = problem.constraint(k);
        if con.terms.iter().all(|t| coefficient_is_real(&t.coeff)) {
            continue;
        }
        if con.rhs == 0.0 && !problem.is_inequality(k) && con.terms.iter().all(|t| coefficient_is_imaginary(&t.coeff)) {
            *flag = true;
        } else {
            complex = true;
        }
    }
    if complex {
        droppable.iter_mut().for_each(|f| *f = false);
    }

    let user_blocks = problem.blocks.len();
    let mut sizes: Vec<usize> = problem.blocks.iter().map(|b| if complex { 2 * b.size } else { b.size }).collect();
    sizes.extend(std::iter::repeat_n(1, problem.inequalities.len()));

    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n * n]).collect();
    for t in &problem.objective.terms {
        let coeff = internal_coefficient(&t.coeff, complex);
        for (dst, v) in c[t.block].iter_mut().zip(coeff) {
            *dst += sign * v;
        }
    }

    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut row_origin = Vec::new();
    for k in 0..problem.num_constraints() {
        if droppable[k] {
            continue;
        }
        let con = problem.constraint(k);
        let mut dense_parts: Vec<(usize, Vec<f64>)> = Vec::new();
        for t in &con.terms {
            let coeff = internal_coefficient(&t.coeff, complex);
            match dense_parts.iter_mut().find(|(blk, _)| *blk == t.block) {
                Some((_, acc)) => acc.iter_mut().zip(coeff).for_each(|(a, v)| *a += v),
                None => dense_parts.push((t.block, coeff)),
            }
        }
        let mut parts: Vec<(usize, SparseSym)> = dense_parts
            .into_iter()
            .map(|(blk, a)| (blk, SparseSym::from_dense(sizes[blk], &a)))
            .filter(|(_, s)| !s.entries.is_empty())
            .collect();
        if problem.is_inequality(k) {
            let slack = user_blocks + (k - problem.equalities.len());
            parts.push((slack, SparseSym { entries: vec![(0, 0, -1.0)] }));
        }
        if parts.is_empty() {
            if con.rhs.abs() <= 1e-12 {
                continue;
            }
            return Err(Error::Solver(format!("constraint {k} has no variables but rhs {}", con.rhs)));
        }
        rows.push(parts);
        b.push(con.rhs);
        row_origin.push(k);
    }

    let mut block_rows = vec![Vec::new(); sizes.len()];
    for (r, parts) in rows.iter().enumerate() {
        for (idx, (blk, _)) in parts.iter().enumerate() {
            block_rows[*blk].push((r, idx));
        }
    }
    Ok(Compiled { sizes, complex, user_blocks, c, b, rows, block_rows, row_origin })
}

struct Scaling {
    g: Vec<f64>,
    g_inv: Vec<f64>,
    w: Vec<f64>,
    lambda: Vec<f64>,
}

impl Compiled {
    fn apply(&self, x: &[Vec<f64>]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|parts| parts.iter().map(|(blk, a)| a.pair(self.sizes[*blk], &x[*blk])).sum())
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.sizes.iter().map(|&n| vec![0.0; n * n]).collect();
        for (parts, &yk) in self.rows.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for (blk, a) in parts {
                a.add_scaled(self.sizes[*blk], yk, &mut out[*blk]);
            }
        }
        out
    }

    fn schur(&self, scal: &[Scaling]) -> Vec<f64> {
        let m = self.rows.len();
        let mut mat = vec![0.0; m * m];
        for (blk, list) in self.block_rows.iter().enumerate() {
            let n = self.sizes[blk];
            let w = &scal[blk].w;
            for (pos, &(k, ik)) in list.iter().enumerate() {
                let aw = self.rows[k][ik].1.times_dense(n, w);
                let p = dense::matmul(n, w, &aw);
                for &(l, il) in &list[pos..] {
                    let v = self.rows[l][il].1.pair(n, &p);
                    let (lo, hi) = if k <= l { (k, l) } else { (l, k) };
                    mat[hi * m + lo] += v;
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                mat[j * m + i] = mat[i * m + j];
            }
        }
        mat
    }
}

fn nt_scaling(n: usize, x: &[f64], s: &[f64]) -> Option<Scaling> {
    let l = dense::cholesky_small(n, x)?;
    let lt = dense::transpose(n, &l);
    let mut lsl = dense::matmul(n, &dense::matmul(n, &lt, s), &l);
    dense::symmetrize(n, &mut lsl);
    let (ev, u) = sym_eigen(n, &lsl);
    if ev.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lambda: Vec<f64> = ev.iter().map(|v| v.sqrt()).collect();
    let lu = dense::matmul(n, &l, &u);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = lu[i * n + j] / lambda[j].sqrt();
        }
    }
    let l_inv = dense::lower_inverse(n, &l);
    let ut_linv = dense::matmul(n, &dense::transpose(n, &u), &l_inv);
    let mut g_inv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g_inv[i * n + j] = ut_linv[i * n + j] * lambda[i].sqrt();
        }
    }
    let mut w = dense::matmul(n, &g, &dense::transpose(n, &g));
    dense::symmetrize(n, &mut w);
    Some(Scaling { g, g_inv, w, lambda })
}

/// Largest step keeping `x + α d` positive semidefinite (capped at 1e6).
fn max_step(n: usize, x: &[f64], d: &[f64]) -> f64 {
    let Some(l) = dense::cholesky_small(n, x) else {
        return 0.0;
    };
    let l_inv = dense::lower_inverse(n, &l);
    let m = dense::congruence(n, &l_inv, d);
    let (ev, _) = sym_eigen(n, &m);
    if ev[0] < 0.0 {
        (-1.0 / ev[0]).min(1e6)
    } else {
        1e6
    }
}

struct Direction {
    dy: Vec<f64>,
    dx: Vec<Vec<f64>>,
    ds: Vec<Vec<f64>>,
}

fn direction(
    cp: &Compiled,
    factor: &SchurFactor,
    schur: &[f64],
    scal: &[Scaling],
    rp: &[f64],
    rd: &[Vec<f64>],
    rhs_scaled: &[Vec<f64>],
) -> Direction {
    let nb = cp.sizes.len();
    let mut gtg = Vec::with_capacity(nb);
    let mut wrw = Vec::with_capacity(nb);
    for blk in 0..nb {
        let n = cp.sizes[blk];
        let lam = &scal[blk].lambda;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = 2.0 * rhs_scaled[blk][i * n + j] / (lam[i] + lam[j]);
            }
        }
        gtg.push(dense::congruence(n, &scal[blk].g, &t));
        wrw.push(dense::congruence(n, &scal[blk].w, &rd[blk]));
    }
    let a_gtg = cp.apply(&gtg);
    let a_wrw = cp.apply(&wrw);
    let rhs: Vec<f64> = (0..rp.len()).map(|k| rp[k] - a_gtg[k] + a_wrw[k]).collect();
    let mut dy = factor.solve(&rhs);
    let m = dy.len();
    for round in 0..3 {
        // Later rounds measure the residual through the operator itself, not the formed matrix.
        let resid: Vec<f64> = if round == 0 {
            (0..m).map(|i| rhs[i] - dense::dot(&schur[i * m..(i + 1) * m], &dy)).collect()
        } else {
            let aty = cp.adjoint(&dy);
            let waw: Vec<Vec<f64>> = (0..nb).map(|blk| dense::congruence(cp.sizes[blk], &scal[blk].w, &aty[blk])).collect();
            let op = cp.apply(&waw);
            (0..m).map(|i| rhs[i] - op[i]).collect()
        };
        let corr = factor.solve(&resid);
        dy.iter_mut().zip(corr).for_each(|(a, c)| *a += c);
    }
    let aty = cp.adjoint(&dy);
    let mut ds = Vec::with_capacity(nb);
    let mut dx = Vec::with_capacity(nb);
    for blk in 0..nb {
        let n = cp.sizes[blk];
        let s_dir: Vec<f64> = rd[blk].iter().zip(&aty[blk]).map(|(r, a)| r - a).collect();
        let wsw = dense::congruence(n, &scal[blk].w, &s_dir);
        let x_dir: Vec<f64> = gtg[blk].iter().zip(&wsw).map(|(a, b)| a - b).collect();
        ds.push(s_dir);
        dx.push(x_dir);
    }
    Direction { dy, dx, ds }
}

struct Iterate {
    x: Vec<Vec<f64>>,
    s: Vec<Vec<f64>>,
    y: Vec<f64>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    rel_gap: f64,
}

impl Measures {
    fn worst(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.rel_gap)
    }
}

fn measure(cp: &Compiled, it: &Iterate, b_norm: f64, c_norm: f64) -> (Measures, Vec<f64>, Vec<Vec<f64>>) {
    let ax = cp.apply(&it.x);
    let rp: Vec<f64> = cp.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let aty = cp.adjoint(&it.y);
    let rd: Vec<Vec<f64>> = (0..cp.sizes.len())
        .map(|blk| {
            cp.c[blk].iter().zip(&it.s[blk]).zip(&aty[blk]).map(|((c, s), a)| c - s - a).collect()
        })
        .collect();
    let pobj: f64 = cp.c.iter().zip(&it.x).map(|(c, x)| dense::inner(c, x)).sum();
    let dobj = dense::dot(&cp.b, &it.y);
    let pinf = dense::frob_norm(&rp) / (1.0 + b_norm);
    let dinf = rd.iter().map(|r| dense::dot(r, r)).sum::<f64>().sqrt() / (1.0 + c_norm);
    let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    (Measures { pobj, dobj, pinf, dinf, rel_gap }, rp, rd)
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, &SolverOptions::default())
}

/// Lifted bounds further than this (relative) from the reduced optimum
/// trigger a second attempt on a coarser face.
const LOOSE_LIFT: f64 = 1e-5;

pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let Some(red) = facial::reduce(problem, true) else {
        return solve_direct(problem, opts);
    };
    let resolve = |q: &SdpProblem| {
        solve_direct(q, opts).ok().filter(|s| s.status == SolveStatus::Optimal).map(|s| s.dual_multipliers)
    };
    let sol = solve_direct(&red.problem, opts)?;
    let reduced_value = sol.dual_value;
    let (lifted, bound) = red.lift(problem, sol, resolve);
    if !red.linked || bound.is_some_and(|v| (v - reduced_value).abs() <= LOOSE_LIFT * (1.0 + v.abs())) {
        return Ok(lifted);
    }
    // Faces reached only through links cost an extra lifting level each;
    // the coarser face is sometimes certified more tightly.
    let Some(coarse) = facial::reduce(problem, false) else {
        return Ok(lifted);
    };
    let Ok(sol) = solve_direct(&coarse.problem, opts) else {
        return Ok(lifted);
    };
    if sol.status != SolveStatus::Optimal {
        return Ok(lifted);
    }
    let (alt, alt_bound) = coarse.lift(problem, sol, resolve);
    let wins = match (bound, alt_bound) {
        (_, None) => false,
        (None, Some(_)) => true,
        (Some(a), Some(b)) => match problem.sense {
            Sense::Minimize => b > a,
            Sense::Maximize => b < a,
        },
    };
    Ok(if wins { alt } else { lifted })
}

fn solve_direct(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let cp = compile(problem)?;
    let nb = cp.sizes.len();
    let total_dim: usize = cp.sizes.iter().sum();
    let b_norm = dense::frob_norm(&cp.b);
    let c_norm = cp.c.iter().map(|c| dense::dot(c, c)).sum::<f64>().sqrt();

    let mut it = initial_point(&cp);
    let mut best: Option<(f64, Iterate, Measures)> = None;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut infeasible = false;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let (meas, rp, rd) = measure(&cp, &it, b_norm, c_norm);
        let worst = meas.worst();
        if !worst.is_finite() {
            break;
        }
        if best.as_ref().is_none_or(|(w, _, _)| worst < *w) {
            best = Some((worst, clone_iterate(&it), meas_clone(&meas)));
            stalls = 0;
        } else {
            stalls += 1;
        }
        if worst <= opts.target_tol || stalls >= 8 {
            break;
        }
        if detect_infeasibility(&cp, &it, &meas, &rd, c_norm) {
            infeasible = true;
            break;
        }

        let mu: f64 = it.x.iter().zip(&it.s).map(|(x, s)| dense::inner(x, s)).sum::<f64>() / total_dim as f64;
        let Some(scal) = (0..nb).map(|blk| nt_scaling(cp.sizes[blk], &it.x[blk], &it.s[blk])).collect::<Option<Vec<_>>>()
        else {
            break;
        };
        let schur = cp.schur(&scal);
        let Some(factor) = SchurFactor::factor(cp.rows.len(), schur.clone()) else {
            break;
        };

        let lam_sq = |blk: usize, sigma_mu: f64| -> Vec<f64> {
            let n = cp.sizes[blk];
            let mut r = vec![0.0; n * n];
            for i in 0..n {
                let l = scal[blk].lambda[i];
                r[i * n + i] = sigma_mu - l * l;
            }
            r
        };
        let pred_rhs: Vec<Vec<f64>> = (0..nb).map(|blk| lam_sq(blk, 0.0)).collect();
        let pred = direction(&cp, &factor, &schur, &scal, &rp, &rd, &pred_rhs);
        let (ap, ad) = step_lengths(&cp, &it, &pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff: f64 = (0..nb)
            .map(|blk| {
                let xn: Vec<f64> = it.x[blk].iter().zip(&pred.dx[blk]).map(|(x, d)| x + ap * d).collect();
                let sn: Vec<f64> = it.s[blk].iter().zip(&pred.ds[blk]).map(|(s, d)| s + ad * d).collect();
                dense::inner(&xn, &sn)
            })
            .sum::<f64>()
            / total_dim as f64;
        let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = (mu_aff.max(0.0) / mu).powf(expon).min(1.0);

        let corr_rhs: Vec<Vec<f64>> = (0..nb)
            .map(|blk| {
                let n = cp.sizes[blk];
                let dxs = dense::congruence(n, &scal[blk].g_inv, &pred.dx[blk]);
                let gt = dense::transpose(n, &scal[blk].g);
                let dss = dense::congruence(n, &gt, &pred.ds[blk]);
                let prod = dense::matmul(n, &dxs, &dss);
                let mut r = lam_sq(blk, sigma * mu);
                for i in 0..n {
                    for j in 0..n {
                        r[i * n + j] -= 0.5 * (prod[i * n + j] + prod[j * n + i]);
                    }
                }
                r
            })
            .collect();
        let dir = direction(&cp, &factor, &schur, &scal, &rp, &rd, &corr_rhs);
        let (ap_max, ad_max) = step_lengths(&cp, &it, &dir);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for blk in 0..nb {
            let n = cp.sizes[blk];
            it.x[blk].iter_mut().zip(&dir.dx[blk]).for_each(|(x, d)| *x += ap * d);
            it.s[blk].iter_mut().zip(&dir.ds[blk]).for_each(|(s, d)| *s += ad * d);
            dense::symmetrize(n, &mut it.x[blk]);
            dense::symmetrize(n, &mut it.s[blk]);
        }
        it.y.iter_mut().zip(&dir.dy).for_each(|(y, d)| *y += ad * d);
        iterations = iter + 1;
    }

    let (final_it, meas) = if infeasible {
        let (meas, _, _) = measure(&cp, &it, b_norm, c_norm);
        (it, meas)
    } else {
        match best {
            Some((_, b, m)) => (b, m),
            None => {
                let (meas, _, _) = measure(&cp, &it, b_norm, c_norm);
                (it, meas)
            }
        }
    };
    let status = if infeasible {
        SolveStatus::Infeasible
    } else if meas.worst() <= opts.tol {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalTrouble
    };
    Ok(assemble(problem, &cp, final_it, &meas, status, iterations))
}

fn meas_clone(m: &Measures) -> Measures {
    Measures { pobj: m.pobj, dobj: m.dobj, pinf: m.pinf, dinf: m.dinf, rel_gap: m.rel_gap }
}

fn clone_iterate(it: &Iterate) -> Iterate {
    Iterate { x: it.x.clone(), s: it.s.clone(), y: it.y.clone() }
}

fn initial_point(cp: &Compiled) -> Iterate {
    let mut x = Vec::with_capacity(cp.sizes.len());
    let mut s = Vec::with_capacity(cp.sizes.len());
    for (blk, &n) in cp.sizes.iter().enumerate() {
        let nf = n as f64;
        let mut xi = 10f64.max(nf.sqrt());
        let mut eta = 10f64.max(nf.sqrt()).max(dense::frob_norm(&cp.c[blk]));
        for &(k, idx) in &cp.block_rows[blk] {
            let a = cp.rows[k][idx].1.norm();
            xi = xi.max(nf * (1.0 + cp.b[k].abs()) / (1.0 + a));
            eta = eta.max(a);
        }
        let mut xb = vec![0.0; n * n];
        let mut sb = vec![0.0; n * n];
        for i in 0..n {
            xb[i * n + i] = xi;
            sb[i * n + i] = eta;
        }
        x.push(xb);
        s.push(sb);
    }
    Iterate { x, s, y: vec![0.0; cp.rows.len()] }
}

fn step_lengths(cp: &Compiled, it: &Iterate, dir: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (blk, &n) in cp.sizes.iter().enumerate() {
        ap = ap.min(max_step(n, &it.x[blk], &dir.dx[blk]));
        ad = ad.min(max_step(n, &it.s[blk], &dir.ds[blk]));
    }
    (ap, ad)
}

/// Flags divergence of one objective along a nearly exact infeasibility ray.
fn detect_infeasibility(cp: &Compiled, it: &Iterate, meas: &Measures, rd: &[Vec<f64>], c_norm: f64) -> bool {
    if meas.dobj > 1e8 * (1.0 + c_norm) {
        let ray: f64 = cp
            .c
            .iter()
            .zip(rd)
            .map(|(c, r)| c.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        if ray / meas.dobj < 1e-8 {
            return true;
        }
    }
    if meas.pobj < -1e8 * (1.0 + dense::frob_norm(&cp.b)) {
        let ax = cp.apply(&it.x);
        if dense::frob_norm(&ax) / meas.pobj.abs() < 1e-8 {
            return true;
        }
    }
    false
}

fn to_user_block(n: usize, internal: &[f64], complex: bool, factor: f64) -> HermitianOperator {
    let h = if complex {
        HermitianOperator::from_real_embedding(n, internal)
    } else {
        HermitianOperator::from_real(n, internal)
    };
    h.expect("solver blocks stay symmetric").scale(factor)
}

fn assemble(
    problem: &SdpProblem,
    cp: &Compiled,
    it: Iterate,
    meas: &Measures,
    status: SolveStatus,
    iterations: usize,
) -> SdpSolution {
    let mut y = vec![0.0; problem.num_constraints()];
    for (r, &k) in cp.row_origin.iter().enumerate() {
        y[k] = it.y[r];
    }
    let slack_scale = if cp.complex { 2.0 } else { 1.0 };
    let primal_blocks: Vec<HermitianOperator> = (0..cp.user_blocks)
        .map(|blk| to_user_block(problem.blocks[blk].size, &it.x[blk], cp.complex, 1.0))
        .collect();
    let dual_slacks = (0..cp.user_blocks)
        .map(|blk| to_user_block(problem.blocks[blk].size, &it.s[blk], cp.complex, slack_scale))
        .collect();
    let mut primal_value = problem.objective.constant;
    for t in &problem.objective.terms {
        primal_value += frobenius_inner(&t.coeff, &primal_blocks[t.block]).expect("validated sizes");
    }
    let dual_value = match problem.sense {
        Sense::Minimize => meas.dobj,
        Sense::Maximize => -meas.dobj,
    } + problem.objective.constant;
    SdpSolution {
        status,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        relative_gap: meas.rel_gap,
        primal_residual: meas.pinf,
        dual_residual: meas.dinf,
        iterations,
        primal_blocks,
        dual_multipliers: y,
        dual_slacks,
    }
}
