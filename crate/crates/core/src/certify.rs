//! Certification programs: guessing probabilities and Gauss–Radau Shannon bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussradau::radau_quadrature;
use crate::matops::{frobenius_inner, HermitianOperator};
use crate::quantum::{Ensemble, ObservedStats, INCONCLUSIVE, OUTCOMES};
use crate::sdp::{
    hermitian_basis, place, solve_with, verify_certificate, DualCertificate, MatrixRows, Part, Placement, RepairMove,
    SdpProblem, SdpSolution, Sense, SolveStatus, SolverOptions, Tag, Term,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    MinEntropy,
    ShannonMintradeoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Bob,
    CharlieTrusted,
    Charlie,
    Joint,
}

impl Target {
    pub const ALL: [Target; 4] = [Target::Bob, Target::CharlieTrusted, Target::Charlie, Target::Joint];

    pub fn name(self) -> &'static str {
        match self {
            Target::Bob => "bob",
            Target::CharlieTrusted => "charlie-trusted",
            Target::Charlie => "charlie",
            Target::Joint => "joint",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown target {s:?}")))
    }
}

/// Feature ids attached to the statistics rows.
pub mod feature {
    pub const INC_B: usize = 0;
    pub const CONF_B: usize = 1;
    pub const INC_C: usize = 2;
    pub const CONF_C: usize = 3;
}

/// Affine min-tradeoff function `c_m − g^B Q^B − h^B C^B(1−Q^B) − g^C Q^C − h^C C^C(1−Q^C) − Tr R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCoeffs {
    pub g_b: f64,
    pub h_b: f64,
    pub g_c: f64,
    pub h_c: f64,
    pub trace_r: f64,
    pub c_m: f64,
}

impl TradeoffCoeffs {
    /// Raw affine value at `stats`, without clamping.
    pub fn evaluate(&self, stats: &ObservedStats) -> f64 {
        self.c_m
            - self.g_b * stats.inc_b
            - self.h_b * stats.conf_b * (1.0 - stats.inc_b)
            - self.g_c * stats.inc_c
            - self.h_c * stats.conf_c * (1.0 - stats.inc_c)
            - self.trace_r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBound {
    pub kind: BoundKind,
    pub target: Target,
    pub value_bits: f64,
    pub guessing_prob: Option<f64>,
    pub tradeoff_coeffs: Option<TradeoffCoeffs>,
    pub certificate: DualCertificate,
    pub stats: ObservedStats,
    /// `Infeasible` when no strategy reproduces `stats`; the primal fields are then NaN.
    pub status: SolveStatus,
    pub primal_value: f64,
    /// Duality gap reported by the solver on the minimal face.
    pub gap: f64,
    /// Certified value minus primal value, oriented so that it is nonnegative.
    pub certified_gap: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramOptions {
    /// Enter the statistics as equalities instead of lower bounds.
    pub confidence_equality: bool,
    pub solver: SolverOptions,
}

/// A built program together with the rows needed to read its multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub problem: SdpProblem,
    pub normalization: MatrixRows,
}

impl Program {
    /// The multiplier matrix `R` of the normalization constraint.
    pub fn normalization_operator(&self, y: &[f64]) -> HermitianOperator {
        let basis = hermitian_basis(self.normalization.dim);
        let mut r = HermitianOperator::zeros(self.normalization.dim);
        for (e, &k) in basis.iter().zip(&self.normalization.rows) {
            r.axpy(-y[k], e);
        }
        r
    }

    /// Multipliers encoding the normalization matrix `R` and the given
    /// `(feature, coefficient)` pairs in the affine-function sign convention;
    /// every other multiplier is zero.
    pub fn dual_point(&self, r: &HermitianOperator, features: &[(usize, f64)]) -> Vec<f64> {
        let mut y = vec![0.0; self.problem.num_constraints()];
        for (e, &k) in hermitian_basis(self.normalization.dim).iter().zip(&self.normalization.rows) {
            let norm = frobenius_inner(e, e).expect("basis size");
            y[k] = -frobenius_inner(e, r).expect("basis size") / norm;
        }
        for &(f, coeff) in features {
            if let Some(k) = self.feature_row(f) {
                y[k] = -coeff;
            }
        }
        y
    }

    pub fn feature_row(&self, f: usize) -> Option<usize> {
        (0..self.problem.num_constraints()).find(|&k| self.problem.constraint(k).tag == Tag::Feature(f))
    }

    /// Reads `g`, `h` and `Tr R` off multipliers; `c_m` is the objective constant.
    pub fn tradeoff_coeffs(&self, y: &[f64]) -> TradeoffCoeffs {
        let coeff = |f: usize| self.feature_row(f).map_or(0.0, |k| -y[k]);
        let mut trace_r = 0.0;
        for (k, &yk) in y.iter().enumerate() {
            let c = self.problem.constraint(k);
            if !matches!(c.tag, Tag::Feature(_)) {
                trace_r -= yk * c.rhs;
            }
        }
        TradeoffCoeffs {
            g_b: coeff(feature::INC_B),
            h_b: coeff(feature::CONF_B),
            g_c: coeff(feature::INC_C),
            h_c: coeff(feature::CONF_C),
            trace_r,
            c_m: self.problem.objective.constant,
        }
    }
}

fn check_ensemble(ensemble: &Ensemble, x_star: usize) -> Result<usize> {
    if x_star >= ensemble.len() {
        return Err(Error::InvalidParameter(format!("x* = {x_star} outside the preparation alphabet")));
    }
    if ensemble.len() != 2 {
        return Err(Error::InvalidParameter("exactly two preparations are supported".into()));
    }
    Ok(ensemble.dim())
}

fn weighted(ensemble: &Ensemble, x: usize) -> HermitianOperator {
    ensemble.state(x).scale(ensemble.priors()[x])
}

/// Adds the confidence and inconclusive-rate rows. `blocks` lists each
/// variable block with the outcome it assigns to the constrained party.
fn add_stats_rows(
    p: &mut SdpProblem,
    ensemble: &Ensemble,
    blocks: &[(usize, usize)],
    inc: f64,
    conf: f64,
    features: (usize, usize),
    equality: bool,
) {
    let mut inc_terms = Vec::new();
    let mut conf_terms = Vec::new();
    let average = ensemble.average();
    for &(blk, outcome) in blocks {
        if outcome == INCONCLUSIVE {
            inc_terms.push(Term { block: blk, coeff: average.clone() });
        } else {
            conf_terms.push(Term { block: blk, coeff: weighted(ensemble, outcome) });
        }
    }
    let conf_rhs = conf * (1.0 - inc);
    if equality {
        p.add_equality(inc_terms, inc, Tag::Feature(features.0));
        p.add_equality(conf_terms, conf_rhs, Tag::Feature(features.1));
    } else {
        p.add_inequality(inc_terms, inc, Tag::Feature(features.0));
        p.add_inequality(conf_terms, conf_rhs, Tag::Feature(features.1));
    }
}

/// Largest confidence any measurement attains on `ensemble`: the top
/// eigenvalue of `ρ̄^{-1/2} p_x ρ_x ρ̄^{-1/2}` over `x`.
pub fn ensemble_max_confidence(ensemble: &Ensemble) -> Option<f64> {
    let avg = ensemble.average();
    let (vals, vecs) = avg.eigen();
    if vals[0] <= 1e-12 {
        return None;
    }
    let mut inv_sqrt = HermitianOperator::zeros(avg.dim());
    for (v, u) in vals.iter().zip(&vecs) {
        inv_sqrt.axpy(1.0 / v.sqrt(), &HermitianOperator::ket_bra(u));
    }
    let mut best = 0.0f64;
    for x in 0..ensemble.len() {
        let w = weighted(ensemble, x);
        let m = HermitianOperator::congruence(inv_sqrt.matrix(), &w);
        best = best.max(m.max_eigenvalue());
    }
    Some(best)
}

fn coords(program: &Program, op: &HermitianOperator) -> Vec<(usize, f64)> {
    hermitian_basis(program.normalization.dim)
        .iter()
        .zip(&program.normalization.rows)
        .map(|(e, &k)| (k, frobenius_inner(e, op).expect("basis size") / frobenius_inner(e, e).expect("basis size")))
        .collect()
}

/// Directions on which a conclusive element for `x` can sit at confidence `c_star`.
fn confident_directions(ensemble: &Ensemble, x: usize, c_star: f64) -> Vec<Vec<crate::matops::C64>> {
    let gap = ensemble.average().scale(c_star).sub(&weighted(ensemble, x));
    let (vals, vecs) = gap.eigen();
    let tol = 1e-9 * (1.0 + gap.matrix().frobenius_norm());
    vals.iter().zip(vecs).filter(|(v, _)| v.abs() <= tol).map(|(_, u)| u).collect()
}

/// Smallest inconclusive rate compatible with confidence `c_star`, with the
/// operator `W` certifying it (`W ⪯ ρ̄`, `W` nonpositive on every confident
/// direction, `Tr W` equal to the rate).
fn min_inconclusive(ensemble: &Ensemble, c_star: f64) -> Option<(f64, HermitianOperator)> {
    let d = ensemble.dim();
    let mut p = SdpProblem::new(Sense::Minimize);
    let n = p.add_block("N", d);
    p.add_objective_term(n, ensemble.average());
    let mut dirs = Vec::new();
    for x in 0..ensemble.len() {
        let v = confident_directions(ensemble, x, c_star);
        if !v.is_empty() {
            dirs.push((p.add_block(format!("A[{x}]"), v.len()), v));
        }
    }
    let basis = hermitian_basis(d);
    for e in &basis {
        let mut terms = vec![Term { block: n, coeff: e.clone() }];
        for (blk, v) in &dirs {
            terms.push(Term { block: *blk, coeff: e.restrict(v) });
        }
        p.add_equality(terms, e.trace(), Tag::Normalization);
    }
    let sol = solve_with(&p, &SolverOptions::default()).ok()?;
    if sol.status != SolveStatus::Optimal {
        return None;
    }
    let mut w = HermitianOperator::zeros(d);
    for (e, y) in basis.iter().zip(&sol.dual_multipliers) {
        w.axpy(*y, e);
    }
    Some((sol.primal_value, w))
}

/// Records multiplier vectors exposing faces forced by extreme statistics:
/// confidence at the ensemble maximum puts conclusive elements on the
/// confident directions, the smallest compatible inconclusive rate then pins
/// the inconclusive elements too, and a unit rate removes conclusive ones.
fn add_confidence_hints(program: &mut Program, ensemble: &Ensemble, stats: &ObservedStats) {
    let Some(c_star) = ensemble_max_confidence(ensemble) else { return };
    let parties =
        [(stats.conf_b, stats.inc_b, feature::INC_B, feature::CONF_B), (stats.conf_c, stats.inc_c, feature::INC_C, feature::CONF_C)];
    let mut floor = None;
    for (conf, inc, inc_f, conf_f) in parties {
        let Some(inc_row) = program.feature_row(inc_f) else { continue };
        if inc >= 1.0 - 1e-9 {
            let mut hint = coords(program, &ensemble.average());
            hint.push((inc_row, -1.0));
            program.problem.add_exposing_hint(hint);
            continue;
        }
        let Some(conf_row) = program.feature_row(conf_f) else { continue };
        if (conf - c_star).abs() > 1e-9 {
            continue;
        }
        let mut hint = coords(program, &ensemble.average().scale(c_star));
        hint.push((inc_row, -c_star));
        hint.push((conf_row, -1.0));
        program.problem.add_exposing_hint(hint);

        if floor.is_none() {
            floor = Some(min_inconclusive(ensemble, c_star));
        }
        if let Some(Some((q_min, w))) = &floor {
            if (inc - q_min).abs() <= 1e-9 {
                let mut hint = coords(program, &w.scale(-1.0));
                hint.push((inc_row, 1.0));
                program.problem.add_exposing_hint(hint);
            }
        }
    }
}

fn add_normalization(p: &mut SdpProblem, blocks: &[usize], d: usize) -> MatrixRows {
    let parts: Vec<Part> = blocks.iter().map(|&b| Part::whole(b)).collect();
    p.add_matrix_equality(&parts, &HermitianOperator::identity(d), Tag::Normalization)
}

/// Builds the guessing-probability program for `target`.
///
/// For `CharlieTrusted` the ensemble must already be the post-measurement
/// ensemble, and Charlie's statistics are read from `conf_c`/`inc_c`.
pub fn build_guessing_program(
    target: Target,
    ensemble: &Ensemble,
    stats: &ObservedStats,
    x_star: usize,
    opts: &ProgramOptions,
) -> Result<Program> {
    let d = check_ensemble(ensemble, x_star)?;
    stats.validate()?;
    let rho_star = ensemble.state(x_star).clone();
    let mut p = SdpProblem::new(Sense::Maximize);
    let eq = opts.confidence_equality;

    match target {
        Target::Bob | Target::CharlieTrusted => {
            let mut grid = [[0usize; 3]; 3];
            for l in OUTCOMES {
                for b in OUTCOMES {
                    grid[l][b] = p.add_block(format!("M[{l}][{b}]"), d);
                }
            }
            for l in OUTCOMES {
                p.add_objective_term(grid[l][l], rho_star.clone());
            }
            let all: Vec<usize> = grid.iter().flatten().copied().collect();
            let normalization = add_normalization(&mut p, &all, d);
            for l in &OUTCOMES[..2] {
                let parts: Vec<Part> = grid[*l].iter().map(|&b| Part::whole(b)).collect();
                p.add_traceless_equality(&parts, d, Tag::Structural);
            }
            let labelled: Vec<(usize, usize)> =
                OUTCOMES.iter().flat_map(|&l| OUTCOMES.iter().map(move |&b| (grid[l][b], b))).collect();
            let (inc, conf, feats) = if target == Target::Bob {
                (stats.inc_b, stats.conf_b, (feature::INC_B, feature::CONF_B))
            } else {
                (stats.inc_c, stats.conf_c, (feature::INC_C, feature::CONF_C))
            };
            add_stats_rows(&mut p, ensemble, &labelled, inc, conf, feats, eq);
            p.add_repair(RepairMove::Global { rows: normalization.diagonal.clone() });
            let mut program = Program { problem: p, normalization };
            add_confidence_hints(&mut program, ensemble, stats);
            Ok(program)
        }
        Target::Charlie | Target::Joint => {
            let lambdas: Vec<(usize, usize)> = if target == Target::Joint {
                OUTCOMES.iter().flat_map(|&a| OUTCOMES.iter().map(move |&b| (a, b))).collect()
            } else {
                OUTCOMES.iter().map(|&c| (usize::MAX, c)).collect()
            };
            let mut blocks = Vec::new();
            for (li, _) in lambdas.iter().enumerate() {
                for b in OUTCOMES {
                    for c in OUTCOMES {
                        blocks.push((li, b, c, p.add_block(format!("G[{li}][{b}][{c}]"), d)));
                    }
                }
            }
            for &(li, b, c, blk) in &blocks {
                let (gb, gc) = lambdas[li];
                let guessed = c == gc && (gb == usize::MAX || b == gb);
                if guessed {
                    p.add_objective_term(blk, rho_star.clone());
                }
            }
            let all: Vec<usize> = blocks.iter().map(|t| t.3).collect();
            let normalization = add_normalization(&mut p, &all, d);
            for li in 0..lambdas.len() - 1 {
                let parts: Vec<Part> = blocks.iter().filter(|t| t.0 == li).map(|t| Part::whole(t.3)).collect();
                p.add_traceless_equality(&parts, d, Tag::Structural);
            }
            let by_b: Vec<(usize, usize)> = blocks.iter().map(|t| (t.3, t.1)).collect();
            let by_c: Vec<(usize, usize)> = blocks.iter().map(|t| (t.3, t.2)).collect();
            add_stats_rows(&mut p, ensemble, &by_b, stats.inc_b, stats.conf_b, (feature::INC_B, feature::CONF_B), eq);
            add_stats_rows(&mut p, ensemble, &by_c, stats.inc_c, stats.conf_c, (feature::INC_C, feature::CONF_C), eq);
            p.add_repair(RepairMove::Global { rows: normalization.diagonal.clone() });
            let mut program = Program { problem: p, normalization };
            add_confidence_hints(&mut program, ensemble, stats);
            Ok(program)
        }
    }
}

/// Renders an outcome pair with `-` for an unconstrained side.
fn pair_label((b, c): (usize, usize)) -> String {
    let side = |v: usize| if v == usize::MAX { "-".to_string() } else { v.to_string() };
    format!("{},{}", side(b), side(c))
}

/// Builds the Gauss–Radau Shannon-entropy program for `target`.
pub fn build_shannon_program(
    target: Target,
    ensemble: &Ensemble,
    m: usize,
    stats: &ObservedStats,
    x_star: usize,
    opts: &ProgramOptions,
) -> Result<Program> {
    let d = check_ensemble(ensemble, x_star)?;
    stats.validate()?;
    if !(2..=16).contains(&m) {
        return Err(Error::InvalidParameter(format!("node count {m} outside [2, 16]")));
    }
    if target == Target::CharlieTrusted {
        return Err(Error::InvalidParameter("the Shannon program has no trusted-Charlie variant".into()));
    }
    let quad = radau_quadrature(m)?;
    let rho_star = ensemble.state(x_star).clone();
    let mut p = SdpProblem::new(Sense::Minimize);
    p.set_objective_constant(quad.c_m);

    // Measurement blocks with their (b, c) labels; Bob's program has no c.
    let labels: Vec<(usize, usize)> = match target {
        Target::Bob => OUTCOMES.iter().map(|&b| (b, usize::MAX)).collect(),
        _ => OUTCOMES.iter().flat_map(|&b| OUTCOMES.iter().map(move |&c| (b, c))).collect(),
    };
    let g_blocks: Vec<usize> = labels
        .iter()
        .map(|&(b, c)| {
            if c == usize::MAX {
                p.add_block(format!("G[{b}]"), d)
            } else {
                p.add_block(format!("G[{b}][{c}]"), d)
            }
        })
        .collect();
    let normalization = add_normalization(&mut p, &g_blocks, d);

    // Guessed outcomes: Bob's b, Charlie's c, or the pair.
    let guesses: Vec<(usize, usize)> = match target {
        Target::Bob => OUTCOMES.iter().map(|&b| (b, usize::MAX)).collect(),
        Target::Charlie => OUTCOMES.iter().map(|&c| (usize::MAX, c)).collect(),
        _ => labels.clone(),
    };
    let matches = |guess: (usize, usize), label: (usize, usize)| {
        (guess.0 == usize::MAX || guess.0 == label.0) && (guess.1 == usize::MAX || guess.1 == label.1)
    };

    let mut lifts = Vec::new();
    for (t_i, _w_i, tau_i) in quad.interior() {
        for &guess in &guesses {
            let mut k1_parts = Vec::new();
            let mut k2_parts = Vec::new();
            for (gi, &label) in labels.iter().enumerate() {
                let y = p.add_block(format!("Y[t={t_i:.6}][{}][{}]", pair_label(guess), pair_label(label)), 2 * d);
                let hit = matches(guess, label);
                let first = if hit { 2.0 * tau_i } else { 0.0 };
                let second = tau_i * (if hit { 1.0 - t_i } else { 0.0 } + t_i);
                if first != 0.0 {
                    p.add_objective_term(
                        y,
                        place(2 * d, &rho_star.scale(first), Placement::OffDiagonal { row: 0, col: d }),
                    );
                }
                p.add_objective_term(y, place(2 * d, &rho_star.scale(second), Placement::Diagonal(d)));
                let link = p.add_matrix_equality(
                    &[Part::new(y, Placement::Diagonal(0), 1.0), Part::new(g_blocks[gi], Placement::Diagonal(0), -1.0)],
                    &HermitianOperator::zeros(d),
                    Tag::Structural,
                );
                lifts.push(RepairMove::Lift { rows: link.diagonal, block: y });
                p.add_hermitian_subblock(y, 0, d, d, Tag::Structural);
                k1_parts.push(Part::new(y, Placement::OffDiagonal { row: 0, col: d }, 1.0));
                k2_parts.push(Part::new(y, Placement::Diagonal(d), 1.0));
            }
            p.add_traceless_equality(&k1_parts, d, Tag::Structural);
            p.add_traceless_equality(&k2_parts, d, Tag::Structural);
        }
    }

    let eq = opts.confidence_equality;
    let by_b: Vec<(usize, usize)> = labels.iter().zip(&g_blocks).map(|(l, &g)| (g, l.0)).collect();
    add_stats_rows(&mut p, ensemble, &by_b, stats.inc_b, stats.conf_b, (feature::INC_B, feature::CONF_B), eq);
    if target != Target::Bob {
        let by_c: Vec<(usize, usize)> = labels.iter().zip(&g_blocks).map(|(l, &g)| (g, l.1)).collect();
        add_stats_rows(&mut p, ensemble, &by_c, stats.inc_c, stats.conf_c, (feature::INC_C, feature::CONF_C), eq);
    }
    for lift in lifts {
        p.add_repair(lift);
    }
    p.add_repair(RepairMove::Global { rows: normalization.diagonal.clone() });
    let mut program = Program { problem: p, normalization };
    add_confidence_hints(&mut program, ensemble, stats);
    Ok(program)
}

/// Solves a program and verifies its dual point.
pub fn solve_and_certify(program: &Program, opts: &SolverOptions) -> Result<(SdpSolution, DualCertificate)> {
    let solution = solve_with(&program.problem, opts)?;
    let cert = verify_certificate(&program.problem, &DualCertificate::from_solution(&solution))?;
    if !cert.valid {
        return Err(match solution.status {
            SolveStatus::Infeasible => Error::InternalInconsistency,
            SolveStatus::Optimal => Error::Certificate(format!(
                "optimal dual point fails verification (violation {:.3e})",
                cert.raw_violation
            )),
            SolveStatus::NumericalTrouble => Error::Solver(format!(
                "dual point not certifiable (status {:?}, violation {:.3e})",
                solution.status, cert.raw_violation
            )),
        });
    }
    Ok((solution, cert))
}

/// Dual bound for statistics no strategy reproduces. Zeroing the right-hand
/// sides of the `≥` statistics rows leaves every dual slack unchanged, so the
/// relaxed multipliers stay feasible for the original program.
fn relaxed_certificate(program: &Program, opts: &SolverOptions) -> Result<(SdpSolution, DualCertificate)> {
    let mut relaxed = program.problem.clone();
    for c in &mut relaxed.inequalities {
        if matches!(c.tag, Tag::Feature(_)) {
            c.rhs = 0.0;
        }
    }
    relaxed.exposing_hints.clear();
    let solution = solve_with(&relaxed, opts)?;
    let cert = verify_certificate(&program.problem, &DualCertificate::from_solution(&solution))?;
    if !cert.valid {
        return Err(Error::Solver(format!("relaxed dual point not certifiable ({:?})", solution.status)));
    }
    Ok((solution, cert))
}

/// Solves and certifies, falling back to [`relaxed_certificate`] when the
/// statistics leave the primal program infeasible.
fn certify_program(program: &Program, opts: &ProgramOptions) -> Result<(SdpSolution, DualCertificate)> {
    match solve_and_certify(program, &opts.solver) {
        Err(Error::InternalInconsistency) if !opts.confidence_equality => {
            let (mut solution, cert) = relaxed_certificate(program, &opts.solver)?;
            solution.status = SolveStatus::Infeasible;
            solution.primal_value = f64::NAN;
            solution.gap = f64::NAN;
            Ok((solution, cert))
        }
        other => other,
    }
}

fn oriented_gap(sense: Sense, certified: f64, primal: f64) -> f64 {
    match sense {
        Sense::Maximize => certified - primal,
        Sense::Minimize => primal - certified,
    }
}

pub fn guessing_bound(target: Target, ensemble: &Ensemble, stats: &ObservedStats, x_star: usize) -> Result<EntropyBound> {
    guessing_bound_with(target, ensemble, stats, x_star, &ProgramOptions::default())
}

pub fn guessing_bound_with(
    target: Target,
    ensemble: &Ensemble,
    stats: &ObservedStats,
    x_star: usize,
    opts: &ProgramOptions,
) -> Result<EntropyBound> {
    let program = build_guessing_program(target, ensemble, stats, x_star, opts)?;
    let (solution, certificate) = certify_program(&program, opts)?;
    let guessing_prob = certificate.certified_value.clamp(0.0, 1.0);
    let value_bits = if guessing_prob > 0.0 { (-guessing_prob.log2()).max(0.0) } else { f64::INFINITY };
    Ok(EntropyBound {
        kind: BoundKind::MinEntropy,
        target,
        value_bits,
        guessing_prob: Some(guessing_prob),
        tradeoff_coeffs: None,
        gap: solution.gap,
        certified_gap: oriented_gap(Sense::Maximize, certificate.certified_value, solution.primal_value),
        certificate,
        stats: *stats,
        status: solution.status,
        primal_value: solution.primal_value,
    })
}

pub fn shannon_tradeoff(
    target: Target,
    ensemble: &Ensemble,
    m: usize,
    stats: &ObservedStats,
    x_star: usize,
) -> Result<EntropyBound> {
    shannon_tradeoff_with(target, ensemble, m, stats, x_star, &ProgramOptions::default())
}

pub fn shannon_tradeoff_with(
    target: Target,
    ensemble: &Ensemble,
    m: usize,
    stats: &ObservedStats,
    x_star: usize,
    opts: &ProgramOptions,
) -> Result<EntropyBound> {
    let program = build_shannon_program(target, ensemble, m, stats, x_star, opts)?;
    let (solution, certificate) = certify_program(&program, opts)?;
    let coeffs = program.tradeoff_coeffs(&certificate.multipliers);
    Ok(EntropyBound {
        kind: BoundKind::ShannonMintradeoff,
        target,
        value_bits: certificate.certified_value.max(0.0),
        guessing_prob: None,
        tradeoff_coeffs: Some(coeffs),
        gap: solution.gap,
        certified_gap: oriented_gap(Sense::Minimize, certificate.certified_value, solution.primal_value),
        certificate,
        stats: *stats,
        status: solution.status,
        primal_value: solution.primal_value,
    })
}

/// Maximum confidence of preparation 0, via the homogenized linear program.
pub fn max_confidence_sdp(ensemble: &Ensemble) -> Result<f64> {
    let d = check_ensemble(ensemble, 0)?;
    let mut p = SdpProblem::new(Sense::Maximize);
    let m = p.add_block("M", d);
    p.add_objective_term(m, weighted(ensemble, 0));
    let row = p.add_equality(vec![Term { block: m, coeff: ensemble.average() }], 1.0, Tag::Normalization);
    p.add_repair(RepairMove::Global { rows: vec![row] });
    let solution = solve_with(&p, &SolverOptions::default())?;
    let cert = verify_certificate(&p, &DualCertificate::from_solution(&solution))?;
    if cert.valid {
        Ok(cert.certified_value)
    } else if solution.status == SolveStatus::Optimal {
        Ok(solution.dual_value)
    } else {
        Err(Error::Solver(format!("confidence program ended with {:?}", solution.status)))
    }
}

/// First-order accumulated entropy rate: the bound's value at its own statistics.
pub fn eat_first_order(bound: &EntropyBound) -> Result<f64> {
    if bound.kind != BoundKind::ShannonMintradeoff {
        return Err(Error::WrongKind { expected: "shannon-mintradeoff" });
    }
    Ok(bound.value_bits)
}

/// The min-tradeoff function of `bound` evaluated at other statistics, clamped at 0.
pub fn eat_at(bound: &EntropyBound, stats: &ObservedStats) -> Result<f64> {
    let coeffs = match (bound.kind, bound.tradeoff_coeffs) {
        (BoundKind::ShannonMintradeoff, Some(c)) => c,
        _ => return Err(Error::WrongKind { expected: "shannon-mintradeoff" }),
    };
    Ok(coeffs.evaluate(stats).max(0.0))
}
