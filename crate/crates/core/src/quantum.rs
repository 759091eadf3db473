//! Preparations, the honest sequential measurement chain and its statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{frobenius_inner, ComplexMatrix, HermitianOperator, C64};

/// Outcome labels: `0`, `1` and the inconclusive outcome.
pub const OUTCOMES: [usize; 3] = [0, 1, 2];
pub const INCONCLUSIVE: usize = 2;

const RATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub delta: f64,
    pub r: f64,
    pub n: usize,
    pub d: usize,
}

impl ScenarioParams {
    pub fn new(delta: f64, r: f64) -> Result<Self> {
        let p = Self { delta, r, n: 2, d: 2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!("delta = {} outside [0, 1]", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!("r = {} outside [0, 1]", self.r)));
        }
        if self.n != 2 || self.d != 2 {
            return Err(Error::InvalidParameter(format!(
                "only two qubit preparations are supported (n = {}, d = {})",
                self.n, self.d
            )));
        }
        Ok(())
    }

    /// Overlap of the complementary pure states, rδ.
    pub fn x(&self) -> f64 {
        self.r * self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        if (op.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("state trace {} differs from 1", op.trace())));
        }
        let lo = op.min_eigenvalue();
        if lo < -1e-10 {
            return Err(Error::InvalidParameter(format!("state has negative eigenvalue {lo:.3e}")));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    states: Vec<DensityOperator>,
    priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<DensityOperator>, priors: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != priors.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: priors.len() });
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
        }
        if priors.iter().any(|&p| !(p >= 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("priors must be nonnegative and sum to 1".into()));
        }
        Ok(Self { states, priors })
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &HermitianOperator {
        self.states[x].op()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Prior-weighted average state.
    pub fn average(&self) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim());
        for (s, &p) in self.states.iter().zip(&self.priors) {
            acc.axpy(p, s.op());
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostMeasurementParams {
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryDecomposition {
    pub phi: [Vec<C64>; 2],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCMChain {
    pub bob_povm: [HermitianOperator; 3],
    pub bob_kraus: [ComplexMatrix; 3],
    pub charlie_povm: [HermitianOperator; 3],
}

impl MCMChain {
    /// Effective joint element `K_b† N_c K_b`, so that `p(b, c|x) = Tr[ρ_x G_{b,c}]`.
    pub fn joint_element(&self, b: usize, c: usize) -> HermitianOperator {
        HermitianOperator::adjoint_congruence(&self.bob_kraus[b], &self.charlie_povm[c])
    }

    /// Bob's outcome-averaged post-measurement state `Σ_b K_b ρ K_b†`.
    pub fn post_measurement_state(&self, rho: &HermitianOperator) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(rho.dim());
        for k in &self.bob_kraus {
            acc.axpy(1.0, &HermitianOperator::congruence(k, rho));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// `table[x][b][c] = p(b, c|x)`.
    pub table: Vec<[[f64; 3]; 3]>,
}

impl JointDistribution {
    pub fn p(&self, b: usize, c: usize, x: usize) -> f64 {
        self.table[x][b][c]
    }

    pub fn bob_marginal(&self, b: usize, x: usize) -> f64 {
        self.table[x][b].iter().sum()
    }

    pub fn charlie_marginal(&self, c: usize, x: usize) -> f64 {
        self.table[x].iter().map(|row| row[c]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedStats {
    pub conf_b: f64,
    pub inc_b: f64,
    pub conf_c: f64,
    pub inc_c: f64,
}

impl ObservedStats {
    /// Statistics constraining only Bob; Charlie's entries are unused.
    pub fn bob_only(conf_b: f64, inc_b: f64) -> Self {
        Self { conf_b, inc_b, conf_c: 0.5, inc_c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("conf_b", self.conf_b),
            ("inc_b", self.inc_b),
            ("conf_c", self.conf_c),
            ("inc_c", self.inc_c),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

fn real_ket(a: f64, b: f64) -> Vec<C64> {
    vec![C64::new(a, 0.0), C64::new(b, 0.0)]
}

/// Pure qubit pair `√((1+o)/2)|0⟩ ± √((1−o)/2)|1⟩` with overlap `o`.
fn symmetric_pair(overlap: f64) -> [Vec<C64>; 2] {
    let a = ((1.0 + overlap) / 2.0).max(0.0).sqrt();
    let b = ((1.0 - overlap) / 2.0).max(0.0).sqrt();
    [real_ket(a, b), real_ket(a, -b)]
}

/// Vectors orthogonal to each member of [`symmetric_pair`].
fn symmetric_pair_perp(overlap: f64) -> [Vec<C64>; 2] {
    let a = ((1.0 + overlap) / 2.0).max(0.0).sqrt();
    let b = ((1.0 - overlap) / 2.0).max(0.0).sqrt();
    [real_ket(b, -a), real_ket(b, a)]
}

pub fn build_preparations(params: &ScenarioParams) -> Result<Ensemble> {
    params.validate()?;
    let kets = symmetric_pair(params.delta);
    let noise = HermitianOperator::identity(2).scale((1.0 - params.r) / 2.0);
    let states = kets
        .iter()
        .map(|k| DensityOperator::new(HermitianOperator::ket_bra(k).scale(params.r).add(&noise)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(states, vec![0.5, 0.5])
}

/// Closed-form maximum confidence of the two-state ensemble.
pub fn max_confidence(params: &ScenarioParams) -> Result<f64> {
    params.validate()?;
    let x = params.x();
    if 1.0 - x * x <= 0.0 {
        return Ok(0.5);
    }
    let ratio = params.r * (1.0 - params.delta * params.delta).sqrt() / (1.0 - x * x).sqrt();
    Ok(0.5 * (1.0 + ratio.min(1.0)))
}

pub fn complementary_decomposition(params: &ScenarioParams) -> Result<ComplementaryDecomposition> {
    params.validate()?;
    if params.r == 0.0 {
        return Err(Error::Degenerate("maximally mixed preparations have no complementary states"));
    }
    Ok(ComplementaryDecomposition { phi: symmetric_pair(params.x()), confidence: max_confidence(params)? })
}

pub fn post_measurement_params(params: &ScenarioParams, q: f64) -> Result<PostMeasurementParams> {
    params.validate()?;
    let x = params.x();
    check_rate(x, q)?;
    let (r, delta) = (params.r, params.delta);
    if 1.0 - x * x <= 0.0 {
        return Ok(PostMeasurementParams { t: 1.0, s: 1.0 });
    }
    let inner = (1.0 - delta * delta + (1.0 - r * r) * delta * delta / (q * q)) / (1.0 - x * x);
    let t = (r * inner.max(0.0).sqrt()).min(1.0);
    let s = if t > 0.0 { (x / (q * t)).min(1.0) } else { 0.0 };
    Ok(PostMeasurementParams { t, s })
}

fn check_rate(x: f64, q: f64) -> Result<()> {
    if !(q >= x - RATE_SLACK && q <= 1.0 + RATE_SLACK) {
        return Err(Error::InfeasibleRate { q, min: x });
    }
    Ok(())
}

/// Ensemble of Bob's post-measurement states at inconclusive rate `q`.
pub fn post_measurement_ensemble(params: &ScenarioParams, q: f64) -> Result<Ensemble> {
    let pm = post_measurement_params(params, q)?;
    build_preparations(&ScenarioParams { delta: pm.s, r: pm.t, ..*params })
}

pub fn build_mcm_chain(params: &ScenarioParams, q_b: f64) -> Result<MCMChain> {
    params.validate()?;
    let x = params.x();
    check_rate(x, q_b)?;
    let q = q_b.clamp(x, 1.0);
    if 1.0 - x * x <= 1e-15 {
        let zero = HermitianOperator::zeros(2);
        return Ok(MCMChain {
            bob_povm: [zero.clone(), zero.clone(), HermitianOperator::identity(2)],
            bob_kraus: [ComplexMatrix::zeros(2), ComplexMatrix::zeros(2), ComplexMatrix::identity(2)],
            charlie_povm: [zero.clone(), zero, HermitianOperator::identity(2)],
        });
    }
    let c = (1.0 - q) / (1.0 - x * x);
    let a = q / (1.0 - x * x);
    let k = if q > 0.0 { (x / q).min(1.0) } else { 0.0 };

    let [phi0_perp, phi1_perp] = symmetric_pair_perp(x);
    let [xi0, xi1] = symmetric_pair(k);
    let m0 = HermitianOperator::ket_bra(&phi1_perp).scale(c);
    let m1 = HermitianOperator::ket_bra(&phi0_perp).scale(c);
    let m_inc = HermitianOperator::identity(2).sub(&m0).sub(&m1);

    let k0 = ComplexMatrix::outer(&xi0, &phi1_perp).scale(c.sqrt());
    let k1 = ComplexMatrix::outer(&xi1, &phi0_perp).scale(c.sqrt());
    let k_inc = ComplexMatrix::outer(&xi0, &phi1_perp)
        .add(&ComplexMatrix::outer(&xi1, &phi0_perp))
        .scale(a.sqrt());

    let [xi0_perp, xi1_perp] = symmetric_pair_perp(k);
    let d = 1.0 / (1.0 + k);
    let n0 = HermitianOperator::ket_bra(&xi1_perp).scale(d);
    let n1 = HermitianOperator::ket_bra(&xi0_perp).scale(d);
    let n_inc = HermitianOperator::identity(2).sub(&n0).sub(&n1);

    Ok(MCMChain {
        bob_povm: [m0, m1, m_inc],
        bob_kraus: [k0, k1, k_inc],
        charlie_povm: [n0, n1, n_inc],
    })
}

pub fn simulate_joint(chain: &MCMChain, ensemble: &Ensemble) -> Result<JointDistribution> {
    if ensemble.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ensemble.dim() });
    }
    let mut table = vec![[[0.0; 3]; 3]; ensemble.len()];
    for b in OUTCOMES {
        for c in OUTCOMES {
            let g = chain.joint_element(b, c);
            for (x, row) in table.iter_mut().enumerate() {
                row[b][c] = frobenius_inner(ensemble.state(x), &g)?;
            }
        }
    }
    Ok(JointDistribution { table })
}

fn confidence_and_rate(marginal: impl Fn(usize, usize) -> f64, priors: &[f64]) -> Result<(f64, f64)> {
    let mut correct = 0.0;
    let mut conclusive = 0.0;
    let mut inconclusive = 0.0;
    for (x, &px) in priors.iter().enumerate() {
        inconclusive += px * marginal(INCONCLUSIVE, x);
        correct += px * marginal(x, x);
        for (xp, &pxp) in priors.iter().enumerate() {
            conclusive += pxp * marginal(x, xp);
        }
    }
    if conclusive <= 1e-14 {
        return Err(Error::UndefinedConfidence);
    }
    Ok(((correct / conclusive).clamp(0.0, 1.0), inconclusive.clamp(0.0, 1.0)))
}

pub fn observed_stats(dist: &JointDistribution, priors: &[f64]) -> Result<ObservedStats> {
    if priors.len() != dist.table.len() {
        return Err(Error::DimensionMismatch { expected: dist.table.len(), found: priors.len() });
    }
    let (conf_b, inc_b) = confidence_and_rate(|b, x| dist.bob_marginal(b, x), priors)?;
    let (conf_c, inc_c) = confidence_and_rate(|c, x| dist.charlie_marginal(c, x), priors)?;
    Ok(ObservedStats { conf_b, inc_b, conf_c, inc_c })
}

/// Honest statistics at Bob's rate `q_b`, obtained by simulating the chain.
///
/// When Charlie never answers conclusively his confidence falls back to the
/// closed-form value the chain is built to attain.
pub fn honest_stats(params: &ScenarioParams, q_b: f64) -> Result<ObservedStats> {
    let ensemble = build_preparations(params)?;
    let chain = build_mcm_chain(params, q_b)?;
    let dist = simulate_joint(&chain, &ensemble)?;
    match observed_stats(&dist, ensemble.priors()) {
        Ok(s) => Ok(s),
        Err(Error::UndefinedConfidence) => {
            let cmax = max_confidence(params)?;
            let priors = ensemble.priors();
            let inc = |f: &dyn Fn(usize) -> f64| priors.iter().enumerate().map(|(x, p)| p * f(x)).sum::<f64>();
            let inc_b = inc(&|x| dist.bob_marginal(INCONCLUSIVE, x));
            let inc_c = inc(&|x| dist.charlie_marginal(INCONCLUSIVE, x));
            let conf_b = confidence_and_rate(|b, x| dist.bob_marginal(b, x), priors).map(|v| v.0).unwrap_or(cmax);
            let conf_c = confidence_and_rate(|c, x| dist.charlie_marginal(c, x), priors).map(|v| v.0).unwrap_or(cmax);
            Ok(ObservedStats { conf_b, inc_b, conf_c, inc_c })
        }
        Err(e) => Err(e),
    }
}
